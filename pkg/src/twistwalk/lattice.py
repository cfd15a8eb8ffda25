"""Spin-orbit photon states on a truncated OAM lattice and their exact evolution.

A walker state lives on the product of a two-level polarization coin,
basis (|L>, |R>), and an integer OAM ladder m in [m_min, m_max].  The
amplitudes are stored as a complex array of shape (2, m_max - m_min + 1),
row 0 = L, row 1 = R.

Jones convention (fixed once, used everywhere): a retarder with retardance
g and fast axis at angle theta acts on circular components as

    W(g, theta) = [[cos(g/2),                 -i sin(g/2) e^{-2i theta}],
                   [-i sin(g/2) e^{+2i theta}, cos(g/2)               ]]

so a half-wave plate at theta=0 maps |L> -> -i|R>.  A q-plate is the same
operator with theta replaced by the azimuthal pattern q*phi + alpha0, which
is what turns the e^{+-2i q phi} factors into OAM shifts of +-2q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import TruncationError, ValidationError, WindowError

NORM_TOL = 1e-12
DEFAULT_EDGE_TOL = 1e-10


# ---------------------------------------------------------------------------
# polarization coin
# ---------------------------------------------------------------------------

class PolState:
    """Normalized two-component coin state in the circular (L, R) basis."""

    __slots__ = ("a",)

    def __init__(self, a_l: complex, a_r: complex, normalize: bool = False):
        v = np.array([a_l, a_r], dtype=complex)
        n = np.linalg.norm(v)
        if normalize:
            if n == 0:
                raise ValidationError("cannot normalize the zero coin state")
            v = v / n
        elif abs(n - 1.0) > 1e-9:
            raise ValidationError(f"coin state norm {n} is not 1; pass normalize=True")
        v.setflags(write=False)
        self.a = v

    @classmethod
    def L(cls) -> "PolState":
        return cls(1.0, 0.0)

    @classmethod
    def R(cls) -> "PolState":
        return cls(0.0, 1.0)

    @classmethod
    def H(cls) -> "PolState":
        return cls(1 / np.sqrt(2), 1 / np.sqrt(2))

    @classmethod
    def V(cls) -> "PolState":
        return cls(-1j / np.sqrt(2), 1j / np.sqrt(2))

    @classmethod
    def from_components(cls, alpha: complex, beta: complex) -> "PolState":
        """Coin (alpha, beta) on (|L>, |R>), normalized."""
        return cls(alpha, beta, normalize=True)

    def __repr__(self):
        return f"PolState({self.a[0]:.6g}, {self.a[1]:.6g})"


# ---------------------------------------------------------------------------
# optical elements and step sequences
# ---------------------------------------------------------------------------

def retarder_matrix(retardance: float, axis_angle: float) -> np.ndarray:
    """2x2 Jones matrix of a wave plate in the circular basis (convention above)."""
    c = np.cos(retardance / 2)
    s = np.sin(retardance / 2)
    return np.array([
        [c, -1j * s * np.exp(-2j * axis_angle)],
        [-1j * s * np.exp(2j * axis_angle), c],
    ])


@dataclass(frozen=True)
class WavePlate:
    """Uniform birefringent plate: retardance (rad) and fast-axis angle (rad)."""

    retardance: float
    axis_angle: float = 0.0

    def coin_matrix(self) -> np.ndarray:
        return retarder_matrix(self.retardance, self.axis_angle)


@dataclass(frozen=True)
class QPlate:
    """Patterned plate with topological charge q, retardance delta in [0, pi].

    Action on basis states (axis offset alpha0):
        |L, m> -> cos(delta/2)|L, m> - i sin(delta/2) e^{+2i alpha0} |R, m + 2q>
        |R, m> -> cos(delta/2)|R, m> - i sin(delta/2) e^{-2i alpha0} |L, m - 2q>
    """

    charge: float
    retardance: float
    axis_offset: float = 0.0

    def __post_init__(self):
        two_q = 2 * self.charge
        if abs(two_q - round(two_q)) > 1e-12 or round(two_q) == 0:
            raise ValidationError(f"q-plate charge must be a nonzero half-integer, got {self.charge}")
        if not (0.0 <= self.retardance <= np.pi + 1e-12):
            raise ValidationError(f"q-plate retardance must lie in [0, pi], got {self.retardance}")

    @property
    def shift(self) -> int:
        """Signed OAM shift 2q applied to the L -> R branch."""
        return int(round(2 * self.charge))


OpticalElement = WavePlate | QPlate


@dataclass(frozen=True)
class StepSequence:
    """Ordered optical elements making up one walk step."""

    elements: tuple[OpticalElement, ...]

    def __post_init__(self):
        if not self.elements:
            raise ValidationError("a step sequence must contain at least one element")
        units = {abs(e.shift) for e in self.elements if isinstance(e, QPlate)}
        if len(units) > 1:
            raise ValidationError(f"all q-plates in a sequence must share |2q|, got {sorted(units)}")

    @classmethod
    def standard_paper(cls, delta: float = np.pi, q: float = 0.5) -> "StepSequence":
        """QWP at 45 deg, q-plate, trailing HWP at 0 undoing the coin flip."""
        return cls((
            WavePlate(np.pi / 2, np.pi / 4),
            QPlate(q, delta),
            WavePlate(np.pi, 0.0),
        ))

    @classmethod
    def wavepacket(cls, delta: float = np.pi, q: float = 0.5) -> "StepSequence":
        """QWP at 45 deg followed by a q-plate; no trailing HWP."""
        return cls((
            WavePlate(np.pi / 2, np.pi / 4),
            QPlate(q, delta),
        ))

    @classmethod
    def preset(cls, name: str, delta: float = np.pi, q: float = 0.5) -> "StepSequence":
        if name == "standard-paper":
            return cls.standard_paper(delta, q)
        if name == "wavepacket":
            return cls.wavepacket(delta, q)
        raise ValidationError(f"unknown preset {name!r}")

    @property
    def lattice_unit(self) -> int:
        """OAM sites moved per elementary shift, |2q| (1 if no q-plates)."""
        for e in self.elements:
            if isinstance(e, QPlate):
                return abs(e.shift)
        return 1

    @property
    def max_reach(self) -> int:
        """Largest possible |OAM displacement| in one step."""
        return sum(abs(e.shift) for e in self.elements if isinstance(e, QPlate))


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpinOrbitState:
    """Coin x OAM amplitudes on the window [m_min, m_max]."""

    m_min: int
    m_max: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (2, self.m_max - self.m_min + 1):
            raise ValidationError(
                f"amplitude array shape {a.shape} does not match window "
                f"[{self.m_min}, {self.m_max}]")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.m_min, self.m_max + 1)

    @property
    def width(self) -> int:
        return self.m_max - self.m_min + 1

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def check_norm(self, tol: float = NORM_TOL):
        if abs(self.norm() - 1.0) > tol:
            raise ValidationError(f"state norm {self.norm()} deviates from 1 beyond {tol}")

    def edge_amplitude(self, sites: int = 1) -> float:
        """Largest |amplitude| on the outermost `sites` sites of either edge."""
        a = self.amplitudes
        return float(max(np.abs(a[:, :sites]).max(), np.abs(a[:, -sites:]).max()))

    def with_amplitudes(self, a: np.ndarray) -> "SpinOrbitState":
        return SpinOrbitState(self.m_min, self.m_max, a)


def make_localized_state(m0: int, coin: PolState,
                         window: tuple[int, int]) -> SpinOrbitState:
    """Separable state coin (x) |m0> on the given window."""
    m_min, m_max = int(window[0]), int(window[1])
    if not (m_min <= m0 <= m_max):
        raise WindowError(f"m0={m0} lies outside window [{m_min}, {m_max}]")
    a = np.zeros((2, m_max - m_min + 1), dtype=complex)
    a[:, m0 - m_min] = coin.a
    return SpinOrbitState(m_min, m_max, a)


def state_from_coin_and_profile(coin: np.ndarray, profile: np.ndarray,
                                window: tuple[int, int]) -> SpinOrbitState:
    """Product state coin (x) walker profile (normalized)."""
    a = np.outer(np.asarray(coin, complex), np.asarray(profile, complex))
    n = np.linalg.norm(a)
    if n == 0:
        raise ValidationError("zero walker profile")
    return SpinOrbitState(int(window[0]), int(window[1]), a / n)


# ---------------------------------------------------------------------------
# element application
# ---------------------------------------------------------------------------

def apply_waveplate(state: SpinOrbitState, retardance: float,
                    axis_angle: float) -> SpinOrbitState:
    """Rotate the coin identically at every m; OAM is untouched."""
    W = retarder_matrix(retardance, axis_angle)
    return state.with_amplitudes(W @ state.amplitudes)


def apply_qplate(state: SpinOrbitState, q: float, delta: float,
                 alpha0: float = 0.0,
                 edge_tol: float = DEFAULT_EDGE_TOL) -> SpinOrbitState:
    """Apply the q-plate operator; raises TruncationError if the shift would
    move amplitude larger than edge_tol off the window."""
    qp = QPlate(q, delta, alpha0)
    return _apply_qplate_array(state, qp, edge_tol)


def _apply_qplate_array(state: SpinOrbitState, qp: QPlate,
                        edge_tol: float) -> SpinOrbitState:
    a = state.amplitudes
    u = abs(qp.shift)
    c = np.cos(qp.retardance / 2)
    s = np.sin(qp.retardance / 2)
    if s != 0.0 and state.edge_amplitude(u) > edge_tol:
        raise TruncationError(
            f"boundary amplitude {state.edge_amplitude(u):.3e} exceeds "
            f"edge tolerance {edge_tol:.1e}; enlarge the window")
    out = c * a.copy()
    ph = np.exp(2j * qp.axis_offset)
    # L feeds R shifted by +2q, R feeds L shifted by -2q
    if qp.shift > 0:
        out[1, u:] += -1j * s * ph * a[0, :-u]
        out[0, :-u] += -1j * s * np.conj(ph) * a[1, u:]
    else:
        out[1, :-u] += -1j * s * ph * a[0, u:]
        out[0, u:] += -1j * s * np.conj(ph) * a[1, :-u]
    return state.with_amplitudes(out)


def apply_element(state: SpinOrbitState, element: OpticalElement,
                  edge_tol: float = DEFAULT_EDGE_TOL) -> SpinOrbitState:
    if isinstance(element, WavePlate):
        return state.with_amplitudes(element.coin_matrix() @ state.amplitudes)
    return _apply_qplate_array(state, element, edge_tol)


def apply_step(state: SpinOrbitState, seq: StepSequence,
               edge_tol: float = DEFAULT_EDGE_TOL) -> SpinOrbitState:
    """Apply one full step (all elements of the sequence, in order)."""
    for element in seq.elements:
        state = apply_element(state, element, edge_tol)
    return state


def evolve(state: SpinOrbitState, seq: StepSequence, n: int,
           edge_tol: float = DEFAULT_EDGE_TOL,
           interstep: Callable[[SpinOrbitState], SpinOrbitState] | None = None,
           ) -> list[SpinOrbitState]:
    """Evolve for n steps and return the states after steps 0..n.

    `interstep` is applied between consecutive steps (after step 1, 2, ...,
    n-1); it models propagation effects such as Gouy dephasing.
    """
    if n < 0:
        raise ValidationError("step count must be nonnegative")
    states = [state]
    for j in range(n):
        if j > 0 and interstep is not None:
            state = interstep(state)
        state = apply_step(state, seq, edge_tol)
        states.append(state)
    return states


def default_window(n: int, seq: StepSequence, m0: int = 0) -> tuple[int, int]:
    """Window guaranteeing no truncation for an n-step walk from site m0."""
    reach = (n + 2) * seq.lattice_unit
    return (m0 - reach, m0 + reach)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

def oam_marginal(state: SpinOrbitState) -> dict[int, float]:
    """P(m) summed over polarization, keyed by m."""
    p = np.sum(np.abs(state.amplitudes) ** 2, axis=0)
    return {int(m): float(v) for m, v in zip(state.m_values, p)}


def full_distribution(state: SpinOrbitState) -> dict[tuple[str, int], float]:
    """P(pol, m) keyed by ("L"|"R", m)."""
    p = np.abs(state.amplitudes) ** 2
    out = {}
    for i, pol in enumerate(("L", "R")):
        for m, v in zip(state.m_values, p[i]):
            out[(pol, int(m))] = float(v)
    return out


def coin_walker_entanglement(state: SpinOrbitState) -> float:
    """Von Neumann entropy (bits) of the reduced coin density matrix."""
    a = state.amplitudes
    rho = a @ a.conj().T
    ev = np.linalg.eigvalsh(rho)
    ev = ev[ev > 1e-15]
    return float(-(ev * np.log2(ev)).sum())


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def state_to_dict(state: SpinOrbitState) -> dict:
    """JSON-ready document; amplitudes flattened pol-major as [re, im] pairs."""
    flat = state.amplitudes.reshape(-1)
    return {
        "m_min": state.m_min,
        "m_max": state.m_max,
        "amplitudes": [[float(z.real), float(z.imag)] for z in flat],
    }


def state_from_dict(doc: dict) -> SpinOrbitState:
    m_min, m_max = int(doc["m_min"]), int(doc["m_max"])
    width = m_max - m_min + 1
    flat = np.array([complex(re, im) for re, im in doc["amplitudes"]])
    return SpinOrbitState(m_min, m_max, flat.reshape(2, width))


def marginal_csv_rows(dist: dict[int, float]) -> list[str]:
    """Rows of the "m,P" export, ordered by m."""
    rows = ["m,P"]
    for m in sorted(dist):
        rows.append(f"{m},{dist[m]!r}")
    return rows
