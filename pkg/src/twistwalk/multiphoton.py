"""Two-photon walks: bosonic joint distributions, the output beam splitter,
and the photon-correlation inequalities.

Mode labels combine a polarization tag and an OAM value.  The n-step walk
unitary is lifted to two bosons entering modes i1, i2; the unordered joint
amplitude is the 2x2 permanent U[p,i1] U[q,i2] + U[q,i1] U[p,i2].  The
`split=True` distributions include the 50:50 output splitter (transmission
1/sqrt2, reflection i/sqrt2), i.e. the probability of detecting one photon
in state p on one port and one in state q on the other; these sum to 1/2,
the other half being both photons on the same port.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import lattice, metrics
from .errors import ValidationError, ZeroCountError
from .lattice import SpinOrbitState, StepSequence


class ModeIndex(NamedTuple):
    pol: str
    m: int


# circular -> linear coin change of basis: rows (H, V), columns (L, R)
_C_TO_LINEAR = np.array([[1.0, 1.0], [1.0j, -1.0j]]) / np.sqrt(2)


@dataclass(frozen=True)
class SingleParticleUnitary:
    """Dense single-photon map from input modes (columns) to output modes
    (rows).  Columns are orthonormal; the output window may be wider than
    the input one so that no amplitude is truncated."""

    matrix: np.ndarray = field(repr=False)
    in_modes: tuple[ModeIndex, ...]
    out_modes: tuple[ModeIndex, ...]
    basis: str = "circular"

    def column(self, mode: ModeIndex) -> np.ndarray:
        return self.matrix[:, self.in_modes.index(mode)]

    def isometry_residual(self) -> float:
        g = self.matrix.conj().T @ self.matrix
        return float(np.abs(g - np.eye(g.shape[0])).max())


def _mode_list(m_min: int, m_max: int, pols=("L", "R")) -> tuple[ModeIndex, ...]:
    return tuple(ModeIndex(pol, m) for pol in pols for m in range(m_min, m_max + 1))


def lift_walk_unitary(seq: StepSequence, n: int,
                      window: tuple[int, int]) -> SingleParticleUnitary:
    """n-step walk matrix over the (pol, m) modes of `window`.

    The output window is padded by the walk reach so every input column
    evolves without truncation; the result is an exact isometry.
    """
    m_min, m_max = int(window[0]), int(window[1])
    pad = (n + 1) * seq.max_reach
    o_min, o_max = m_min - pad, m_max + pad
    width_in = m_max - m_min + 1
    width_out = o_max - o_min + 1
    cols = []
    for pol_row in (0, 1):
        for m in range(m_min, m_max + 1):
            a = np.zeros((2, width_out), dtype=complex)
            a[pol_row, m - o_min] = 1.0
            st = SpinOrbitState(o_min, o_max, a)
            for _ in range(n):
                st = lattice.apply_step(st, seq)
            cols.append(st.amplitudes.reshape(-1))
    return SingleParticleUnitary(
        np.array(cols).T,
        _mode_list(m_min, m_max),
        _mode_list(o_min, o_max),
    )


def _to_basis(u: SingleParticleUnitary, basis: str) -> SingleParticleUnitary:
    if basis == u.basis:
        return u
    if basis != "linear" or u.basis != "circular":
        raise ValidationError(f"unsupported basis change {u.basis!r} -> {basis!r}")
    width = len(u.out_modes) // 2
    m = u.matrix.reshape(2, width, -1)
    m2 = np.einsum("ab,bwc->awc", _C_TO_LINEAR, m).reshape(2 * width, -1)
    out = tuple(ModeIndex(pol, mode.m)
                for pol, mode in zip(("H",) * width + ("V",) * width, u.out_modes))
    return SingleParticleUnitary(m2, u.in_modes, out, basis="linear")


@dataclass(frozen=True)
class JointDistribution:
    """Probabilities over unordered output-mode pairs.

    With split=True these are post-splitter coincidences (total 1/2);
    with split=False, the raw two-boson output probabilities (total 1).
    """

    probs: dict = field(repr=False)
    split: bool
    basis: str

    def total(self) -> float:
        return float(sum(self.probs.values()))

    def get(self, p: ModeIndex, q: ModeIndex) -> float:
        key = tuple(sorted((p, q)))
        return self.probs.get(key, 0.0)

    def oam_pairs(self) -> dict:
        """Marginal over polarization: unordered (m1, m2) -> probability."""
        out: dict = {}
        for (p, q), v in self.probs.items():
            key = tuple(sorted((p.m, q.m)))
            out[key] = out.get(key, 0.0) + v
        return out

    def csv_rows(self) -> list[str]:
        rows = ["pol1,m1,pol2,m2,P"]
        for (p, q) in sorted(self.probs):
            rows.append(f"{p.pol},{p.m},{q.pol},{q.m},{self.probs[(p, q)]!r}")
        return rows


def _joint(u: SingleParticleUnitary, in1: ModeIndex, in2: ModeIndex,
           distinguishable: bool, split: bool, basis: str,
           prob_floor: float) -> JointDistribution:
    u = _to_basis(u, basis)
    c1 = u.column(in1)
    c2 = u.column(in2)
    n_out = len(u.out_modes)
    if distinguishable:
        pd = np.abs(np.outer(c1, c2)) ** 2
        mat = pd + pd.T
        diag = np.abs(c1 * c2) ** 2
    else:
        amp = np.outer(c1, c2)
        amp = amp + amp.T  # two-boson permanent amplitude for p != q
        mat = np.abs(amp) ** 2
        diag = 2.0 * np.abs(c1 * c2) ** 2
    factor = 0.5 if split else 1.0
    probs = {}
    for i in range(n_out):
        if diag[i] > prob_floor:
            probs[(u.out_modes[i], u.out_modes[i])] = factor * float(diag[i])
        for j in range(i + 1, n_out):
            if mat[i, j] > prob_floor:
                key = tuple(sorted((u.out_modes[i], u.out_modes[j])))
                probs[key] = factor * float(mat[i, j])
    return JointDistribution(probs, split, basis)


def ipt_joint(u: SingleParticleUnitary, in1: ModeIndex, in2: ModeIndex,
              split: bool = True, basis: str = "circular",
              prob_floor: float = 1e-300) -> JointDistribution:
    """Joint distribution for indistinguishable photons (bosonic permanent)."""
    if in1 == in2:
        raise ValidationError("the two input photons must occupy distinct modes")
    return _joint(u, in1, in2, False, split, basis, prob_floor)


def dpt_joint(u: SingleParticleUnitary, in1: ModeIndex, in2: ModeIndex,
              split: bool = True, basis: str = "circular",
              prob_floor: float = 1e-300) -> JointDistribution:
    """Joint distribution for distinguishable photons (classical composition)."""
    if in1 == in2:
        raise ValidationError("the two input photons must occupy distinct modes")
    return _joint(u, in1, in2, True, split, basis, prob_floor)


def bunched_total(u: SingleParticleUnitary, in1: ModeIndex, in2: ModeIndex,
                  distinguishable: bool = False, basis: str = "circular") -> float:
    """Probability of both photons exiting the same splitter port."""
    d = _joint(u, in1, in2, distinguishable, split=True, basis=basis,
               prob_floor=0.0)
    return 1.0 - d.total()


# ---------------------------------------------------------------------------
# correlation inequalities
# ---------------------------------------------------------------------------

def classical_inequality_T(dist: JointDistribution, p: ModeIndex, q: ModeIndex) -> float:
    """T = (1/3) sqrt(P_pp P_qq) - P_pq; positive values violate the bound
    obeyed by any pair of mutually incoherent classical sources."""
    return float(np.sqrt(dist.get(p, p) * dist.get(q, q)) / 3.0 - dist.get(p, q))


def photon_inequality_T(dist: JointDistribution, p: ModeIndex, q: ModeIndex) -> float:
    """T = sqrt(P_pp P_qq) - P_pq; positive values violate the bound obeyed
    by two distinguishable photons."""
    return float(np.sqrt(dist.get(p, p) * dist.get(q, q)) - dist.get(p, q))


def outcome_modes(*dists: JointDistribution, floor: float = 1e-12) -> list[ModeIndex]:
    """Modes appearing with probability above floor in any given distribution."""
    seen = {}
    for d in dists:
        for (p, q), v in d.probs.items():
            if v > floor:
                seen[p] = True
                seen[q] = True
    return sorted(seen)


def scan_inequality(dist: JointDistribution, which: str = "photon",
                    floor: float = 1e-12) -> dict:
    """T values over all unordered outcome pairs with support above floor."""
    tfun = photon_inequality_T if which == "photon" else classical_inequality_T
    modes = outcome_modes(dist, floor=floor)
    out = {}
    for i, p in enumerate(modes):
        for q in modes[i + 1:]:
            out[(p, q)] = tfun(dist, p, q)
    return out


def violation_significance(record: metrics.CountRecord, which: str = "photon",
                           pairs=None) -> dict:
    """Inequality T on count-normalized probabilities with first-order
    Poisson error propagation; returns (p, q) -> (T, sigma, T/sigma).

    Pairs whose three counts are all zero are skipped unless explicitly
    requested, in which case ZeroCountError is raised.
    """
    if which not in ("photon", "classical"):
        raise ValidationError(f"unknown inequality {which!r}")
    coeff = 1.0 if which == "photon" else 1.0 / 3.0
    shots = record.shots
    counts = record.counts

    def n_of(a: ModeIndex, b: ModeIndex) -> int:
        return int(counts.get(tuple(sorted((a, b))), 0))

    if pairs is None:
        modes = sorted({m for key in counts for m in key})
        pairs_iter = [(p, q) for i, p in enumerate(modes) for q in modes[i + 1:]]
        strict = False
    else:
        pairs_iter = list(pairs)
        strict = True
    out = {}
    for p, q in pairs_iter:
        npp, nqq, npq = n_of(p, p), n_of(q, q), n_of(p, q)
        if npp == 0 and nqq == 0 and npq == 0:
            if strict:
                raise ZeroCountError(f"all counts for pair ({p}, {q}) are zero")
            continue
        T = (coeff * np.sqrt(npp * nqq) - npq) / shots
        var = (coeff ** 2 * (npp + nqq) / 4.0 + npq) / shots ** 2
        sigma = float(np.sqrt(var))
        out[(p, q)] = (float(T), sigma, float(T / sigma) if sigma > 0 else 0.0)
    return out


def sample_joint_counts(dist: JointDistribution, shots: int,
                        seed: int) -> metrics.CountRecord:
    """Multinomial coincidence counts; for split distributions the missing
    mass (bunched events) is an implicit undetected bucket."""
    return metrics.sample_counts(dist.probs, shots, seed)
