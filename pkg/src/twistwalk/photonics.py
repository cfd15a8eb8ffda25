"""Radial-mode physics and state-preparation optics.

Covers the Laguerre-Gauss (LG) and Hypergeometric-Gauss (HyGG) mode
amplitudes, the q-plate radial leakage expansion, the pupil-plane
approximation that makes the separable walk model work, Gouy dephasing
between steps, OAM-dependent detection-efficiency correction, and the
phase-mask synthesis used to prepare walker states holographically.

Dimensionless coordinates rho = r / w0 and zeta = z / z_R are used for all
radial overlaps; z_R = pi w0^2 / lambda.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import eval_genlaguerre, factorial

from .errors import (AmplitudeRangeError, QuadratureError, ValidationError,
                     ZeroEfficiencyError)
from .lattice import SpinOrbitState

try:
    import mpmath as _mp
except ImportError:  # pragma: no cover
    _mp = None

QUAD_TOL = 1e-8
RADIAL_CUTOFF = 12.0  # exp(-2 rho^2) < 1e-125 there; Gaussian tail negligible


# ---------------------------------------------------------------------------
# mode amplitudes
# ---------------------------------------------------------------------------

def lg_amplitude(p: int, m: int, r, phi, z, w0: float, lam: float):
    """Full LG_{p,m} complex amplitude at (r, phi, z), orthonormal under the
    transverse area integral."""
    if p < 0:
        raise ValidationError("LG radial index p must be nonnegative")
    am = abs(m)
    zr = np.pi * w0 ** 2 / lam
    wz = w0 * np.sqrt(1 + (z / zr) ** 2)
    norm = np.sqrt(2.0 ** (am + 1) * factorial(p)
                   / (np.pi * wz ** 2 * factorial(p + am)))
    radial = (np.asarray(r) / wz) ** am * np.exp(-np.asarray(r) ** 2 / wz ** 2) \
        * eval_genlaguerre(p, am, 2 * np.asarray(r) ** 2 / wz ** 2)
    gouy = np.exp(-1j * (2 * p + am + 1) * np.arctan(z / zr))
    if z != 0:
        Rz = z * (1 + (zr / z) ** 2)
        curvature = np.exp(1j * np.pi * np.asarray(r) ** 2 / (lam * Rz))
    else:
        curvature = 1.0
    return norm * radial * curvature * np.exp(1j * m * np.asarray(phi)) * gouy


def lg_radial(p: int, m: int, rho, zeta: float):
    """LG radial profile in dimensionless units (azimuthal factor omitted)."""
    am = abs(m)
    wz = np.sqrt(1 + zeta ** 2)
    amp = (1 / wz) * (np.sqrt(2) * np.asarray(rho) / wz) ** am \
        * np.exp(-np.asarray(rho) ** 2 / wz ** 2) \
        * eval_genlaguerre(p, am, 2 * np.asarray(rho) ** 2 / wz ** 2)
    gouy = np.exp(-1j * (2 * p + am + 1) * np.arctan(zeta))
    if zeta != 0:
        curvature = np.exp(1j * np.asarray(rho) ** 2 * zeta / (1 + zeta ** 2))
    else:
        curvature = 1.0
    return amp * curvature * gouy


def hygg_radial(p: float, m: int, rho, zeta: float):
    """HyGG_{p,m} radial amplitude; p may be a negative real index.

    At zeta = 0 the profile reduces to rho^{p+|m|} e^{-rho^2} (up to
    normalization), which is returned directly.
    """
    am = abs(m)
    rho = np.asarray(rho, dtype=float)
    if zeta < 0:
        raise ValidationError("zeta must be nonnegative")
    if zeta < 1e-12:
        return rho ** (p + am) * np.exp(-rho ** 2)
    if _mp is None:  # pragma: no cover
        raise QuadratureError("mpmath is required for HyGG evaluation at zeta > 0")
    pref = (1j ** (am + 1)) \
        * np.sqrt(2.0 ** (p + am + 1) / (np.pi * float(_mp.gamma(p + am + 1)))) \
        * float(_mp.gamma(1 + am + p / 2)) / float(_mp.gamma(am + 1))
    z = complex(zeta)
    body = pref * z ** (p / 2) * (z + 1j) ** (-(1 + am + p / 2))
    out = np.empty(rho.shape, dtype=complex)
    flat = rho.reshape(-1)
    res = np.empty(flat.shape, dtype=complex)
    for i, rv in enumerate(flat):
        hyp = complex(_mp.hyp1f1(-p / 2, 1 + am, rv ** 2 / (z * (z + 1j))))
        res[i] = body * rv ** am * np.exp(-1j * rv ** 2 / (z + 1j)) * hyp
    out = res.reshape(rho.shape)
    return out


# ---------------------------------------------------------------------------
# radial overlaps
# ---------------------------------------------------------------------------

def _radial_quad(f, tol: float = QUAD_TOL) -> complex:
    re, ere = quad(lambda r: f(r).real, 0.0, RADIAL_CUTOFF, limit=400,
                   epsabs=1e-12, epsrel=1e-11)
    im, eim = quad(lambda r: f(r).imag, 0.0, RADIAL_CUTOFF, limit=400,
                   epsabs=1e-12, epsrel=1e-11)
    if max(ere, eim) > tol * max(1.0, abs(re), abs(im)):
        raise QuadratureError(f"radial quadrature error {max(ere, eim):.2e} above {tol:.0e}")
    return re + 1j * im


def radial_overlap(f, g) -> complex:
    """Normalized modal overlap <f|g> under the measure rho d rho."""
    nf = np.sqrt(_radial_quad(lambda r: abs(f(r)) ** 2 * r + 0j).real)
    ng = np.sqrt(_radial_quad(lambda r: abs(g(r)) ** 2 * r + 0j).real)
    ov = _radial_quad(lambda r: np.conj(f(r)) * g(r) * r)
    return ov / (nf * ng)


@dataclass(frozen=True)
class RadialExpansion:
    """LG-basis coefficients of a q-plate output, with the truncation residual."""

    m_input: int
    coefficients: tuple[float, ...]

    @property
    def powers(self) -> tuple[float, ...]:
        return tuple(c ** 2 for c in self.coefficients)

    @property
    def residual(self) -> float:
        return 1.0 - sum(self.powers)


def qplate_radial_coefficients(m: int, p_max: int = 3) -> RadialExpansion:
    """Expansion coefficients c_p of the tuned q-plate output (input LG_{0,m})
    over LG_{p,m+1}, computed as pupil-limit radial overlaps."""
    if p_max < 0:
        raise ValidationError("p_max must be nonnegative")
    g = lambda r: hygg_radial(abs(m) - abs(m + 1), m + 1, r, 0.0) + 0j
    coeffs = []
    for p in range(p_max + 1):
        f = lambda r, p=p: lg_radial(p, m + 1, r, 0.0) + 0j
        c = radial_overlap(f, g)
        coeffs.append(float(c.real))
    return RadialExpansion(m, tuple(coeffs))


def pupil_overlap(m: int, zeta: float) -> float:
    """Squared modal overlap of the q-plate output HyGG with the would-be
    unperturbed input profile, both propagated to zeta.

    Equals 1 at the pupil plane and decreases with zeta; about 0.93 at
    zeta = 0.1 for an m = 1 input.
    """
    p_h = abs(m) - abs(m + 1)
    h = lambda r: hygg_radial(p_h, m + 1, r, zeta)
    f = lambda r: lg_radial(0, m, r, zeta) + 0j
    return float(abs(radial_overlap(f, h)) ** 2)


@dataclass(frozen=True)
class PupilReport:
    m: int
    zeta: float
    overlap: float
    separable_ok: bool


def pupil_plane_action(m: int, zeta: float = 0.0, tol: float = 1e-8) -> PupilReport:
    """Verify that at the pupil plane the q-plate only raises the OAM: the
    output radial profile coincides with the input one (overlap 1)."""
    ov = pupil_overlap(m, zeta)
    return PupilReport(m, zeta, ov, bool(abs(ov - 1.0) < tol))


# ---------------------------------------------------------------------------
# propagation error channels
# ---------------------------------------------------------------------------

def gouy_step_dephasing(state: SpinOrbitState, d_over_zr: float) -> SpinOrbitState:
    """Apply the inter-step Gouy phases e^{-i 2|m| arctan(d/z_R)}."""
    if d_over_zr < 0:
        raise ValidationError("d/z_R must be nonnegative")
    phases = np.exp(-2j * np.abs(state.m_values) * np.arctan(d_over_zr))
    return state.with_amplitudes(state.amplitudes * phases[None, :])


def efficiency_correction(dist: dict[int, float], eta,
                          support_floor: float = 1e-15) -> dict[int, float]:
    """Undo an OAM-dependent detection efficiency: P_corr ~ P_raw / eta(m).

    eta must be positive on the support (outcomes with probability above
    support_floor); elsewhere it may be missing.
    """
    get = eta.get if hasattr(eta, "get") else None
    out = {}
    for m, p in dist.items():
        e = get(m) if get is not None else eta(m)
        if e is None or not (0.0 < e <= 1.0):
            if p > support_floor:
                raise ZeroEfficiencyError(f"efficiency for m={m} is {e!r}")
            e = 1.0
        out[m] = p / e
    total = sum(out.values())
    if total <= 0:
        raise ZeroEfficiencyError("corrected distribution has zero mass")
    return {m: v / total for m, v in out.items()}


# ---------------------------------------------------------------------------
# hologram synthesis
# ---------------------------------------------------------------------------

def inverse_sinc(a, tol: float = 1e-10):
    """Inverse of sinc(x) = sin(x)/x on the branch [-pi, 0], by bisection."""
    a = np.asarray(a, dtype=float)
    if np.any(a < -1e-12) or np.any(a > 1 + 1e-12):
        raise AmplitudeRangeError("inverse_sinc argument outside [0, 1]")
    a = np.clip(a, 0.0, 1.0)
    lo = np.full(a.shape, -np.pi)
    hi = np.zeros(a.shape)
    # sinc is monotone increasing from 0 to 1 on [-pi, 0]
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        val = np.sinc(mid / np.pi)
        lower = val < a
        lo = np.where(lower, mid, lo)
        hi = np.where(lower, hi, mid)
    out = 0.5 * (lo + hi)
    # the branch ends are exact; bisection is sqrt(eps)-limited at a = 1
    # where sinc is quadratically flat
    out = np.where(a == 1.0, 0.0, out)
    out = np.where(a == 0.0, -np.pi, out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class HologramMap:
    """Phase mask on a pixel grid, values in [0, 2 pi)."""

    phases: np.ndarray = field(repr=False)
    pixel_pitch: float
    carrier: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.phases.shape


def make_hologram(amplitude: np.ndarray, phase: np.ndarray,
                  carrier: float = 0.0, pixel_pitch: float = 1.0) -> HologramMap:
    """Phase mask F = M(A) Mod(P + B - pi M(A), 2 pi) producing the target
    field A e^{iP} in the first diffraction order, with M(A) = 1 +
    Sinc^-1(A)/pi and blazed grating B = 2 pi carrier x."""
    A = np.asarray(amplitude, dtype=float)
    P = np.asarray(phase, dtype=float)
    if A.shape != P.shape or A.ndim != 2:
        raise ValidationError("amplitude and phase must be 2-D arrays of equal shape")
    if np.any(A < -1e-12) or np.any(A > 1 + 1e-12):
        raise AmplitudeRangeError("target amplitude must lie in [0, 1]")
    h, w = A.shape
    x = (np.arange(w) - w / 2 + 0.5) * pixel_pitch
    B = 2 * np.pi * carrier * x[None, :] * np.ones((h, 1))
    M = 1.0 + inverse_sinc(A) / np.pi
    F = M * np.mod(P + B - np.pi * M, 2 * np.pi)
    F = np.mod(F, 2 * np.pi)
    return HologramMap(F, pixel_pitch, carrier)


def walker_target_field(coefficients: dict[int, complex], grid: tuple[int, int],
                        w0_pixels: float) -> tuple[np.ndarray, np.ndarray]:
    """Transverse field of a walker superposition sum_m c_m LG_{0,m} at the
    waist, sampled on the pixel grid; returns (normalized amplitude, phase)."""
    if not coefficients:
        raise ValidationError("empty walker superposition")
    h, w = grid
    x = np.arange(w) - w / 2 + 0.5
    y = np.arange(h) - h / 2 + 0.5
    X, Y = np.meshgrid(x, y)
    rho = np.hypot(X, Y) / w0_pixels
    phi = np.arctan2(Y, X)
    E = np.zeros(rho.shape, dtype=complex)
    for m, c in coefficients.items():
        E += c * lg_radial(0, m, rho, 0.0) * np.exp(1j * m * phi)
    peak = np.abs(E).max()
    if peak == 0:
        raise ValidationError("target field vanishes on the grid")
    return np.abs(E) / peak, np.angle(E)


def hologram_for_walker(coefficients: dict[int, complex], grid: tuple[int, int],
                        w0_pixels: float, carrier: float = 0.0,
                        pixel_pitch: float = 1.0) -> HologramMap:
    A, P = walker_target_field(coefficients, grid, w0_pixels)
    return make_hologram(A, P, carrier, pixel_pitch)


def pgm_bytes(holo: HologramMap) -> bytes:
    """8-bit binary PGM (P5) encoding, phase mapped linearly [0, 2pi) -> 0..255."""
    levels = np.floor(holo.phases / (2 * np.pi) * 256.0).astype(int)
    levels = np.clip(levels, 0, 255).astype(np.uint8)
    h, w = levels.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    return header + levels.tobytes()


def phase_csv_rows(holo: HologramMap) -> list[str]:
    rows = ["y,x,phase"]
    h, w = holo.shape
    for iy in range(h):
        for ix in range(w):
            rows.append(f"{iy},{ix},{holo.phases[iy, ix]!r}")
    return rows


def fork_winding(holo: HologramMap, radius_pixels: float,
                 samples: int = 4096) -> float:
    """Net phase winding of the mask along a circle around the grid center,
    in units of 2 pi.  On the ring where the target amplitude is maximal the
    blazed carrier cancels and the count equals the dislocation order."""
    h, w = holo.shape
    th = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    ix = np.clip(np.round(radius_pixels * np.cos(th) + w / 2 - 0.5).astype(int), 0, w - 1)
    iy = np.clip(np.round(radius_pixels * np.sin(th) + h / 2 - 0.5).astype(int), 0, h - 1)
    vals = holo.phases[iy, ix]
    d = np.diff(np.append(vals, vals[0]))
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return float(d.sum() / (2 * np.pi))
