"""Momentum-space analysis: Bloch operator, quasi-energy bands, group
velocities, coin-eigenstate trajectories and the winding number.

Momentum convention: the Bloch operator is the coin-space transfer matrix
for amplitude profiles a(m) ~ e^{+ikm}, with one lattice unit equal to the
q-plate shift |2q|.  An OAM raise by one unit therefore substitutes the
phase e^{-ik}, a lowering e^{+ik}.  With this choice a band-s wavepacket
centered at quasi-momentum k0 drifts at +d(omega_s)/dk sites per step.
The `mirror_k` flag evaluates U(-k) instead, which is the opposite (and
equally valid) sign convention.

Quasi-energy gauge: physical wave plates and q-plates contribute a
k-independent global phase that the bare element product carries along
(for the tuned q-plate step it is a factor -i).  Quasi-energies are only
defined up to that constant, so `dispersion` removes it: the reported
bands are shifted by one global phase chosen such that band 2 satisfies
omega_2(0) = 0 with nonnegative slope.  The chosen phase is recorded on
the returned BandStructure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBandError, NotPlanarError, ValidationError
from .lattice import QPlate, StepSequence, WavePlate

DEGENERACY_TOL = 1e-9
PLANARITY_TOL = 1e-6


@dataclass(frozen=True)
class BlochOperator:
    """2x2 coin-space operator at quasi-momentum k (bare element product)."""

    k: float
    matrix: np.ndarray = field(repr=False)


def bloch_operator(seq: StepSequence, k: float, mirror_k: bool = False) -> BlochOperator:
    """Compose the per-element 2x2 matrices with OAM shifts replaced by
    e^{-+ik} phases (one lattice unit = |2q|)."""
    kk = -k if mirror_k else k
    unit = seq.lattice_unit
    U = np.eye(2, dtype=complex)
    for e in seq.elements:
        if isinstance(e, WavePlate):
            M = e.coin_matrix()
        else:
            c = np.cos(e.retardance / 2)
            s = np.sin(e.retardance / 2)
            sgn = 1 if e.shift > 0 else -1
            ph = np.exp(2j * e.axis_offset)
            M = np.array([
                [c, -1j * s * np.conj(ph) * np.exp(1j * kk * sgn * abs(e.shift) / unit)],
                [-1j * s * ph * np.exp(-1j * kk * sgn * abs(e.shift) / unit), c],
            ])
        U = M @ U
    return BlochOperator(k, U)


def _eig_sorted(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition with a deterministic order (by eigenvalue angle)."""
    w, v = np.linalg.eig(U)
    order = np.argsort(np.angle(w))
    return w[order], v[:, order]


def _wrap(x):
    """Wrap into (-pi, pi] (the +pi edge is kept, not mapped to -pi)."""
    w = (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if w.ndim == 0 else w


def _anchor(seq: StepSequence, mirror_k: bool = False,
            h: float = 1e-6) -> tuple[float, np.ndarray, np.ndarray]:
    """Gauge phase chi and the band-2 / band-1 eigenvectors at k = 0.

    Candidate gauges zero one branch at k=0; band 2 is the zeroed branch.
    Ties are broken by (i) nonnegative slope of band 2 at k=0, then by
    (ii) the other branch landing in (0, pi].
    """
    w0, v0 = _eig_sorted(bloch_operator(seq, 0.0, mirror_k).matrix)
    if abs(w0[0] - w0[1]) < DEGENERACY_TOL:
        raise DegenerateBandError("bands are degenerate at k = 0")
    wh, vh = _eig_sorted(bloch_operator(seq, h, mirror_k).matrix)
    # align the k=h branches with the k=0 ones by eigenvector overlap
    ov = np.abs(v0.conj().T @ vh)
    if ov[0, 0] + ov[1, 1] < ov[0, 1] + ov[1, 0]:
        wh = wh[::-1]
        vh = vh[:, ::-1]
    om0 = -np.angle(w0)
    omh = -np.angle(wh)
    slopes = _wrap(omh - om0) / h
    if abs(slopes[0] - slopes[1]) > 1e-6:
        j2 = int(np.argmax(slopes))
    else:
        # flat bands: prefer the gauge placing the other band in (0, pi]
        j2 = 0
        for j in (0, 1):
            other = _wrap(om0[1 - j] - om0[j])
            if other <= 0:
                other += 2 * np.pi
            if 0.0 < other <= np.pi + 1e-12:
                j2 = j
                break
    chi = float(om0[j2])
    return chi, v0[:, j2], v0[:, 1 - j2]


def stokes_vector(coin: np.ndarray) -> np.ndarray:
    """Poincare-sphere unit vector of a normalized coin state (circular basis)."""
    aL, aR = coin
    x = np.conj(aL) * aR
    return np.array([2 * x.real, 2 * x.imag, abs(aL) ** 2 - abs(aR) ** 2])


def _track_vector(seq: StepSequence, v: np.ndarray, k_from: float, k_to: float,
                  mirror_k: bool, max_step: float = 0.05) -> np.ndarray:
    """Follow a band eigenvector from k_from to k_to by maximal overlap."""
    n = max(2, int(np.ceil(abs(k_to - k_from) / max_step)) + 1)
    for kk in np.linspace(k_from, k_to, n)[1:]:
        _, vv = _eig_sorted(bloch_operator(seq, kk, mirror_k).matrix)
        v = vv[:, int(np.argmax(np.abs(v.conj() @ vv)))]
    return v


@dataclass(frozen=True)
class BandStructure:
    """Gauged quasi-energies, coin eigenstates and Stokes vectors on a k-grid.

    omega[s-1, i] is the quasi-energy of band s at k_grid[i], in (-pi, pi];
    eigenstates[s-1, i] the matching coin eigenvector (gauge: <L|phi> real
    and nonnegative, falling back to <R|phi> when it vanishes).
    """

    seq: StepSequence
    k_grid: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    eigenstates: np.ndarray = field(repr=False)
    stokes: np.ndarray = field(repr=False)
    gauge_phase: float
    mirror_k: bool = False

    def bloch(self, k: float) -> np.ndarray:
        """Gauged Bloch matrix e^{i chi} U_k whose eigenvalues are e^{-i omega_s(k)}."""
        return np.exp(1j * self.gauge_phase) * bloch_operator(self.seq, k, self.mirror_k).matrix

    def gap(self) -> float:
        return float(np.abs(np.exp(-1j * self.omega[0]) - np.exp(-1j * self.omega[1])).min())


def _fix_vector_gauge(v: np.ndarray) -> np.ndarray:
    """Make <L|v> real >= 0 (or <R|v> real >= 0 where it vanishes)."""
    pivot = v[0] if abs(v[0]) > 1e-12 else v[1]
    return v * np.exp(-1j * np.angle(pivot))


def dispersion(seq: StepSequence, k_grid: np.ndarray,
               mirror_k: bool = False) -> BandStructure:
    """Diagonalize the Bloch operator over the grid, fix the gauge and the
    band labels, and return the band structure."""
    k_grid = np.asarray(k_grid, dtype=float)
    if k_grid.ndim != 1 or len(k_grid) < 2:
        raise ValidationError("k_grid must be a 1-D array with at least 2 points")
    if k_grid.min() < -np.pi - 1e-12 or k_grid.max() > np.pi + 1e-12:
        raise ValidationError("k_grid must lie within (-pi, pi]")
    N = len(k_grid)
    evals = np.empty((N, 2), complex)
    evecs = np.empty((N, 2, 2), complex)
    for i, k in enumerate(k_grid):
        w, v = _eig_sorted(bloch_operator(seq, k, mirror_k).matrix)
        if abs(w[0] - w[1]) < DEGENERACY_TOL:
            raise DegenerateBandError(f"bands are degenerate at k = {k}")
        evals[i], evecs[i] = w, v
    # continuity sort along the grid
    for i in range(1, N):
        ov = np.abs(evecs[i - 1].conj().T @ evecs[i])
        if ov[0, 0] + ov[1, 1] < ov[0, 1] + ov[1, 0]:
            evals[i] = evals[i][::-1]
            evecs[i] = evecs[i][:, ::-1]
    chi, v2, _ = _anchor(seq, mirror_k)
    i0 = int(np.argmin(np.abs(k_grid)))
    v2_at_i0 = _track_vector(seq, v2, 0.0, float(k_grid[i0]), mirror_k)
    col2 = int(np.argmax(np.abs(v2_at_i0.conj() @ evecs[i0])))
    cols = (1 - col2, col2)  # band 1 first, band 2 second
    omega = _wrap(-np.angle(evals[:, cols]).T - chi)
    vecs = np.empty((2, N, 2), complex)
    stok = np.empty((2, N, 3), float)
    for s in (0, 1):
        for i in range(N):
            v = _fix_vector_gauge(evecs[i][:, cols[s]])
            vecs[s, i] = v
            stok[s, i] = stokes_vector(v)
    return BandStructure(seq, k_grid, omega, vecs, stok, chi, mirror_k)


# ---------------------------------------------------------------------------
# closed form for the standard (QWP at 45 deg + tuned q-plate) step
# ---------------------------------------------------------------------------

def closed_form_omega(k, band: int):
    """Quasi-energy of the unbiased tuned step: omega_2 = arcsin(sin k / sqrt 2),
    omega_1 = pi - omega_2."""
    om2 = np.arcsin(np.sin(k) / np.sqrt(2))
    return om2 if band == 2 else _wrap(np.pi - om2)


def closed_form_velocity(k, band: int):
    """d omega / dk of the closed-form bands."""
    v2 = np.cos(k) / (np.sqrt(2) * np.sqrt(1 - np.sin(k) ** 2 / 2))
    return v2 if band == 2 else -v2


def is_standard_step(seq: StepSequence) -> bool:
    """True for the QWP@45 + q-plate(delta=pi, alpha0=0, 2q>0) composition
    (optionally followed by nothing), where the closed form applies."""
    if len(seq.elements) != 2:
        return False
    wp, qp = seq.elements
    return (isinstance(wp, WavePlate) and isinstance(qp, QPlate)
            and abs(wp.retardance - np.pi / 2) < 1e-12
            and abs(wp.axis_angle - np.pi / 4) < 1e-12
            and abs(qp.retardance - np.pi) < 1e-12
            and abs(qp.axis_offset) < 1e-12
            and qp.shift > 0)


# ---------------------------------------------------------------------------
# group velocity
# ---------------------------------------------------------------------------

def _band_at_k(seq: StepSequence, k: float,
               mirror_k: bool) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors (band1, band2) at k, identified by continuity from k=0."""
    _, v2, v1 = _anchor(seq, mirror_k)
    cur2 = _track_vector(seq, v2, 0.0, k, mirror_k)
    _, vv = _eig_sorted(bloch_operator(seq, k, mirror_k).matrix)
    i2 = int(np.argmax(np.abs(cur2.conj() @ vv)))
    return vv[:, 1 - i2], vv[:, i2]


def group_velocity(seq: StepSequence, k: float, h: float = 1e-5,
                   method: str = "auto", mirror_k: bool = False) -> tuple[float, float]:
    """(V1, V2) at quasi-momentum k, in lattice sites per step.

    method: "analytic" uses the closed form (standard step only), "fd" a
    central finite difference of the eigenphases, "auto" picks analytic
    when it applies.
    """
    if method not in ("auto", "analytic", "fd"):
        raise ValidationError(f"unknown method {method!r}")
    standard = is_standard_step(seq)
    if method == "analytic" and not standard:
        raise ValidationError("closed form applies only to the standard step")
    if standard and method in ("auto", "analytic"):
        # band relabeling under k -> -k makes omega and V mirror-invariant
        v2 = float(closed_form_velocity(k, 2))
        return -v2, v2
    v1, v2 = _band_at_k(seq, k, mirror_k)
    out = []
    for v in (v1, v2):
        lams = []
        for kk in (k - h, k + h):
            w, vv = _eig_sorted(bloch_operator(seq, kk, mirror_k).matrix)
            if abs(w[0] - w[1]) < DEGENERACY_TOL:
                raise DegenerateBandError(f"bands are degenerate near k = {k}")
            j = int(np.argmax(np.abs(v.conj() @ vv)))
            lams.append(w[j])
        dom = _wrap(-np.angle(lams[1]) + np.angle(lams[0]))
        out.append(dom / (2 * h))
    return float(out[0]), float(out[1])


# ---------------------------------------------------------------------------
# eigenstate circle and winding number
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StokesTrajectory:
    """Band-1 Stokes points over the Brillouin zone with the fitted plane."""

    k_grid: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    normal: np.ndarray
    planarity_residual: float


def eigenstate_circle(seq: StepSequence, k_grid: np.ndarray | None = None,
                      band: int = 1, mirror_k: bool = False) -> StokesTrajectory:
    """Stokes trajectory of a band's coin eigenstate and its best-fit plane
    through the origin."""
    if k_grid is None:
        n = 1024
        k_grid = -np.pi + 2 * np.pi * np.arange(1, n + 1) / n
    bs = dispersion(seq, k_grid, mirror_k)
    pts = bs.stokes[band - 1]
    moment = pts.T @ pts
    w, v = np.linalg.eigh(moment)
    normal = v[:, 0]  # least-variance direction
    residual = float(np.abs(pts @ normal).max())
    return StokesTrajectory(np.asarray(k_grid, float), pts, normal, residual)


def winding_number(seq: StepSequence, n_k: int = 1024,
                   mirror_k: bool = False) -> int:
    """Number of full rotations of the band-1 coin eigenstate around the
    fitted great circle as k sweeps the Brillouin zone.

    The plane normal carries no intrinsic orientation, so it is oriented
    along the net sense of traversal and the count returned is nonnegative.
    Raises NotPlanarError when the trajectory leaves the great circle.
    """
    grid = -np.pi + 2 * np.pi * np.arange(1, n_k + 1) / n_k
    traj = eigenstate_circle(seq, grid, band=1, mirror_k=mirror_k)
    if traj.planarity_residual > PLANARITY_TOL:
        raise NotPlanarError(
            f"Stokes trajectory off the great circle by {traj.planarity_residual:.3e}")
    n = traj.normal
    # in-plane orthonormal frame
    e1 = np.array([1.0, 0.0, 0.0])
    if abs(n @ e1) > 0.9:
        e1 = np.array([0.0, 1.0, 0.0])
    e1 = e1 - (e1 @ n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    th = np.arctan2(traj.points @ e2, traj.points @ e1)
    d = _wrap(np.diff(np.append(th, th[0])))
    w = d.sum() / (2 * np.pi)
    w = abs(w)
    if abs(w - round(w)) > 1e-6:
        raise NotPlanarError(f"winding {w} does not round to an integer")
    return int(round(w))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def band_csv_rows(seq: StepSequence, bs: BandStructure) -> list[str]:
    """CSV rows "k,omega1,omega2,V1,V2,s1x,s1y,s1z" over the band grid."""
    rows = ["k,omega1,omega2,V1,V2,s1x,s1y,s1z"]
    for i, k in enumerate(bs.k_grid):
        v1, v2 = group_velocity(seq, float(k), mirror_k=bs.mirror_k)
        s = bs.stokes[0, i]
        rows.append(",".join(repr(float(x)) for x in
                             (k, bs.omega[0, i], bs.omega[1, i], v1, v2, s[0], s[1], s[2])))
    return rows
