import numpy as np
import pytest

import twistwalk as tw
from twistwalk import lattice, metrics, multiphoton
from twistwalk.multiphoton import (ModeIndex, SingleParticleUnitary,
                                   sample_joint_counts, scan_inequality)

SEQ = tw.StepSequence.wavepacket()  # two-photon experiments: QWP + q-plate


def hom_mixer():
    """Symmetric 50:50 two-mode mixer; its output ports are the detectors."""
    mat = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)
    modes = (ModeIndex("L", 0), ModeIndex("R", 0))
    return SingleParticleUnitary(mat, modes, modes)


def random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


L0 = ModeIndex("L", 0)
R0 = ModeIndex("R", 0)


# ---------------------------------------------------------------------------
# lifted unitary
# ---------------------------------------------------------------------------

def test_lift_zero_steps_identity():
    u = multiphoton.lift_walk_unitary(SEQ, 0, (-2, 2))
    sub = {m: i for i, m in enumerate(u.out_modes)}
    for j, mode in enumerate(u.in_modes):
        col = u.matrix[:, j]
        assert col[sub[mode]] == pytest.approx(1.0)
        assert np.abs(col).sum() == pytest.approx(1.0)


def test_lift_column_equals_evolution():
    u = multiphoton.lift_walk_unitary(SEQ, 3, (-1, 1))
    st = lattice.make_localized_state(0, tw.PolState.L(),
                                      (u.out_modes[0].m, u.out_modes[-1].m))
    final = tw.evolve(st, SEQ, 3)[-1]
    col = u.column(L0)
    assert np.abs(col - final.amplitudes.reshape(-1)).max() < 1e-12


def test_lift_isometry():
    u = multiphoton.lift_walk_unitary(SEQ, 3, (-3, 3))
    assert u.isometry_residual() < 1e-12


def test_lift_matches_random_superpositions():
    u = multiphoton.lift_walk_unitary(SEQ, 3, (-2, 2))
    rng = np.random.default_rng(11)
    o_min, o_max = u.out_modes[0].m, u.out_modes[-1].m
    width_in = 5
    for _ in range(10):
        c = rng.normal(size=2 * width_in) + 1j * rng.normal(size=2 * width_in)
        c /= np.linalg.norm(c)
        a = np.zeros((2, o_max - o_min + 1), complex)
        a[:, -2 - o_min: 3 - o_min if 3 - o_min != 0 else None] = c.reshape(2, width_in)
        st = lattice.SpinOrbitState(o_min, o_max, a)
        final = tw.evolve(st, SEQ, 3)[-1]
        assert np.abs(u.matrix @ c - final.amplitudes.reshape(-1)).max() < 1e-12


# ---------------------------------------------------------------------------
# joint distributions
# ---------------------------------------------------------------------------

def test_identity_network_coincidences():
    u = multiphoton.lift_walk_unitary(SEQ, 0, (-1, 1))
    d = tw.ipt_joint(u, L0, R0, split=False)
    assert d.get(L0, R0) == pytest.approx(1.0)
    assert d.total() == pytest.approx(1.0)
    dd = tw.dpt_joint(u, L0, R0, split=False)
    assert dd.get(L0, R0) == pytest.approx(1.0)


def test_hom_dip():
    u = hom_mixer()
    d = tw.ipt_joint(u, L0, R0, split=False)
    assert d.get(L0, R0) == pytest.approx(0.0, abs=1e-12)
    assert d.get(L0, L0) == pytest.approx(0.5)
    assert d.get(R0, R0) == pytest.approx(0.5)


def test_hom_classical_no_dip():
    u = hom_mixer()
    d = tw.dpt_joint(u, L0, R0, split=False)
    assert d.get(L0, R0) == pytest.approx(0.5)


def test_three_step_parity_zeros():
    u = multiphoton.lift_walk_unitary(SEQ, 3, (-1, 1))
    d = tw.ipt_joint(u, L0, R0)
    bad = sum(v for (p, q), v in d.probs.items()
              if p.m % 2 == 0 or q.m % 2 == 0)
    assert bad < 1e-14


def test_split_total_half_and_bunched_complement():
    u = multiphoton.lift_walk_unitary(SEQ, 3, (-1, 1))
    for model in (tw.ipt_joint, tw.dpt_joint):
        d = model(u, L0, R0, split=True)
        assert d.total() == pytest.approx(0.5, abs=1e-12)
    bun = multiphoton.bunched_total(u, L0, R0)
    di = tw.ipt_joint(u, L0, R0, split=True)
    assert di.total() + bun == pytest.approx(1.0, abs=1e-10)


def test_bosonic_symmetry():
    u = multiphoton.lift_walk_unitary(SEQ, 2, (-1, 1))
    d = tw.ipt_joint(u, L0, R0)
    for (p, q) in list(d.probs):
        assert d.get(p, q) == d.get(q, p)


def test_ipt_vs_dpt_differ():
    u = multiphoton.lift_walk_unitary(SEQ, 3, (-1, 1))
    di = tw.ipt_joint(u, L0, R0)
    dd = tw.dpt_joint(u, L0, R0)
    assert metrics.tvd(di.oam_pairs(), dd.oam_pairs()) > 0.05


def test_ipt_with_orthogonal_labels_reduces_to_dpt():
    # tag each photon with an orthogonal internal label and run the bosonic
    # formula on the doubled mode space; marginalizing the tags must give
    # the distinguishable-photon distribution
    u = multiphoton.lift_walk_unitary(SEQ, 2, (-1, 1))
    n_out, n_in = u.matrix.shape
    big = np.zeros((2 * n_out, 2 * n_in), complex)
    big[:n_out, :n_in] = u.matrix
    big[n_out:, n_in:] = u.matrix
    in_modes = tuple(ModeIndex(m.pol + "1", m.m) for m in u.in_modes) + \
        tuple(ModeIndex(m.pol + "2", m.m) for m in u.in_modes)
    out_modes = tuple(ModeIndex(m.pol + "1", m.m) for m in u.out_modes) + \
        tuple(ModeIndex(m.pol + "2", m.m) for m in u.out_modes)
    ubig = SingleParticleUnitary(big, in_modes, out_modes)
    d_tag = tw.ipt_joint(ubig, ModeIndex("L1", 0), ModeIndex("R2", 0))
    merged: dict = {}
    for (p, q), v in d_tag.probs.items():
        key = tuple(sorted((ModeIndex(p.pol[0], p.m), ModeIndex(q.pol[0], q.m))))
        merged[key] = merged.get(key, 0.0) + v
    d_dpt = tw.dpt_joint(u, L0, R0)
    keys = set(merged) | set(d_dpt.probs)
    for k in keys:
        assert merged.get(k, 0.0) == pytest.approx(d_dpt.probs.get(k, 0.0), abs=1e-12)


def test_linear_basis_output():
    u = multiphoton.lift_walk_unitary(SEQ, 2, (-1, 1))
    d = tw.ipt_joint(u, L0, R0, basis="linear")
    pols = {p.pol for (p, q) in d.probs for p in (p, q)}
    assert pols <= {"H", "V"}
    assert d.total() == pytest.approx(0.5, abs=1e-12)
    # polarization-summed OAM joint is basis independent
    dc = tw.ipt_joint(u, L0, R0, basis="circular")
    a, b = d.oam_pairs(), dc.oam_pairs()
    for k in set(a) | set(b):
        assert a.get(k, 0.0) == pytest.approx(b.get(k, 0.0), abs=1e-12)


def test_same_input_mode_rejected():
    u = multiphoton.lift_walk_unitary(SEQ, 1, (-1, 1))
    with pytest.raises(tw.ValidationError):
        tw.ipt_joint(u, L0, L0)


# ---------------------------------------------------------------------------
# inequalities
# ---------------------------------------------------------------------------

def test_dpt_never_violates_photon_inequality():
    rng = np.random.default_rng(42)
    for _ in range(100):
        dim = 6
        mat = random_unitary(rng, dim)
        modes = tuple(ModeIndex("L", m) for m in range(dim))
        u = SingleParticleUnitary(mat, modes, modes)
        d = tw.dpt_joint(u, modes[0], modes[1])
        worst = max(scan_inequality(d, "photon").values(), default=0.0)
        assert worst <= 1e-12


def test_ipt_walk_violates_photon_inequality():
    u = multiphoton.lift_walk_unitary(SEQ, 3, (-1, 1))
    d = tw.ipt_joint(u, L0, R0)
    assert max(scan_inequality(d, "photon").values()) > 1e-3


def test_diagonal_free_distribution_never_violates():
    probs = {(ModeIndex("L", 0), ModeIndex("R", 1)): 0.3,
             (ModeIndex("L", 1), ModeIndex("R", 0)): 0.2}
    d = multiphoton.JointDistribution(probs, split=True, basis="circular")
    ts = scan_inequality(d, "photon")
    assert all(t <= 0 for t in ts.values())
    ts_c = scan_inequality(d, "classical")
    assert all(t <= 0 for t in ts_c.values())


def test_classical_vs_photon_coefficient():
    probs = {(L0, L0): 0.09, (R0, R0): 0.09, (L0, R0): 0.05}
    d = multiphoton.JointDistribution(probs, split=True, basis="circular")
    assert tw.photon_inequality_T(d, L0, R0) == pytest.approx(0.04)
    assert tw.classical_inequality_T(d, L0, R0) == pytest.approx(0.09 / 3 - 0.05)


# ---------------------------------------------------------------------------
# significance
# ---------------------------------------------------------------------------

def _counts(pairs_counts, shots):
    counts = {tuple(sorted(k)): v for k, v in pairs_counts.items()}
    return metrics.CountRecord(counts, shots)


def test_significance_sqrt_scaling():
    base = {(L0, L0): 40, (R0, R0): 50, (L0, R0): 3}
    s1 = tw.violation_significance(_counts(base, 1000), "photon")[(L0, R0)]
    big = {k: 100 * v for k, v in base.items()}
    s2 = tw.violation_significance(_counts(big, 100000), "photon")[(L0, R0)]
    assert s2[0] == pytest.approx(s1[0], abs=1e-12)          # T intensive
    assert s2[2] == pytest.approx(10 * s1[2], abs=1e-9)      # sigma-units x10


def test_significance_zero_T():
    counts = {(L0, L0): 9, (R0, R0): 9, (L0, R0): 9}  # sqrt(81) - 9 = 0
    out = tw.violation_significance(_counts(counts, 100), "photon")
    T, sigma, z = out[(L0, R0)]
    assert T == 0.0 and z == 0.0 and sigma > 0


def test_significance_zero_counts_error():
    rec = _counts({(L0, L0): 5}, 100)
    other = ModeIndex("R", 7)
    with pytest.raises(tw.ZeroCountError):
        tw.violation_significance(rec, "photon",
                                  pairs=[(ModeIndex("L", 5), other)])


def test_synthetic_shots_give_significant_violation():
    u = multiphoton.lift_walk_unitary(SEQ, 3, (-1, 1))
    d = tw.ipt_joint(u, L0, R0)
    rec = sample_joint_counts(d, 10 ** 4, seed=7)
    sig = tw.violation_significance(rec, "photon")
    assert max(z for _, _, z in sig.values()) > 3.0


def test_sampling_deterministic():
    u = multiphoton.lift_walk_unitary(SEQ, 2, (-1, 1))
    d = tw.ipt_joint(u, L0, R0)
    a = sample_joint_counts(d, 5000, seed=1).counts
    b = sample_joint_counts(d, 5000, seed=1).counts
    assert a == b


def test_csv_rows_format():
    u = multiphoton.lift_walk_unitary(SEQ, 1, (-1, 1))
    d = tw.ipt_joint(u, L0, R0)
    rows = d.csv_rows()
    assert rows[0] == "pol1,m1,pol2,m2,P"
    assert all(len(r.split(",")) == 5 for r in rows[1:])
