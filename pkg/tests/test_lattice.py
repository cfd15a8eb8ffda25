import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import twistwalk as tw
from twistwalk.lattice import (default_window, marginal_csv_rows,
                               retarder_matrix, state_from_dict, state_to_dict)

from oracles import (dense_evolve, dense_step_matrix, jones_retarder_circular,
                     state_vector)


# ---------------------------------------------------------------------------
# state preparation
# ---------------------------------------------------------------------------

def test_localized_delta():
    st_ = tw.make_localized_state(0, tw.PolState.L(), (-5, 5))
    assert st_.amplitudes[0, 5] == 1.0
    assert st_.norm() == pytest.approx(1.0, abs=1e-15)
    assert np.count_nonzero(st_.amplitudes) == 1


def test_localized_circular_coin():
    coin = tw.PolState.from_components(1, 1j)
    st_ = tw.make_localized_state(0, coin, (-4, 4))
    assert st_.amplitudes[0, 4] == pytest.approx(1 / np.sqrt(2))
    assert st_.amplitudes[1, 4] == pytest.approx(1j / np.sqrt(2))


def test_localized_outside_window():
    with pytest.raises(tw.WindowError):
        tw.make_localized_state(6, tw.PolState.R(), (-5, 5))


def test_coin_requires_normalization():
    with pytest.raises(tw.ValidationError):
        tw.PolState(1.0, 1.0)


# ---------------------------------------------------------------------------
# wave plates
# ---------------------------------------------------------------------------

def test_hwp_swaps_circular():
    st_ = tw.make_localized_state(2, tw.PolState.L(), (-3, 3))
    out = tw.apply_waveplate(st_, np.pi, 0.0)
    assert out.amplitudes[1, 5] == pytest.approx(-1j)
    assert abs(out.amplitudes[0, 5]) < 1e-15


def test_qwp_twice_is_hwp():
    q = retarder_matrix(np.pi / 2, np.pi / 4)
    h = retarder_matrix(np.pi, np.pi / 4)
    assert np.abs(q @ q - h).max() < 1e-12


def test_qwp45_unbiased():
    st_ = tw.make_localized_state(0, tw.PolState.L(), (-2, 2))
    out = tw.apply_waveplate(st_, np.pi / 2, np.pi / 4)
    pops = np.abs(out.amplitudes[:, 2]) ** 2
    assert pops == pytest.approx([0.5, 0.5], abs=1e-12)


def test_retarder_matches_linear_basis_oracle():
    for gamma, theta in [(np.pi, 0.0), (np.pi / 2, np.pi / 4), (0.9, 0.3),
                         (2.5, -1.1), (np.pi / 2, 0.0)]:
        assert np.abs(retarder_matrix(gamma, theta)
                      - jones_retarder_circular(gamma, theta)).max() < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(-np.pi, np.pi))
def test_retarder_unitary(gamma, theta):
    W = retarder_matrix(gamma, theta)
    assert np.abs(W.conj().T @ W - np.eye(2)).max() < 1e-12


# ---------------------------------------------------------------------------
# q-plates
# ---------------------------------------------------------------------------

def test_qplate_tuned_shift():
    st_ = tw.make_localized_state(0, tw.PolState.L(), (-3, 3))
    out = tw.apply_qplate(st_, 0.5, np.pi)
    assert out.amplitudes[1, 4] == pytest.approx(-1j)
    assert out.norm() == pytest.approx(1.0, abs=1e-15)


def test_qplate_delta_zero_is_identity():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 9)) + 1j * rng.normal(size=(2, 9))
    a /= np.linalg.norm(a)
    st_ = tw.SpinOrbitState(-4, 4, a)
    out = tw.apply_qplate(st_, 0.5, 0.0)
    assert np.abs(out.amplitudes - a).max() == 0.0


def test_qplate_half_tuned():
    st_ = tw.make_localized_state(2, tw.PolState.R(), (-3, 3))
    out = tw.apply_qplate(st_, 0.5, np.pi / 2)
    r = 1 / np.sqrt(2)
    assert out.amplitudes[1, 5] == pytest.approx(r)
    assert out.amplitudes[0, 4] == pytest.approx(-1j * r)


def test_qplate_axis_offset_phases():
    a0 = 0.37
    st_ = tw.make_localized_state(0, tw.PolState.L(), (-2, 2))
    out = tw.apply_qplate(st_, 0.5, np.pi, alpha0=a0)
    assert out.amplitudes[1, 3] == pytest.approx(-1j * np.exp(2j * a0))
    st_r = tw.make_localized_state(0, tw.PolState.R(), (-2, 2))
    out_r = tw.apply_qplate(st_r, 0.5, np.pi, alpha0=a0)
    assert out_r.amplitudes[0, 1] == pytest.approx(-1j * np.exp(-2j * a0))


def test_qplate_truncation_guard():
    st_ = tw.make_localized_state(3, tw.PolState.L(), (-3, 3))
    with pytest.raises(tw.TruncationError):
        tw.apply_qplate(st_, 0.5, np.pi)


def test_qplate_parameter_validation():
    with pytest.raises(tw.ValidationError):
        tw.QPlate(0.3, np.pi)  # 2q not integer
    with pytest.raises(tw.ValidationError):
        tw.QPlate(0.0, np.pi)  # zero charge
    with pytest.raises(tw.ValidationError):
        tw.QPlate(0.5, 3.5)  # delta outside [0, pi]
    with pytest.raises(tw.ValidationError):
        tw.QPlate(0.5, -0.1)


def test_sequence_validation():
    with pytest.raises(tw.ValidationError):
        tw.StepSequence(())
    with pytest.raises(tw.ValidationError):
        tw.StepSequence((tw.QPlate(0.5, np.pi), tw.QPlate(1.0, np.pi)))


# ---------------------------------------------------------------------------
# stepping and evolution
# ---------------------------------------------------------------------------

def test_single_step_unbiased_split():
    seq = tw.StepSequence.standard_paper()
    st_ = tw.make_localized_state(0, tw.PolState.L(), default_window(1, seq))
    out = tw.apply_step(st_, seq)
    dist = tw.oam_marginal(out)
    assert dist[1] == pytest.approx(0.5, abs=1e-12)
    assert dist[-1] == pytest.approx(0.5, abs=1e-12)


def test_evolve_zero_steps_identity():
    seq = tw.StepSequence.standard_paper()
    st_ = tw.make_localized_state(0, tw.PolState.R(), (-3, 3))
    states = tw.evolve(st_, seq, 0)
    assert len(states) == 1
    assert states[0] is st_


def test_four_step_walk_against_dense_oracle():
    # localized (alpha, beta) = (0, 1) input, standard configuration
    seq = tw.StepSequence.standard_paper()
    window = default_window(4, seq)
    st_ = tw.make_localized_state(0, tw.PolState.R(), window)
    final = tw.evolve(st_, seq, 4)[-1]
    ref = dense_evolve(state_vector(st_), seq, window[0], window[1], 4)
    assert np.abs(state_vector(final) - ref).max() < 1e-10


def test_hybrid_walk_against_dense_oracle():
    seq = tw.StepSequence.standard_paper(1.57)
    window = default_window(4, seq)
    coin = tw.PolState.from_components(1, 1j)
    st_ = tw.make_localized_state(0, coin, window)
    final = tw.evolve(st_, seq, 4)[-1]
    ref = dense_evolve(state_vector(st_), seq, window[0], window[1], 4)
    assert np.abs(state_vector(final) - ref).max() < 1e-10


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 6),
       st.floats(0.1, np.pi), st.floats(0, np.pi), st.floats(0, 2 * np.pi))
def test_oracle_equivalence_random_inputs(n, delta, th, ph):
    seq = tw.StepSequence.standard_paper(delta)
    window = (-8, 8)
    coin = tw.PolState.from_components(np.cos(th / 2),
                                       np.sin(th / 2) * np.exp(1j * ph))
    st_ = tw.make_localized_state(0, coin, window)
    final = tw.evolve(st_, seq, min(n, 6))[-1]
    ref = dense_evolve(state_vector(st_), seq, -8, 8, min(n, 6))
    assert np.abs(state_vector(final) - ref).max() < 1e-10


def test_step_matrix_unitary_away_from_edges():
    seq = tw.StepSequence.standard_paper(2.2)
    U = dense_step_matrix(seq, -6, 6)
    g = U.conj().T @ U
    # interior columns are exactly unitary; only edge columns lose the
    # amplitude shifted off the window
    width = 13
    interior = [p * width + j for p in (0, 1) for j in range(1, width - 1)]
    sub = g[np.ix_(interior, interior)]
    assert np.abs(sub - np.eye(len(interior))).max() < 1e-12


def test_norm_conserved_20_steps():
    seq = tw.StepSequence.standard_paper()
    window = default_window(20, seq)
    st_ = tw.make_localized_state(0, tw.PolState.L(), window)
    states = tw.evolve(st_, seq, 20)
    for s in states:
        assert abs(s.norm() - 1.0) < 1e-12


@pytest.mark.parametrize("n", [1, 3, 5])
def test_parity_sublattice(n):
    seq = tw.StepSequence.standard_paper()
    window = default_window(n, seq)
    st_ = tw.make_localized_state(0, tw.PolState.L(), window)
    dist = tw.oam_marginal(tw.evolve(st_, seq, n)[-1])
    wrong = sum(p for m, p in dist.items() if (m + n) % 2 == 1)
    assert wrong < 1e-14


def test_delta_zero_marginal_stationary():
    seq = tw.StepSequence.wavepacket(0.0)
    st_ = tw.make_localized_state(1, tw.PolState.from_components(0.6, 0.8), (-4, 4))
    states = tw.evolve(st_, seq, 6)
    d0 = tw.oam_marginal(states[0])
    for s in states[1:]:
        d = tw.oam_marginal(s)
        assert all(abs(d[m] - d0[m]) == 0.0 for m in d0)


def test_interstep_hook_applied():
    seq = tw.StepSequence.wavepacket()
    window = default_window(3, seq)
    st_ = tw.make_localized_state(0, tw.PolState.L(), window)
    calls = []

    def hook(s):
        calls.append(1)
        return s

    tw.evolve(st_, seq, 3, interstep=hook)
    assert len(calls) == 2  # between steps only


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

def test_marginal_delta():
    st_ = tw.make_localized_state(0, tw.PolState.L(), (-2, 2))
    assert tw.oam_marginal(st_)[0] == 1.0


def test_marginal_bell_like():
    a = np.zeros((2, 5), complex)
    a[0, 3] = a[1, 1] = 1 / np.sqrt(2)  # (|L,1> + |R,-1>)/sqrt2 on [-2,2]
    st_ = tw.SpinOrbitState(-2, 2, a)
    d = tw.oam_marginal(st_)
    assert d[1] == pytest.approx(0.5) and d[-1] == pytest.approx(0.5)
    assert tw.coin_walker_entanglement(st_) == pytest.approx(1.0, abs=1e-12)


def test_marginal_sums_to_one_after_walk():
    seq = tw.StepSequence.standard_paper()
    st_ = tw.make_localized_state(0, tw.PolState.R(), default_window(4, seq))
    d = tw.oam_marginal(tw.evolve(st_, seq, 4)[-1])
    assert sum(d.values()) == pytest.approx(1.0, abs=1e-12)


def test_entanglement_product_state_zero():
    st_ = tw.make_localized_state(2, tw.PolState.from_components(1, 1j), (-4, 4))
    assert tw.coin_walker_entanglement(st_) == pytest.approx(0.0, abs=1e-12)


def test_full_distribution_keys():
    st_ = tw.make_localized_state(0, tw.PolState.H(), (-1, 1))
    d = tw.full_distribution(st_)
    assert d[("L", 0)] == pytest.approx(0.5)
    assert d[("R", 0)] == pytest.approx(0.5)
    assert sum(d.values()) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_state_json_roundtrip():
    seq = tw.StepSequence.standard_paper()
    st_ = tw.make_localized_state(0, tw.PolState.from_components(1, 1j),
                                  default_window(3, seq))
    out = tw.evolve(st_, seq, 3)[-1]
    doc = state_to_dict(out)
    back = state_from_dict(doc)
    assert back.m_min == out.m_min and back.m_max == out.m_max
    assert np.abs(back.amplitudes - out.amplitudes).max() < 1e-15


def test_marginal_csv():
    rows = marginal_csv_rows({1: 0.25, -1: 0.75})
    assert rows[0] == "m,P"
    assert rows[1].startswith("-1,")
