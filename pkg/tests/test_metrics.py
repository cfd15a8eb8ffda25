import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import twistwalk as tw
from twistwalk.metrics import metrics_report


def test_similarity_identical():
    p = {0: 0.3, 1: 0.7}
    assert tw.similarity(p, dict(p)) == pytest.approx(1.0, abs=1e-15)


def test_similarity_disjoint():
    assert tw.similarity({0: 1.0}, {1: 1.0}) == 0.0


def test_similarity_half():
    assert tw.similarity({0: 0.5, 1: 0.5}, {0: 1.0, 1: 0.0}) == pytest.approx(0.5)


def test_similarity_symmetric_and_relabeling_invariant():
    p = {0: 0.2, 1: 0.5, 2: 0.3}
    q = {0: 0.4, 1: 0.1, 2: 0.5}
    assert tw.similarity(p, q) == pytest.approx(tw.similarity(q, p), abs=1e-15)
    relabel = {10: p[0], 11: p[1], 12: p[2]}
    relabel_q = {10: q[0], 11: q[1], 12: q[2]}
    assert tw.similarity(relabel, relabel_q) == pytest.approx(tw.similarity(p, q))


def test_tvd_values():
    assert tw.tvd({0: 1.0}, {0: 1.0}) == 0.0
    assert tw.tvd({0: 1.0}, {1: 1.0}) == 1.0
    assert tw.tvd({0: 0.75, 1: 0.25}, {0: 0.5, 1: 0.5}) == pytest.approx(0.25)


def test_empty_distribution_error():
    with pytest.raises(tw.EmptyDistributionError):
        tw.similarity({}, {})
    with pytest.raises(tw.EmptyDistributionError):
        tw.tvd({}, {})


dists = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6).map(
    lambda ws: {i: w / sum(ws) for i, w in enumerate(ws)})


@settings(max_examples=60, deadline=None)
@given(dists, dists, dists)
def test_tvd_triangle_inequality(p, q, r):
    n = max(len(p), len(q), len(r))
    p = {i: p.get(i, 0.0) for i in range(n)}
    q = {i: q.get(i, 0.0) for i in range(n)}
    r = {i: r.get(i, 0.0) for i in range(n)}
    assert tw.tvd(p, r) <= tw.tvd(p, q) + tw.tvd(q, r) + 1e-12


@settings(max_examples=40, deadline=None)
@given(dists)
def test_similarity_one_implies_tvd_zero(p):
    assert tw.similarity(p, dict(p)) == pytest.approx(1.0, abs=1e-12)
    assert tw.tvd(p, dict(p)) < 1e-6


def test_sample_counts_delta():
    rec = tw.sample_counts({7: 1.0}, 500, seed=3)
    assert rec.counts[7] == 500


def test_sample_counts_deterministic():
    p = {0: 0.25, 1: 0.25, 2: 0.5}
    a = tw.sample_counts(p, 10000, seed=42)
    b = tw.sample_counts(p, 10000, seed=42)
    assert a.counts == b.counts
    c = tw.sample_counts(p, 10000, seed=43)
    assert c.counts != a.counts


def test_sample_counts_empirical_frequencies():
    p = {0: 0.3, 1: 0.2, 2: 0.5}
    shots = 10 ** 5
    rec = tw.sample_counts(p, shots, seed=9)
    for k, prob in p.items():
        sigma = np.sqrt(shots * prob * (1 - prob))
        assert abs(rec.counts[k] - shots * prob) < 5 * sigma


def test_sample_subnormalized_adds_miss_bucket():
    p = {0: 0.2, 1: 0.2}  # total 0.4
    rec = tw.sample_counts(p, 10 ** 4, seed=1)
    assert sum(rec.counts.values()) < 10 ** 4
    assert sum(rec.counts.values()) == pytest.approx(4000, abs=300)


def test_poisson_sigma():
    rec = tw.sample_counts({0: 1.0}, 400, seed=0)
    assert tw.poisson_sigma(rec)[0] == pytest.approx(20.0)


def test_metrics_report_fields():
    doc = metrics_report({0: 1.0}, {0: 1.0}, shots=100, seed=5)
    assert doc["similarity"] == pytest.approx(1.0)
    assert doc["tvd"] == 0.0
    assert doc["rng"] == "numpy.random.PCG64"
