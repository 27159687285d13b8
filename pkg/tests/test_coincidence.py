import math
import warnings
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wslight import coincidence as co
from wslight import fock_oracle, jsa
from wslight.errors import AlphaOutOfRange, BothZero, TruncationFailure


def rand_beta(seed, d, scale):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * z / np.max(np.abs(z))


def test_detection_prob():
    assert co.detection_prob(0, 0.3) == 0
    assert co.detection_prob(5, 1.0) == 1
    assert co.detection_prob(2, 0.1) == pytest.approx(0.19)
    with pytest.raises(AlphaOutOfRange):
        co.detection_prob(1, 1.2)
    d = co.detection_prob(np.arange(50), 0.2)
    assert np.all(np.diff(d) >= 0)


def _brute_partitions(s):
    """Partitions of s as sorted tuples of parts, by recursion on the largest part."""
    def gen(n, largest):
        if n == 0:
            yield ()
            return
        for p in range(min(n, largest), 0, -1):
            for rest in gen(n - p, p):
                yield (p,) + rest
    return list(gen(s, s))


def test_integer_partitions_examples():
    parts = co.integer_partitions(3)
    assert len(parts) == 3
    assert len(co.integer_partitions(5)) == 7
    for s in range(1, 13):
        got = co.integer_partitions(s)
        assert len(set(got)) == len(got)
        for q in got:
            assert sum((u + 1) * c for u, c in enumerate(q)) == s
        expected = {tuple(Counter(p).get(u, 0) for u in range(1, s + 1)) for p in _brute_partitions(s)}
        padded = {tuple(q) + (0,) * (s - len(q)) for q in got}
        assert padded == expected


def test_permutation_count_identity():
    for s in range(1, 9):
        total = 0
        for q in co.integer_partitions(s):
            denom = 1
            for u, c in enumerate(q, start=1):
                denom *= u ** c * math.factorial(c)
            total += math.factorial(s) // denom
        assert total == math.factorial(s)


def test_pair_probability_geometric_law():
    r = 0.6
    b = np.array([[r]])
    assert co.pair_probability(b, 0) == pytest.approx(1 / math.cosh(r) ** 2, abs=1e-15)
    for s in range(7):
        expected = math.tanh(r) ** (2 * s) / math.cosh(r) ** 2
        assert co.pair_probability(b, s) == pytest.approx(expected, abs=1e-12)


def test_pair_probability_matches_oracle_3x3():
    b = rand_beta(7, 3, 0.25)
    state = fock_oracle.build_squeezed_state(b, cutoff=10)
    dist = fock_oracle.oracle_pair_probs(state, 4)
    for s in range(5):
        assert co.pair_probability(b, s) == pytest.approx(dist.probs[s], abs=1e-6)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), d=st.integers(1, 6), scale=st.floats(0.05, 0.8))
def test_two_routes_agree(seed, d, scale):
    b = rand_beta(seed, d, scale)
    dist = co.pair_distribution(b, 30)
    for s in (0, 1, 2, 5, 12, 25):
        assert dist.probs[s] == pytest.approx(co.pair_probability(b, s), rel=1e-9, abs=1e-300)


def test_log_space_partition_sum():
    b = rand_beta(3, 4, 1.2)
    dist = co.pair_distribution(b, 40)
    assert co.pair_probability(b, 30) == pytest.approx(dist.probs[30], rel=1e-9)


def test_distribution_invariants():
    b = rand_beta(1, 5, 0.6)
    dist = co.adaptive_distribution(b, 1e-12)
    assert np.all(dist.probs >= 0)
    assert 1 - 1e-12 <= np.sum(dist.probs) <= 1 + 1e-12
    assert dist.truncation_mass < 1e-12
    # first moment against tr sinh^2 Q
    s = np.linalg.svd(b, compute_uv=False)
    assert dist.mean() == pytest.approx(np.sum(np.sinh(s) ** 2), rel=1e-9)


def test_truncation_failure():
    with pytest.raises(TruncationFailure):
        co.coincidence_probs(np.array([[2.0]]), co.DetectorModel(alpha=1.0, s_max=10))


def test_case1_closed_form():
    b = rand_beta(4, 3, 0.5)
    hh, hv = co.coincidence_probs(b, co.DetectorModel(alpha=1.0, s_max=200))
    php, phv = co.perfect_efficiency_probs(b)
    assert hh == pytest.approx(php, abs=1e-12)
    assert hv == pytest.approx(phv, abs=1e-12)


def test_case2_small_alpha():
    b = rand_beta(9, 3, 0.1)
    alpha = 0.01
    hh, hv = co.coincidence_probs(b, co.DetectorModel(alpha=alpha))
    lh, lv = co.low_efficiency_probs(b, alpha)
    assert hh == pytest.approx(lh, rel=0.01)
    assert hv == pytest.approx(lv, rel=0.01)


def test_takesue_small_squeezing():
    r, alpha = 0.05, 1e-3
    mu = 2 * math.sinh(r) ** 2
    hh, hv = co.coincidence_probs(np.array([[r]]), co.DetectorModel(alpha=alpha))
    th, tv = co.takesue_probs(mu, alpha)
    assert hh == pytest.approx(th, rel=1e-2)
    assert hv == pytest.approx(tv, rel=1e-2)


def test_weak_window_examples():
    assert co.weak_window_probs(0.0, 0.4) == (0.0, 0.0)
    N = 0.03
    hh, hv = co.weak_window_probs(N, 1.0)
    assert hh == pytest.approx(N - N ** 2 / 2)
    assert hv == pytest.approx(N ** 2)
    r = math.asinh(0.1)
    exact = co.coincidence_probs(np.array([[r]]), co.DetectorModel(alpha=0.5))
    approx_ = co.weak_window_probs(0.01, 0.5)
    assert abs(exact[0] - approx_[0]) < 10 * 0.01 ** 3
    assert abs(exact[1] - approx_[1]) < 10 * 0.01 ** 3
    with pytest.warns(UserWarning):
        co.weak_window_probs(0.2, 0.5)


def test_visibility():
    assert co.visibility(0.3, 0.0) == 1
    assert co.visibility(0.2, 0.2) == 0
    with pytest.raises(BothZero):
        co.visibility(0, 0)
    N = 1e-3
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        hh, hv = co.weak_window_probs(N, 1e-4)
    assert co.visibility(hh, hv) == pytest.approx((1 - N) / (1 + N), abs=N ** 2 * 5)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), d=st.integers(1, 4), scale=st.floats(0.02, 0.7))
def test_hh_dominates_and_monotone_in_alpha(seed, d, scale):
    dist = co.adaptive_distribution(rand_beta(seed, d, scale), 1e-12)
    prev = (0.0, 0.0)
    for a in np.linspace(0.0, 1.0, 11):
        hh, hv = co.coincidence_from_distribution(dist, a)
        assert hh >= hv - 1e-15
        assert hh >= prev[0] - 1e-15 and hv >= prev[1] - 1e-15
        prev = (hh, hv)


def test_separate_v_polarization():
    b = rand_beta(2, 2, 0.3)
    det = co.DetectorModel(alpha=0.4)
    assert co.coincidence_probs(b, det, b) == pytest.approx(co.coincidence_probs(b, det), abs=1e-15)
    hh, hv = co.coincidence_probs(b, det, np.zeros((2, 2)))
    assert hv == 0 and hh > 0


def test_visibility_trends_cw():
    model = jsa.double_gaussian_cw()
    grid = jsa.SamplingGrid(omega=jsa.minimal_bandlimit(model), n_min=0, n_max=59)
    r = jsa.sample_r_matrix(model, grid)
    v1, v2 = [], []
    for bc in (0.05, 0.2, 0.5, 1.0):
        dist = co.adaptive_distribution(bc * r, 1e-10, s_start=400)
        v1.append(co.visibility(*co.coincidence_from_distribution(dist, 1.0)))
        v2.append(co.visibility(*co.coincidence_from_distribution(dist, 0.01)))
    assert np.all(np.diff(v1) < 0) and v1[-1] < 1e-6
    assert np.all(np.diff(v2) < 0) and v2[-1] > 1e-3 > v1[-1]


def test_visibility_decreases_with_alpha_single_pair_window():
    model = jsa.double_gaussian(10.0)
    b = jsa.build_beta(model, 0.1, jsa.minimal_grid(model)).values
    dist = co.adaptive_distribution(b)
    v = [co.visibility(*co.coincidence_from_distribution(dist, a)) for a in np.linspace(0.01, 1, 25)]
    assert np.all(np.diff(v) < 0)
