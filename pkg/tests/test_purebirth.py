import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from cmjtrees import DomainError
from cmjtrees.purebirth import (
    GAMMA_SATURATED,
    LOG2E,
    Count,
    GammaParams,
    Horizon,
    chernoff_intensity_term_log2,
    estimate_intensity,
    gamma_lower_bound_log2,
    markov_upper_tail_complement_log2,
    sample_arrivals,
)
from cmjtrees.rates import RateSequence, block_length, block_rate_log2, boundary_index
from cmjtrees.rng import stream

PATH = RateSequence.pathological()


def _sample_many(seq, stop, reps, seed):
    return [sample_arrivals(seq, stop, stream(seed, r)) for r in range(reps)]


# -- sampling -----------------------------------------------------------------

def test_yule_line_mean_of_third_arrival(yule):
    t3 = np.array([s.times[-1] for s in _sample_many(yule, Count(3), 100_000, 1)])
    assert abs(t3.mean() - 3.0) < 0.02


def test_pathological_first_block_mean():
    samples = _sample_many(PATH, Count(5), 50_000, 2)
    diff = np.array([s.times[4] - s.times[0] for s in samples])
    se = diff.std(ddof=1) / math.sqrt(diff.size)
    assert abs(diff.mean() - 1.0) < 4 * se


@pytest.mark.parametrize("n", [1, 7, 40])
def test_mean_arrival_matches_reciprocal_sum(n):
    seq = RateSequence.affine(1, 0)
    tn = np.array([s.times[-1] for s in _sample_many(seq, Count(n), 20_000, 3)])
    exact = math.fsum(1.0 / j for j in range(1, n + 1))
    assert abs(tn.mean() - exact) < 4 * tn.std(ddof=1) / math.sqrt(tn.size)


def test_horizon_zero_is_empty(square):
    s = sample_arrivals(square, Horizon(0.0), stream(0))
    assert len(s) == 0 and not s.cap_hit


def test_horizon_sample_is_cut_correctly(yule):
    s = sample_arrivals(yule, Horizon(50.0), stream(4))
    assert np.all(np.diff(s.times) >= 0) and s.times[-1] <= 50.0
    # the next arrival, sampled from the same stream, lies beyond the horizon
    full = sample_arrivals(yule, Count(len(s) + 1), stream(4))
    # chunked partial sums may differ from one long cumsum in the last bit
    assert np.allclose(full.times[:-1], s.times, rtol=1e-12, atol=0) and full.times[-1] > 50.0


def test_stop_rule_validation():
    with pytest.raises(DomainError):
        Count(0)
    with pytest.raises(DomainError):
        Horizon(-1.0)


def test_underflow_semantics_in_huge_blocks():
    n = boundary_index(4) + 92
    s = sample_arrivals(PATH, Count(n), stream(5))
    e = np.diff(np.concatenate(([0.0], s.times)))
    assert np.all(np.isfinite(s.times)) and np.all(e >= 0)
    # blocks 3 and 4 have log2(alpha) = 2**27 and 2**64: far beyond 1/(smallest normal)
    assert block_rate_log2(2) < 1022 < block_rate_log2(3) < block_rate_log2(4)
    in_block = np.zeros(n, dtype=bool)
    in_block[boundary_index(3):boundary_index(4) - 1] = True
    in_block[boundary_index(4):] = True
    assert np.all(e[in_block] == 0.0) and np.all(e[in_block] <= 2.0 ** -50)
    assert s.underflows == int(in_block.sum()) == block_length(3) + 92
    # the boundary ones between blocks keep unit-rate holding times
    assert e[boundary_index(4) - 1] > 0


# -- gamma bound ----------------------------------------------------------------

def test_gamma_bound_examples():
    assert gamma_lower_bound_log2(GammaParams(1, 0.0, 0.0)) == pytest.approx(-LOG2E, rel=1e-15)
    assert 1 - math.exp(-1) > math.exp(-1)
    b = gamma_lower_bound_log2(GammaParams(2, 0.0, 1.0))
    assert b == pytest.approx(-2 * LOG2E, rel=1e-15)
    assert b <= math.log2(1 - 3 * math.exp(-2))


@pytest.mark.parametrize("i", range(1, 60))
def test_gamma_bound_first_block(i):
    # d = 4, alpha = 4, threshold 2**(-i-2), so y = 2**-i
    b = gamma_lower_bound_log2(GammaParams(4, 2.0, -i - 2))
    assert b >= -LOG2E - 4 * i - 8


def _exact_log2_cdf(d, y):
    with mpmath.workdps(50):
        return float(mpmath.log(mpmath.gammainc(d, 0, y, regularized=True), 2))


def test_gamma_bound_sound_against_mpmath():
    rng = np.random.default_rng(123)
    for _ in range(200):
        d = int(rng.integers(1, 21))
        y = float(10 ** rng.uniform(-6, 3))
        b = gamma_lower_bound_log2(GammaParams.with_threshold(d, 0.0, y))
        assert _exact_log2_cdf(d, y) - b >= -1e-9


@given(d=st.integers(1, 20), ylog=st.floats(-6, 3), alpha_log2=st.floats(-30, 30))
@settings(max_examples=300, deadline=None)
def test_gamma_bound_sound_property(d, ylog, alpha_log2):
    y = 10.0 ** ylog
    p = GammaParams(d, alpha_log2, math.log2(y) - alpha_log2)
    exact = special.gammainc(d, y)
    assert math.log2(exact) - gamma_lower_bound_log2(p) >= -1e-9


def test_gamma_bound_saturates_and_validates():
    assert gamma_lower_bound_log2(GammaParams(3, 2000.0, -10.0)) == GAMMA_SATURATED
    assert math.isfinite(gamma_lower_bound_log2(GammaParams(3, -2000.0, -10.0)))
    with pytest.raises(DomainError):
        GammaParams(0, 0.0, 0.0)
    with pytest.raises(DomainError):
        GammaParams(1, math.inf, 0.0)


# -- Markov bound -----------------------------------------------------------------

def test_markov_examples():
    assert markov_upper_tail_complement_log2(1, 1.0, 1.0) == pytest.approx(-1.0, abs=1e-15)
    assert markov_upper_tail_complement_log2(1, 0.0, 0.5) is None
    # stable for a tiny ratio: log2(1 - 2**-60) ~ -2**-60 / ln 2
    v = markov_upper_tail_complement_log2(1, 60.0, 1.0)
    assert v == pytest.approx(-(2.0 ** -60) / math.log(2), rel=1e-12)
    assert markov_upper_tail_complement_log2(1, 5000.0, t_log2=0.0) == 0.0


def test_markov_blocks_at_least_one_half():
    for i in range(1, 301):
        for k in range(2, 11):
            if 2 ** (k ** 3) >= 2 * k * k + k + i + 2:
                v = markov_upper_tail_complement_log2(block_length(k), block_rate_log2(k), t_log2=-k - i - 1)
                assert v is not None and v >= -1.0


# -- Chernoff term -----------------------------------------------------------------

def test_chernoff_affine_against_direct_sum():
    n, t, beta = 10 ** 5, 0.01, 10.0
    shift = beta * math.log(n)
    direct = math.fsum(1.0 / (i + shift) for i in range(1, n + 1))
    assert direct == pytest.approx(math.log(n / shift), rel=0.02)
    v = chernoff_intensity_term_log2(RateSequence.affine(1, 0), t, beta, n)
    assert v == pytest.approx(shift * (t - direct) / math.log(2), rel=1e-12)
    assert v < -2 * math.log2(n)


def test_chernoff_huge_constant_rate_does_not_vanish():
    n, t, beta = 1000, 0.5, 2.0
    v = chernoff_intensity_term_log2(RateSequence.table([300.0] * n), t, beta, n)
    assert v == pytest.approx(beta * t * math.log(n) / math.log(2), rel=1e-9)
    assert v > 0


def test_chernoff_smallest_n(yule):
    assert math.isfinite(chernoff_intensity_term_log2(yule, 1.0, 1.0, 2))
    with pytest.raises(DomainError):
        chernoff_intensity_term_log2(yule, 1.0, 1.0, 1)


@given(vals=st.lists(st.floats(-10, 10), min_size=2, max_size=40), j=st.integers(0, 39),
       bump=st.floats(0.01, 5), t=st.floats(0.01, 3), beta=st.floats(0.1, 10))
@settings(max_examples=200, deadline=None)
def test_chernoff_monotone_in_each_rate(vals, j, bump, t, beta):
    j %= len(vals)
    n = len(vals)
    raised = list(vals)
    raised[j] += bump
    lo = chernoff_intensity_term_log2(RateSequence.table(vals), t, beta, n)
    hi = chernoff_intensity_term_log2(RateSequence.table(raised), t, beta, n)
    assert hi >= lo


# -- intensity estimate -------------------------------------------------------------

def test_poisson_intensity(yule):
    est = estimate_intensity(yule, 1.0, 100_000, seed=9)
    assert abs(est.mean - 1.0) < 0.01
    assert est.cap_hits == 0


def test_intensity_at_time_zero(square):
    assert estimate_intensity(square, 0.0, 10, seed=1).mean == 0.0


def test_intensity_cap_hits_for_explosive_line(square):
    est = estimate_intensity(square, 2.0, 200, seed=3, cap=10 ** 4)
    assert est.cap_hit and est.cap_hits / est.reps > 0.5
