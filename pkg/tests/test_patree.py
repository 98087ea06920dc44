import math

import numpy as np
import pytest
from scipy import stats

from cmjtrees import ConfigError, DomainError
from cmjtrees.cmj import simulate
from cmjtrees.patree import (
    PATH_LIKE,
    STAR_LIKE,
    PATree,
    WeightFunction,
    attachment_probabilities,
    coupling_test,
    grow,
    shape_diagnostics,
    skeleton,
)
from cmjtrees.purebirth import Count
from cmjtrees.rates import RateSequence
from cmjtrees.rng import stream

AFFINE = WeightFunction.affine(1)
SQUARE = WeightFunction.power(2)


def _recomputed_totals(f, parent):
    n = len(parent) - 1
    out = []
    for v in range(1, n + 1):
        deg = np.bincount(parent[1:v], minlength=v) if v > 1 else np.zeros(1, int)
        out.append(math.fsum(f(int(d)) for d in deg))
    return np.array(out)


def test_weight_values_and_rates():
    assert [AFFINE(k) for k in range(3)] == [1.0, 2.0, 3.0]
    assert [SQUARE(k) for k in range(3)] == [1.0, 4.0, 9.0]
    for f in (AFFINE, SQUARE, WeightFunction.constant(2.5), WeightFunction.table([1, 3, 2])):
        seq = f.to_rates()
        assert [2.0 ** seq.log2(i) for i in range(1, 4)] == pytest.approx([f(0), f(1), f(2)], rel=1e-14)
    with pytest.raises(ConfigError):
        WeightFunction.table([1.0, math.inf])
    with pytest.raises(ConfigError):
        WeightFunction.parse("exp:2")


def test_first_vertex_attaches_to_root():
    for seed in range(20):
        assert grow(SQUARE, 1, stream(seed)).parent.tolist() == [-1, 0]


def test_second_step_probabilities():
    assert attachment_probabilities(AFFINE, [0]).tolist() == pytest.approx([2 / 3, 1 / 3])
    reps = 30_000
    obs = np.bincount([grow(AFFINE, 2, stream(1, r)).parent[2] for r in range(reps)], minlength=2)
    assert stats.chisquare(obs, [2 / 3 * reps, 1 / 3 * reps]).pvalue > 1e-3


@pytest.mark.parametrize("f", [AFFINE, SQUARE, WeightFunction.constant(1), WeightFunction.affine(0.5)])
@pytest.mark.parametrize("method", ["scan", "fenwick"])
def test_incremental_denominator_is_exact(f, method):
    t = grow(f, 1000, stream(2), method=method, record_totals=True)
    assert np.array_equal(t.totals, _recomputed_totals(f, t.parent))


@pytest.mark.parametrize("f", [AFFINE, SQUARE, WeightFunction.constant(1)])
def test_scan_and_fenwick_agree(f):
    for seed in range(3):
        a = grow(f, 3000, stream(seed), method="scan")
        b = grow(f, 3000, stream(seed), method="fenwick")
        assert np.array_equal(a.parent, b.parent)


@pytest.mark.parametrize("c", [3.0, 0.25])
def test_scale_invariance(c):
    base = [float((k + 1) ** 2) for k in range(400)]
    f1 = WeightFunction.table(base)
    fc = WeightFunction.table([c * v for v in base])
    for seed in range(5):
        assert np.array_equal(grow(f1, 399, stream(seed)).parent, grow(fc, 399, stream(seed)).parent)
        assert np.array_equal(grow(WeightFunction.constant(1), 500, stream(seed)).parent,
                              grow(WeightFunction.constant(c), 500, stream(seed)).parent)


def _direct_rrt_heights(n, reps, seed):
    """Independent oracle: vertex v picks its parent uniformly from 0..v-1."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(reps):
        par = (rng.random(n) * np.arange(1, n + 1)).astype(int)
        depth = np.zeros(n + 1, dtype=int)
        for v in range(1, n + 1):
            depth[v] = depth[par[v - 1]] + 1
        out.append(depth.max())
    return np.array(out, dtype=float)


def test_random_recursive_tree_height():
    n = 10 ** 4
    h = np.array([grow(WeightFunction.constant(1), n, stream(3, r)).depth().max() for r in range(60)], float)
    oracle = _direct_rrt_heights(n, 200, seed=0)
    se = math.sqrt(h.var(ddof=1) / h.size + oracle.var(ddof=1) / oracle.size)
    assert abs(h.mean() - oracle.mean()) < 4 * se
    # leading-order growth e log n with its known second-order correction
    ln = math.log(n)
    assert math.e * ln - 1.5 * math.log(ln) - 3 <= h.mean() <= math.e * ln + 3


def test_skeleton_is_identity():
    g = simulate(RateSequence.constant(1), Count(2), stream(0))
    assert skeleton(g).parent.tolist() == [-1, 0]
    g = simulate(RateSequence.power(2), Count(500), stream(1))
    t = skeleton(g)
    assert len(t) == len(g) and np.array_equal(t.out_degree, g.out_degree)


def test_coupling_uniform_case():
    rep = coupling_test(WeightFunction.constant(1), 3, 100_000, seed=4)
    step = rep.steps[2]
    sigma = math.sqrt((1 / 3) * (2 / 3) / rep.reps)
    assert all(abs(fr - 1 / 3) < 3 * sigma for fr in step.frequencies)
    assert rep.passes() and not rep.underpowered


def test_coupling_affine_second_step():
    rep = coupling_test(AFFINE, 2, 100_000, seed=5)
    fr = rep.steps[1].frequencies
    sigma = math.sqrt(2 / 9 / rep.reps)
    assert abs(fr[0] - 2 / 3) < 4 * sigma and abs(fr[1] - 1 / 3) < 4 * sigma
    assert rep.steps[0].p_value == 1.0


def test_coupling_square_weight():
    rep = coupling_test(SQUARE, 4, 100_000, seed=6)
    assert rep.passes() and rep.min_p_value() > 1e-3


def test_coupling_detects_wrong_rates():
    # constant CMJ rates produce a uniform recursive tree, not the (k+1)^2 law
    rep = coupling_test(SQUARE, 4, 20_000, seed=7, rates=RateSequence.constant(1))
    assert not rep.passes()


def test_coupling_small_samples_flagged():
    rep = coupling_test(SQUARE, 6, 50, seed=8)
    assert rep.underpowered
    with pytest.raises(DomainError):
        coupling_test(SQUARE, 9, 10, seed=1)


def test_shape_deterministic_inputs():
    n = 1000
    path = PATree(np.arange(-1, n))
    d = shape_diagnostics(path, [10, 100, n])
    assert d.height_trajectory[-1] == (n, n - 1) and d.max_degree_trajectory[-1] == (n, 1)
    assert d.verdict_hint == PATH_LIKE
    star = PATree(np.r_[-1, np.zeros(n - 1, dtype=int)])
    d = shape_diagnostics(star, [10, 100, n])
    assert d.height_trajectory[-1] == (n, 1) and d.max_degree_trajectory[-1] == (n, n - 1)
    assert d.verdict_hint == STAR_LIKE


def test_shape_trajectories_monotone():
    t = grow(AFFINE, 5000, stream(9))
    d = shape_diagnostics(t, [10, 100, 1000, 5001])
    for traj in (d.max_degree_trajectory, d.height_trajectory):
        vals = [v for _, v in traj]
        assert vals == sorted(vals)
    assert d.max_degree_trajectory[-1][1] == t.out_degree.max()
    assert d.height_trajectory[-1][1] == t.depth().max()


def test_superlinear_weight_is_star_like():
    t = grow(SQUARE, 10 ** 4, stream(10))
    assert shape_diagnostics(t, [100, 1000, 10 ** 4 + 1]).verdict_hint == STAR_LIKE
