import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmjtrees import ConfigError, DomainError, RateRangeError
from cmjtrees.rates import (
    MAX_PATHOLOGICAL_BLOCK,
    RateSequence,
    block_length,
    block_rate_log2,
    boundary_index,
    is_dominated_by,
    iterated_log,
    iterlog_threshold,
    locate,
    rate_log2,
    read_table_csv,
    reciprocal_partial_sum,
)

PATH = RateSequence.pathological()


def test_pathological_first_entries():
    # 1, then block 1 (four copies of 2**2), then 1 again
    got = [2.0 ** PATH.log2(i) for i in range(1, 8)]
    assert got == [1.0, 4.0, 4.0, 4.0, 4.0, 1.0, 2.0 ** 256]


def test_pathological_reciprocal_sum_first_five():
    assert reciprocal_partial_sum(PATH, 1, 5) == 2.0


def test_power_reciprocal_sum_against_direct_loop(square):
    direct = math.fsum(1.0 / (i * i) for i in range(1, 1001))
    assert reciprocal_partial_sum(square, 1, 1000) == pytest.approx(direct, rel=1e-14)


def test_power_partial_sum_near_zeta2(square):
    s = reciprocal_partial_sum(square, 1, 10 ** 6)
    assert abs(s - math.pi ** 2 / 6) < 1e-5


def _runs(values):
    """Run-length encode an array: [(value, length), ...]."""
    edges = np.flatnonzero(np.diff(values)) + 1
    starts = np.concatenate(([0], edges))
    ends = np.concatenate((edges, [values.size]))
    return [(float(values[s]), int(e - s)) for s, e in zip(starts, ends)]


def test_block_structure_reconstructed_from_rates():
    # blocks 1..3 fully by run-length encoding the queried rates
    hi = boundary_index(4)
    runs = _runs(PATH.log2_range(1, hi))
    expected = []
    for k in range(1, 4):
        expected += [(0.0, 1), (float(2 ** (k ** 3)), 4 ** (k * k))]
    expected.append((0.0, 1))
    assert runs == expected
    # block 4 from its edges
    a, b = boundary_index(4), boundary_index(5)
    assert b - a - 1 == 4 ** 16
    assert PATH.log2(a) == 0.0 and PATH.log2(b) == 0.0
    assert PATH.log2(a + 1) == PATH.log2(b - 1) == float(2 ** 64)


def test_locate_matches_boundaries():
    for m in range(1, 6):
        assert locate(boundary_index(m)) == (m, True)
        assert locate(boundary_index(m) + 1) == (m, False)


@given(st.integers(1, 10 ** 7))
@settings(max_examples=50, deadline=None)
def test_boundary_count_in_prefix(n):
    # a prefix containing the first m boundary ones contributes at least m to the sum
    m = sum(1 for k in range(1, 12) if boundary_index(k) <= n)
    assert reciprocal_partial_sum(PATH, 1, n) >= m


def test_block_eleven_raises():
    assert block_rate_log2(MAX_PATHOLOGICAL_BLOCK) == float(2 ** 1000)
    with pytest.raises(RateRangeError, match="11"):
        block_rate_log2(11)
    with pytest.raises(RateRangeError):
        rate_log2(PATH, boundary_index(11) + 1)
    # the boundary one itself stays representable
    assert rate_log2(PATH, boundary_index(11)) == 0.0


@given(a=st.integers(1, 5000), m=st.integers(0, 5000), n=st.integers(0, 5000),
       kind=st.sampled_from(["powerpa:2", "affine:1,0", "iterlog:1,1", "pathological", "constant:3"]))
@settings(max_examples=60, deadline=None)
def test_partial_sums_are_additive(a, m, n, kind):
    seq = RateSequence.parse(kind)
    b, c = a + m, a + m + n + 1
    whole = reciprocal_partial_sum(seq, a, c)
    parts = reciprocal_partial_sum(seq, a, b) + reciprocal_partial_sum(seq, b + 1, c)
    assert whole == pytest.approx(parts, rel=1e-12)


def test_empty_and_reversed_ranges():
    seq = RateSequence.constant(1)
    assert reciprocal_partial_sum(seq, 5, 5) == 1.0
    for a, b in ((0, 4), (5, 4)):
        with pytest.raises(DomainError):
            reciprocal_partial_sum(seq, a, b)


def test_iterlog_thresholds():
    assert iterlog_threshold(0) == 1
    assert iterlog_threshold(1) == 3
    assert iterlog_threshold(2) == 16
    assert iterlog_threshold(3) == 3814280
    # the value just below the threshold still has a non-positive iterated log
    assert iterated_log(3814279, 3) <= 1.0 < iterated_log(3814280, 3)
    seq = RateSequence.iterated_log(1, 1)
    assert seq.threshold == 3
    assert seq.log2(3) == pytest.approx(math.log2(3 * math.log(3)))
    # below the threshold the rate is clamped to c
    assert seq.log2(1) == seq.log2(2) == 0.0


def test_affine_and_constant_values():
    seq = RateSequence.affine(1, 0)
    assert [2.0 ** seq.log2(i) for i in (1, 2, 10)] == pytest.approx([1.0, 2.0, 10.0], rel=1e-15)
    with pytest.raises(ConfigError):
        RateSequence.constant(0.0)
    with pytest.raises(ConfigError):
        RateSequence.affine(0, -1)


def test_table_roundtrip(tmp_path):
    p = tmp_path / "rates.csv"
    p.write_text("# log2 rates\n0\n1\n2\n")
    assert read_table_csv(p) == [0.0, 1.0, 2.0]
    seq = RateSequence.from_descriptor({"kind": "table", "params": {"path": "rates.csv"}}, base_dir=tmp_path)
    assert seq.length == 3
    assert reciprocal_partial_sum(seq, 1, 3) == 1.75
    with pytest.raises(DomainError):
        seq.log2(4)


@pytest.mark.parametrize("text", ["constant:2", "affine:1,0", "powerpa:1.5", "iterlog:2,1", "pathological"])
def test_descriptor_roundtrip(text):
    seq = RateSequence.parse(text)
    again = RateSequence.from_descriptor(seq.to_descriptor())
    assert again == seq
    assert np.array_equal(seq.log2_range(1, 200), again.log2_range(1, 200))


def test_log2_range_matches_scalar_queries():
    for seq in (RateSequence.parse("iterlog:1,2"), PATH, RateSequence.power(0.5)):
        arr = seq.log2_range(1, 400)
        assert np.allclose(arr, [seq.log2(i) for i in range(1, 401)], rtol=1e-14, atol=0)


def test_domination_examples():
    res = is_dominated_by(RateSequence.affine(1, 0), RateSequence.iterated_log(1, 1), 10 ** 4)
    assert not res.dominated
    assert res.first_violation == res.last_violation == 2
    assert res.holds_from == 3
    assert is_dominated_by(RateSequence.constant(1), RateSequence.affine(1, 0), 10 ** 4)
    bad = is_dominated_by(RateSequence.power(2), RateSequence.affine(1, 0), 10 ** 3)
    assert not bad and bad.n_violations == 10 ** 3 - 1
