import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from korolab.errors import DimensionMismatch
from korolab.spectrum import SpaceParams, count_leq, enumerate_smallest, exponent, trace_tau


def brute_exponents(a, b, box):
    """All (h, E(h)) over |h_j| <= box, in plain Python."""
    out = []
    for h in itertools.product(range(-box, box + 1), repeat=len(a)):
        out.append((h, sum(aj * abs(hj) ** bj for aj, bj, hj in zip(a, b, h))))
    return out


def test_exponent_examples():
    sp = SpaceParams.from_sequences([1, 2], [1, 3], 0.5)
    assert exponent((0, 0), sp) == 0
    assert exponent((2, -1), sp) == 4


def test_exponent_dimension_checked():
    sp = SpaceParams.from_sequences([1, 2], [1, 3], 0.5)
    with pytest.raises(DimensionMismatch):
        exponent((1,), sp)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=3, max_size=3))
def test_exponent_sign_symmetry(h):
    sp = SpaceParams.from_sequences([0.3, 1.1, 2.0], [0.7, 1.0, 2.5], 0.5)
    assert exponent(h, sp) == exponent([-x for x in h], sp)


def test_count_small_thresholds():
    sp = SpaceParams.from_sequences([1], [1], 0.5)
    assert count_leq(-1.0, sp) == 0
    assert count_leq(0.0, sp) == 1
    assert count_leq(3.5, sp) == 7


@pytest.mark.parametrize(
    "a,b",
    [([1.0], [1.0]), ([0.5, 1.5], [1.0, 2.0]), ([1.0, 1.0, 2.0], [0.5, 1.0, 1.5]), ([0.7, 0.9], [0.6, 0.8])],
)
def test_count_matches_brute_force(a, b):
    sp = SpaceParams.from_sequences(a, b, 0.5)
    rng = np.random.default_rng(7)
    T_max = 6.0
    box = math.ceil((T_max / min(a)) ** (1.0 / min(b)))
    table = brute_exponents(a, b, box)
    for T in rng.uniform(0.0, T_max, 50):
        assert count_leq(T, sp) == sum(1 for _, e in table if e <= T)
        assert count_leq(T, sp, strict=True) == sum(1 for _, e in table if e < T)


def test_enumerate_examples():
    sp = SpaceParams.from_sequences([1], [1], 0.5)
    assert enumerate_smallest(0, sp) == []
    first = enumerate_smallest(1, sp)[0]
    assert first.h == (0,) and first.exponent == 0
    three = enumerate_smallest(3, sp)
    assert [p.h for p in three] == [(0,), (-1,), (1,)]
    assert [p.exponent for p in three] == [0, 1, 1]
    assert three[1].eigenvalue == pytest.approx(0.5, rel=1e-15)


@pytest.mark.parametrize("k", [1, 2, 5, 17, 100, 333])
def test_enumerate_consistent_with_count(k):
    sp = SpaceParams.from_sequences([1.0, 1.5, 2.0], [1.0, 2.0, 1.0], 0.5)
    pairs = enumerate_smallest(k, sp)
    E = [p.exponent for p in pairs]
    assert len(pairs) == k
    assert all(x <= y for x, y in zip(E, E[1:]))
    T = E[-1]
    assert count_leq(T, sp, strict=True) < k <= count_leq(T, sp)


def test_enumerate_ties_lexicographic():
    sp = SpaceParams.from_sequences([1.0, 1.0], [1.0, 1.0], 0.5)
    pairs = enumerate_smallest(count_leq(2.0, sp), sp)
    for e in {p.exponent for p in pairs}:
        hs = [p.h for p in pairs if p.exponent == e]
        assert hs == sorted(hs)


def test_trace_examples():
    sp1 = SpaceParams.from_sequences([1], [1], 0.5)
    iv = trace_tau(sp1, 1.0)
    assert iv.contains(3.0) and iv.width < 1e-12
    assert trace_tau(sp1, 2.0).contains(5.0 / 3.0)
    sp2 = SpaceParams.from_sequences([1, 1], [1, 1], 0.5)
    assert trace_tau(sp2, 1.0).contains(9.0)


def test_trace_decreases_in_tau():
    sp = SpaceParams.from_sequences([0.4, 1.0], [0.5, 2.0], 0.5)
    ivs = [trace_tau(sp, t) for t in (0.5, 1.0, 1.5, 3.0)]
    for lo, hi in zip(ivs, ivs[1:]):
        assert hi.hi < lo.lo


def test_trace_contains_direct_sum():
    sp = SpaceParams.from_sequences([1.0, 2.0], [1.0, 1.0], 0.5)
    pairs = enumerate_smallest(20_000, sp)
    direct = math.fsum(p.eigenvalue for p in pairs)
    # remaining eigenvalues are each below the last one; bound them by the trace tail in one axis product
    iv = trace_tau(sp, 1.0)
    assert direct <= iv.hi
    assert iv.mid - direct < 1e-12
