import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from korolab.errors import DimensionMismatch
from korolab.quadrature import (
    CubatureRule,
    GridRule,
    grid_squared_error,
    lower_bound_certificate,
    mc_mean_bound,
    optimize_grid,
    closed_form_lower_bound,
    wce,
    wce_grid,
)
from korolab.spectrum import SpaceParams

SP1 = SpaceParams.from_sequences([1], [1], 0.5)


def poisson_kernel(x, y, a, omega):
    """Product of closed-form 1-D factors for b_j = 1."""
    out = 1.0
    for xj, yj, aj in zip(x, y, a):
        r = omega**aj
        out *= (1 - r * r) / (1 - 2 * r * math.cos(2 * math.pi * (xj - yj)) + r * r)
    return out


def oracle_wce(nodes, q, a, omega):
    n = len(q)
    rad = 1.0 - 2.0 * sum(q).real
    for k in range(n):
        for l in range(n):
            rad += (q[k] * np.conj(q[l])).real * poisson_kernel(nodes[k], nodes[l], a, omega)
    return math.sqrt(max(rad, 0.0))


def oracle_grid_squared(mesh, a, b, omega, terms=400):
    """prod_j (1 + 2 sum_t omega^(a (t m)^b)) - 1 by direct summation."""
    prod = 1.0
    for m, aj, bj in zip(mesh, a, b):
        prod *= 1.0 + 2.0 * math.fsum(omega ** (aj * (t * m) ** bj) for t in range(1, terms))
    return prod - 1.0


def test_empty_rule_has_unit_error():
    assert wce(CubatureRule.empty(1), SP1) == 1.0
    assert wce(CubatureRule.empty(3), SpaceParams.from_sequences([1, 2, 3], [1, 1, 1], 0.5)) == 1.0


def test_two_point_rule():
    rule = CubatureRule.qmc([[0.0], [0.5]])
    assert wce(rule, SP1) == pytest.approx(math.sqrt(2.0 / 3.0), rel=1e-12)


def test_grid_examples():
    assert wce_grid((4,), SP1) == pytest.approx(math.sqrt(2.0 / 15.0), rel=1e-13)
    assert wce_grid((1,), SP1) == pytest.approx(math.sqrt(2.0), rel=1e-13)
    assert wce(GridRule((1,)).to_rule(), SP1) == pytest.approx(math.sqrt(2.0), rel=1e-12)


@pytest.mark.parametrize("mesh", [(4,), (2, 2), (3, 5), (1, 7), (2, 3, 4)])
def test_grid_cross_check(mesh):
    a, b = [0.5, 1.0, 1.5][: len(mesh)], [1.0, 1.0, 1.0][: len(mesh)]
    sp = SpaceParams.from_sequences(a, b, 0.5)
    g = wce_grid(mesh, sp)
    assert wce(GridRule(mesh).to_rule(), sp) == pytest.approx(g, rel=1e-10)
    assert g**2 == pytest.approx(oracle_grid_squared(mesh, a, b, 0.5), rel=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_random_complex_rules_against_closed_form_kernel(seed):
    rng = np.random.default_rng(seed)
    s = 1 + seed % 3
    a = sorted(rng.uniform(0.3, 2.0, s))
    sp = SpaceParams.from_sequences(a, [1.0] * s, 0.5)
    n = int(rng.integers(1, 12))
    nodes = rng.random((n, s))
    q = (rng.normal(size=n) + 1j * rng.normal(size=n)) / n
    got = wce(CubatureRule(nodes, q), sp)
    assert got == pytest.approx(oracle_wce(nodes, q, a, 0.5), rel=1e-9, abs=1e-12)


def test_rule_length_mismatch():
    with pytest.raises(DimensionMismatch):
        CubatureRule(np.zeros((2, 1)), np.ones(3))


def test_grid_monotone_under_doubling():
    sp = SpaceParams.from_sequences([0.5, 1.0], [1.0, 2.0], 0.5)
    for m1, m2 in itertools.product([1, 2, 4], repeat=2):
        base = wce_grid((m1, m2), sp)
        assert wce_grid((2 * m1, m2), sp) <= base
        assert wce_grid((m1, 2 * m2), sp) <= base


def test_grid_shift_invariance():
    sp = SpaceParams.from_sequences([0.5, 1.0], [1.0, 1.0], 0.5)
    rule = GridRule((4, 3)).to_rule()
    base = wce(rule, sp)
    for delta in np.random.default_rng(2).random((5, 2)):
        assert abs(wce(rule.shifted(delta), sp) - base) <= 1e-12


def test_optimize_grid_examples():
    sp = SpaceParams.from_sequences([1, 4], [1, 1], 0.5)
    assert optimize_grid(1, sp).mesh == (1, 1)
    assert optimize_grid(4, sp).mesh == (4, 1)
    errs = {m: grid_squared_error(m, sp).mid for m in [(4, 1), (2, 2), (1, 4)]}
    assert errs[(4, 1)] == pytest.approx(0.2844, abs=1e-4)
    assert errs[(2, 2)] == pytest.approx(0.6797, abs=1e-4)
    assert errs[(1, 4)] == pytest.approx(2.0001, abs=1e-4)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5000))
def test_optimize_grid_respects_budget(budget):
    sp = SpaceParams.from_sequences([0.5, 1.0, 2.0], [1.0, 1.0, 2.0], 0.5)
    assert optimize_grid(budget, sp).n <= budget


def test_optimized_grid_beats_mean_bound():
    sp = SpaceParams.from_sequences([1.0, 2.0], [1.0, 1.0], 0.5)
    n = 1024
    assert wce_grid(optimize_grid(n, sp).mesh, sp) <= mc_mean_bound(n, sp)


def test_mean_bound_examples():
    assert mc_mean_bound(3, SP1) == pytest.approx(1.0, rel=1e-12)
    assert mc_mean_bound(12, SP1) == pytest.approx(0.5, rel=1e-12)
    vals = [mc_mean_bound(n, SP1) for n in range(1, 50)]
    assert all(x >= y for x, y in zip(vals, vals[1:]))


def test_certificate_single_point():
    cert = lower_bound_certificate([[0.37]], SP1)
    assert cert.bound >= 0.5 / math.sqrt(1.25) - 1e-12
    assert abs(np.sum(np.abs(cert.alpha) ** 2) - 1.0) < 1e-12


def test_certificate_duplicate_points():
    sp = SpaceParams.from_sequences([1, 2], [1, 1], 0.5)
    cert = lower_bound_certificate([[0.3, 0.6], [0.3, 0.6]], sp)
    assert cert.residual <= 1e-10
    assert cert.bound >= closed_form_lower_bound(sp) - 1e-10


def test_certificate_bounds_every_rule_on_its_points():
    # any rule using the certificate's nodes cannot beat the certified bound
    sp = SpaceParams.from_sequences([1.0, 1.5], [1.0, 1.0], 0.5)
    rng = np.random.default_rng(11)
    pts = rng.random((2, 2))
    cert = lower_bound_certificate(pts, sp)
    for _ in range(20):
        q = rng.normal(size=2) + 1j * rng.normal(size=2)
        assert wce(CubatureRule(pts, q), sp) >= cert.bound - 1e-10
