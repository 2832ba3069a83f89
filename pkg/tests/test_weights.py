import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from korolab.errors import MonotonicityViolation, NonPositiveWeight, UndefinedAsymptotic, UndefinedModel
from korolab.weights import (
    Constant,
    Explicit,
    ExpGrowth,
    ExtReal,
    LogGrowth,
    PolyGrowth,
    WeightModel,
    asymptotics,
    prefix,
    sequence_from_json,
    sequence_to_json,
    validate,
)


def test_explicit_a_is_sorted():
    model = validate(WeightModel(Explicit((2.0, 1.0, 3.0)), Explicit((1.0, 1.0, 1.0))))
    assert model.a.values_ == (1.0, 2.0, 3.0)


def test_explicit_b_with_zero_rejected():
    with pytest.raises(NonPositiveWeight):
        validate(WeightModel(Explicit((1.0, 1.0)), Explicit((1.0, 0.0))))


def test_nonpositive_a_rejected():
    with pytest.raises(NonPositiveWeight):
        validate(WeightModel(Constant(0.0), Constant(1.0)))


def test_exp_growth_accepted_unchanged():
    model = WeightModel(ExpGrowth(1.0, 3.0), Constant(1.0))
    assert validate(model) == model


def test_exp_growth_needs_positive_base():
    with pytest.raises(UndefinedModel):
        ExpGrowth(1.0, 0.0)


def test_decreasing_closed_form_rejected():
    with pytest.raises(MonotonicityViolation):
        validate(WeightModel(PolyGrowth(1.0, -1.0), Constant(1.0)))


def test_prefix_poly_b():
    _, b = prefix(WeightModel(Constant(1.0), PolyGrowth(1.0, 2.0)), 3)
    assert b.tolist() == [1.0, 4.0, 9.0]


def test_prefix_constant_a():
    a, _ = prefix(WeightModel(Constant(1.0), Constant(1.0)), 2)
    assert a.tolist() == [1.0, 1.0]


def test_explicit_override_breaking_order_rejected():
    model = WeightModel(LogGrowth(1.0), Constant(1.0), explicit_a=(5.0,))
    with pytest.raises(MonotonicityViolation):
        validate(model)
    assert issubclass(MonotonicityViolation, NonPositiveWeight)


def test_explicit_override_takes_precedence():
    a, _ = prefix(WeightModel(LogGrowth(1.0), Constant(1.0), explicit_a=(0.5,)), 3)
    assert a.tolist() == pytest.approx([0.5, math.log(3), math.log(4)], rel=1e-15)


def test_b_squares_give_zeta_two():
    asy = asymptotics(WeightModel(Constant(1.0), PolyGrowth(1.0, 2.0)), s=1)
    iv = asy.B.interval()
    assert iv.lo <= math.pi**2 / 6 <= iv.hi
    assert iv.width < 1e-12


def test_b_powers_of_two_give_one():
    iv = asymptotics(WeightModel(Constant(1.0), ExpGrowth(1.0, 2.0))).B.interval()
    assert iv.lo <= 1.0 <= iv.hi and iv.width < 1e-12


def test_exp_a_invariants():
    asy = asymptotics(WeightModel(ExpGrowth(1.0, 3.0), Constant(1.0)))
    assert asy.A.is_infinite
    iv = asy.alpha_star.interval()
    assert iv.lo <= math.log(3) <= iv.hi


def test_closed_form_a_limits():
    assert asymptotics(WeightModel(Constant(2.0), Constant(1.0))).A.is_zero
    assert asymptotics(WeightModel(PolyGrowth(1.0, 0.5), Constant(1.0))).A.is_infinite
    A = asymptotics(WeightModel(LogGrowth(2.5, 1.0), Constant(1.0))).A
    assert A.compare(2.5) == "eq"


def test_harmonic_b_diverges():
    assert asymptotics(WeightModel(Constant(1.0), Constant(1.0))).B.is_infinite


def test_explicit_lists_have_undefined_limits():
    asy = asymptotics(WeightModel.from_sequences([1, 2], [1, 2]), s=2)
    assert not asy.A.is_defined and not asy.B.is_defined
    assert asy.B_partial == pytest.approx(1.5, rel=1e-15)
    with pytest.raises(UndefinedAsymptotic):
        asy.require("B")


@pytest.mark.parametrize(
    "b_model",
    [PolyGrowth(1.0, 2.0), PolyGrowth(0.5, 1.5), ExpGrowth(1.0, 2.0), LogGrowth(1.0, 1.0), Constant(3.0)],
)
def test_partial_sums_match_direct_summation(b_model):
    model = WeightModel(Constant(1.0), b_model)
    dims = (1, 7, 100, 1000) if isinstance(b_model, ExpGrowth) else (1, 7, 100, 10_000)
    for s in dims:
        _, b = prefix(model, s)
        direct = math.fsum(1.0 / b)
        assert asymptotics(model, s).B_partial == pytest.approx(direct, rel=1e-14)


@pytest.mark.parametrize("b_model", [PolyGrowth(1.0, 2.0), PolyGrowth(2.0, 3.0), ExpGrowth(1.0, 1.5)])
def test_partial_sums_approach_the_limit(b_model):
    model = WeightModel(Constant(1.0), b_model)
    B = asymptotics(model).B.interval()
    prev = 0.0
    for s in (1, 10, 100, 1000):
        asy = asymptotics(model, s)
        assert asy.B_partial >= prev
        assert asy.B_partial <= B.hi
        tail = asy.B_tail.interval()
        assert asy.B_partial + tail.lo <= B.hi + 1e-15 and asy.B_partial + tail.hi >= B.lo - 1e-15
        prev = asy.B_partial


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0))
def test_scaling_b_divides_the_sums(c):
    base = WeightModel(Constant(1.0), PolyGrowth(1.0, 2.0))
    scaled = WeightModel(Constant(1.0), PolyGrowth(c, 2.0))
    for s in (1, 5, 50):
        assert asymptotics(scaled, s).B_partial == pytest.approx(asymptotics(base, s).B_partial / c, rel=1e-14)
    B0, B1 = asymptotics(base).B.interval(), asymptotics(scaled).B.interval()
    assert B1.mid == pytest.approx(B0.mid / c, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(["constant", "log", "poly", "exp"]),
    st.floats(0.1, 3.0),
    st.floats(0.0, 2.0),
)
def test_prefix_is_monotone(kind, c, p):
    seq = {
        "constant": lambda: Constant(c),
        "log": lambda: LogGrowth(c, p),
        "poly": lambda: PolyGrowth(c, p),
        "exp": lambda: ExpGrowth(c, 1.0 + p),
    }[kind]()
    a, _ = prefix(validate(WeightModel(seq, Constant(1.0))), 200)
    assert np.all(np.diff(a) >= 0)


@pytest.mark.parametrize(
    "obj",
    [
        {"kind": "constant", "c": 2.0},
        {"kind": "log", "c": 1.0, "offset": 0.5},
        {"kind": "poly", "c": 1.0, "gamma": 2.0},
        {"kind": "exp", "c": 1.0, "beta": 3.0},
        {"kind": "explicit", "values": [1.0, 2.0]},
    ],
)
def test_sequence_json_round_trip(obj):
    assert sequence_to_json(sequence_from_json(obj)) == obj


def test_model_json_rejects_unknown_keys():
    with pytest.raises(UndefinedModel):
        WeightModel.from_json({"a": {"kind": "constant", "c": 1}, "b": {"kind": "constant", "c": 1}, "x": 1})


def test_extreal_comparisons():
    assert ExtReal.inf().compare(5.0) == "gt"
    assert ExtReal.zero().compare(0.0) == "eq"
    assert ExtReal.finite(1.0, 2.0).compare(1.5) == "unknown"
    assert ExtReal.finite(1.0).compare(0.5) == "gt"
    assert ExtReal.undefined().compare(0.0) == "unknown"
