import json
import math
from pathlib import Path

import numpy as np
import pytest

from korolab.approx import RateFit, fit_rate, info_complexity_all, minimal_error_series, plateau_ends
from korolab.spectrum import SpaceParams
from korolab.tractability import (
    Notion,
    Status,
    audit,
    classify,
    classify_all,
    close,
    ec_complexity_bound,
    pt_clause,
    rate_targets,
)
from korolab.weights import Constant, ExpGrowth, LogGrowth, PolyGrowth, WeightModel

GOLDEN = json.loads((Path(__file__).parent / "golden" / "classifier.json").read_text())
STATUS = {"H": "Holds", "F": "Fails", "U": "Unknown"}
ALL_HOLD = "H H H H H H H H H"

# EXP UEXP WT PT SPT EC-WT EC-PT EC-SPT KAPPA-WT..., derived by hand from the rule table
HAND = {
    "exp_a_exp_b": {"APP/ALL": ALL_HOLD, "APP/STD": ALL_HOLD, "INT/STD": ALL_HOLD},
    "constant": {
        "APP/ALL": "H F H F F F F F H",
        "APP/STD": "H F U F F F F F U",
        "INT/STD": "H F U U F F F F U",
    },
    "log_at_threshold": {
        "APP/ALL": "H F H H H H F F H",
        "APP/STD": "H F H H U H F F H",
        "INT/STD": "H F H H U H F F H",
    },
    "log_above_threshold": {
        "APP/ALL": "H H H H H H F F H",
        "APP/STD": "H H H H H H F F H",
        "INT/STD": "H H H H H H F F H",
    },
    "log_below_threshold": {
        "APP/ALL": "H F H H H H F F H",
        "APP/STD": "H F H U U H F F H",
        "INT/STD": "H F H U U H F F H",
    },
    "poly_a": {
        "APP/ALL": "H F H H H H F F H",
        "APP/STD": "H F H H H H F F H",
        "INT/STD": "H F H H H H F F H",
    },
    "explicit": {
        "APP/ALL": "H U H U U U U U H",
        "APP/STD": "H U U U U U U U U",
        "INT/STD": "H U U U U U U U U",
    },
    "exp_a_const_b": {
        "APP/ALL": "H F H H H H F F H",
        "APP/STD": "H F H H H H F F H",
        "INT/STD": "H F H H H H F F H",
    },
    "log_threshold_negative_offset": {
        "APP/ALL": "H H H H H H F F H",
        "APP/STD": "H H H U U H F F H",
        "INT/STD": "H H H U U H F F H",
    },
    "kappa_threshold": {
        "APP/ALL": "H F H F F F F F U",
        "APP/STD": "H F U F F F F F U",
        "INT/STD": "H F U U F F F F U",
    },
    "kappa_pair": {
        "APP/ALL": "H F H F F F F F F H",
        "APP/STD": "H F U F F F F F F U",
        "INT/STD": "H F U U F F F F F U",
    },
    "exp_a_zeta_b": {"APP/ALL": ALL_HOLD, "APP/STD": ALL_HOLD, "INT/STD": ALL_HOLD},
}


def golden_reports(name):
    entry = GOLDEN[name]
    return classify_all(WeightModel.from_json(entry["model"]), 0.5, 1, tuple(entry["kappas"]))


@pytest.mark.parametrize("name", sorted(HAND))
def test_hand_derived_statuses(name):
    reports = golden_reports(name)
    for key, row in HAND[name].items():
        problem, info = key.split("/")
        got = [v.status.value for v in reports[(problem, info)].verdicts.values()]
        assert got == [STATUS[x] for x in row.split()], key
    assert all(v.status is Status.HOLDS for v in reports[("INT", "ALL")].verdicts.values())


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_json(name):
    got = [rep.to_json() for rep in golden_reports(name).values()]
    assert json.loads(json.dumps(got, ensure_ascii=False)) == GOLDEN[name]["reports"]


def test_ec_spt_interval_for_geometric_weights():
    rep = classify("APP", "ALL", WeightModel(ExpGrowth(1, 3), ExpGrowth(1, 2)), 0.5)
    assert rep.verdicts["EC-SPT"].bounds.to_json() == [1.0, 2.0]


def test_ec_spt_interval_uses_alpha_branch():
    rep = classify("APP", "ALL", WeightModel(ExpGrowth(1, 2), PolyGrowth(1, 1.5)), 0.5)
    lo, hi = rep.verdicts["EC-SPT"].bounds.to_json()
    zeta = 2.612375348685488
    assert lo == pytest.approx(zeta, rel=1e-11)
    assert hi == pytest.approx(zeta + math.log(3) / math.log(2), rel=1e-11)


def test_constant_weights_cite_the_limit_clause():
    rep = classify("INT", "STD", WeightModel(Constant(1), Constant(1)), 0.5)
    assert rep.status("EC-WT") is Status.FAILS
    assert "lim a_j = ∞" in rep.verdicts["EC-WT"].reason


def test_threshold_equality_is_unknown():
    th = 1 / math.log(2)
    rep = classify("INT", "STD", WeightModel(LogGrowth(th), Constant(1)), 0.5)
    assert rep.status("PT") is Status.HOLDS
    assert rep.status("SPT") is Status.UNKNOWN
    assert "equals" in rep.verdicts["SPT"].reason


def test_pt_clause_scan():
    th = 1 / math.log(2)
    res = pt_clause(WeightModel(LogGrowth(th), Constant(1)), 0.5)
    assert res.holds and res.j0 == 2
    res = pt_clause(WeightModel(LogGrowth(1.6, -0.8), Constant(1)), 0.5)
    assert res.holds and res.j0 > 2
    j = np.arange(res.j0, res.j0 + 1000)
    assert np.all(1.6 * np.log(j + 1) - 0.8 >= th * np.log(j))
    assert not 1.6 * math.log(res.j0) - 0.8 >= th * math.log(res.j0 - 1)
    assert not pt_clause(WeightModel(Constant(5.0), Constant(1)), 0.5).holds


def test_notion_validation():
    assert Notion("KAPPA-WT", "APP", "ALL", 2.0).name == "KAPPA-WT(2)"
    with pytest.raises(ValueError):
        Notion("KAPPA-WT", "APP", "ALL", 0.5)
    with pytest.raises(ValueError):
        Notion("QPT", "APP", "ALL")
    with pytest.raises(ValueError):
        classify("LIN", "ALL", WeightModel(Constant(1), Constant(1)), 0.5)


def test_closure_detects_contradictions():
    reports = classify_all(WeightModel(Constant(1), Constant(1)), 0.5)
    rep = reports[("APP", "ALL")]
    rep.verdicts["SPT"] = rep.verdicts["EXP"]
    with pytest.raises(AssertionError):
        close(reports)
    reports = classify_all(WeightModel(Constant(1), Constant(1)), 0.5)
    reports[("APP", "ALL")].verdicts["EC-SPT"] = reports[("APP", "ALL")].verdicts["EXP"]
    with pytest.raises(AssertionError):
        audit(reports)


def test_rate_targets():
    assert rate_targets(WeightModel(Constant(1), PolyGrowth(1, 2)), 5)["p_star"].compare(6 / math.pi**2) == "eq"
    assert rate_targets(WeightModel.from_sequences([1, 1], [1, 2]), 2)["p_star_s"] == pytest.approx(2 / 3)
    harmonic = rate_targets(WeightModel(Constant(1), Constant(1)), 4)
    assert harmonic["p_star"].is_zero
    assert harmonic["p_star_s"] == pytest.approx(0.25)


def test_complexity_bound_direct_substitution():
    fit = RateFit(1.0, 1 / math.e, math.e, 1.0, 0.0)
    sp = SpaceParams.from_sequences([1], [1], 0.5)
    assert ec_complexity_bound(sp, fit, math.exp(-9)) == 10
    vals = [ec_complexity_bound(sp, fit, 10.0**-k) for k in range(1, 12)]
    assert vals == sorted(vals)


def test_complexity_bound_dominates_measured():
    sp = SpaceParams.from_sequences([1], [1], 0.5)
    ns = np.arange(1, 200)
    e = minimal_error_series(199, sp)[1:]
    fit = fit_rate(plateau_ends(ns, e, "left"))
    # the fitted curve passes through the staircase; a unit shift of C keeps it above every step
    shifted = RateFit(fit.p_hat, fit.q_hat, fit.c_hat * 2.0, fit.c1_hat, fit.residual)
    for k in range(2, 9):
        eps = 10.0**-k
        assert ec_complexity_bound(sp, shifted, eps) >= info_complexity_all(eps, sp)


@pytest.mark.parametrize(
    "model",
    [
        WeightModel(ExpGrowth(1, 3), ExpGrowth(1, 2)),
        WeightModel(ExpGrowth(1, 2), PolyGrowth(1, 1.5)),
        WeightModel(ExpGrowth(0.5, 2.5), PolyGrowth(1, 2)),
    ],
)
def test_ec_spt_exponent_bounds_measured_complexity(model):
    rep = classify("APP", "ALL", model, 0.5)
    tau_hi = rep.verdicts["EC-SPT"].bounds.upper
    worst = 0.0
    for s in range(1, 5):
        sp = SpaceParams(s, 0.5, model)
        for k in range(1, 11):
            eps = 10.0**-k
            worst = max(worst, info_complexity_all(eps, sp) / (1 + math.log(1 / eps)) ** (tau_hi + 0.25))
    # a single constant covers every dimension and accuracy
    assert worst < 10.0
