"""Classification of convergence and tractability notions for a weight family.

Every verdict is decided from the asymptotic invariants of the weight model
(A = lim a_j/log j, B = sum 1/b_j, alpha* = liminf log(a_j)/j, lim a_j) and
the base omega.  Conditions that are only sufficient (or only necessary)
yield ``Unknown`` when they are not triggered, and an invariant whose
enclosure straddles a threshold also yields ``Unknown``.

After the rules are applied, verdicts are closed under the implications
between notions (SPT => PT => WT, EC-SPT => EC-PT => EC-WT, each EC notion
implies its classical counterpart, EC-PT => UEXP => EXP) and between
information classes (function values are a subset of all linear
functionals; integration is no harder than approximation with function
values).  A contradiction raised by the closure is an ``AssertionError``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .approx import RateFit
from .series import Interval
from .spectrum import SpaceParams
from .weights import (
    Asymptotics,
    Constant,
    Explicit,
    ExpGrowth,
    ExtReal,
    LogGrowth,
    PolyGrowth,
    WeightModel,
    _expand,
    asymptotics,
    validate,
)

PROBLEMS = ("INT", "APP")
INFO_CLASSES = ("ALL", "STD")
BASE_NOTIONS = ("EXP", "UEXP", "WT", "PT", "SPT", "EC-WT", "EC-PT", "EC-SPT")
J0_SCAN = 1_000_000
BOUND_DIGITS = 12
INF = "∞"


class Status(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNKNOWN = "Unknown"


class Direction(str, enum.Enum):
    SUFFICIENT = "sufficient"
    NECESSARY = "necessary"
    IFF = "iff"


@dataclass(frozen=True)
class Notion:
    """A notion tag for one problem and information class."""

    tag: str
    problem: str
    info_class: str
    kappa: float | None = None

    def __post_init__(self):
        if self.problem not in PROBLEMS or self.info_class not in INFO_CLASSES:
            raise ValueError(f"unknown problem/class {self.problem}/{self.info_class}")
        if self.tag == "KAPPA-WT":
            if self.kappa is None or not self.kappa >= 1:
                raise ValueError("KAPPA-WT needs kappa >= 1")
        elif self.tag not in BASE_NOTIONS:
            raise ValueError(f"unknown notion {self.tag}")

    @property
    def name(self) -> str:
        if self.tag == "KAPPA-WT":
            return f"KAPPA-WT({self.kappa:g})"
        return self.tag


@dataclass(frozen=True)
class ExponentBound:
    """Enclosure of an exponent; ``upper`` may be ``math.inf``."""

    lower: float
    upper: float
    which: str

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise ValueError(f"bad exponent bound [{self.lower}, {self.upper}]")

    def to_json(self) -> list:
        return [_round(self.lower), INF if math.isinf(self.upper) else _round(self.upper)]


@dataclass(frozen=True)
class Verdict:
    status: Status
    reason: str
    direction: Direction
    bounds: ExponentBound | None = None

    def to_json(self, notion: str) -> dict:
        return {
            "notion": notion,
            "status": self.status.value,
            "reason": self.reason,
            "direction": self.direction.value,
            "bounds": self.bounds.to_json() if self.bounds else None,
        }


@dataclass
class TractabilityReport:
    problem: str
    info_class: str
    verdicts: dict[str, Verdict] = field(default_factory=dict)

    def status(self, notion: str) -> Status:
        return self.verdicts[notion].status

    def to_json(self) -> dict:
        return {
            "problem": self.problem,
            "class": self.info_class,
            "verdicts": [v.to_json(k) for k, v in self.verdicts.items()],
        }


def _round(x: float) -> float:
    """Round to BOUND_DIGITS significant digits (hides enclosure widths near 1e-16)."""
    if x == 0 or not math.isfinite(x):
        return float(x)
    return float(f"{x:.{BOUND_DIGITS}g}")


def _fmt(x: ExtReal) -> str:
    return INF if x.is_infinite else str(x)


# -- rule helpers -------------------------------------------------------------


def _H(reason, direction=Direction.IFF, bounds=None):
    return Verdict(Status.HOLDS, reason, direction, bounds)


def _F(reason, direction=Direction.IFF):
    return Verdict(Status.FAILS, reason, direction)


def _U(reason, direction):
    return Verdict(Status.UNKNOWN, reason, direction)


def _inv(iv: Interval, scale: float = 1.0) -> tuple[float, float]:
    """Enclosure of scale / x for x in iv (iv > 0)."""
    return scale / iv.hi, scale / iv.lo


def _exp_verdict(asy: Asymptotics) -> Verdict:
    p = 1.0 / asy.B_partial
    return _H(
        f"EXP holds for all weights with p*(s) = 1/B(s); B({asy.s}) = {asy.B_partial!r}",
        Direction.IFF,
        ExponentBound(p, p, "rate p*(s)"),
    )


def _uexp_verdict(asy: Asymptotics) -> Verdict:
    clause = "UEXP <=> B = sum 1/b_j < ∞"
    B = asy.B
    if not B.is_defined:
        return _U(f"{clause}; B is undefined for a finite list", Direction.IFF)
    if B.is_infinite:
        return _F(f"{clause}; B = ∞")
    lo, hi = _inv(B.interval())
    return _H(f"{clause}; B = {B}, p* = 1/B", Direction.IFF, ExponentBound(lo, hi, "rate p*"))


def _ec_wt_verdict(asy: Asymptotics) -> Verdict:
    clause = "EC-WT <=> lim a_j = ∞"
    lim = asy.a_limit
    if lim.is_infinite:
        return _H(f"{clause}; lim a_j = ∞")
    if lim.is_defined:
        return _F(f"{clause}; lim a_j = {lim} is finite")
    return _U(f"{clause}; lim a_j is undefined", Direction.IFF)


def _ec_spt_verdict(asy: Asymptotics) -> Verdict:
    clause = "EC-PT <=> EC-SPT <=> EC-SPT+UEXP <=> B < ∞ and alpha* = liminf log(a_j)/j > 0"
    B, alpha = asy.B, asy.alpha_star
    if B.is_infinite:
        return _F(f"{clause}; B = ∞")
    if alpha.is_defined and alpha.compare(0.0) in ("lt", "eq"):
        return _F(f"{clause}; alpha* = {alpha}")
    if not (B.is_defined and alpha.is_defined):
        return _U(f"{clause}; B or alpha* is undefined", Direction.IFF)
    if alpha.compare(0.0) != "gt":
        return _U(f"{clause}; alpha* = {alpha} is not decisively positive", Direction.IFF)
    Biv = B.interval()
    extra = Biv.hi if alpha.is_infinite else min(Biv.hi, math.log(3.0) / alpha.interval().lo)
    bound = ExponentBound(Biv.lo, Biv.hi + extra, "EC-SPT exponent tau*")
    return _H(f"{clause}; B = {B}, alpha* = {_fmt(alpha)}", Direction.IFF, bound)


def _tau_all(A: ExtReal, L: float) -> tuple[float, float]:
    """Enclosure of 2 / (A log(1/omega))."""
    if A.is_infinite:
        return 0.0, 0.0
    return _inv(A.interval(), 2.0 / L)


def _app_all(tag: str, asy: Asymptotics, L: float) -> Verdict:
    A = asy.A
    if tag == "WT":
        return _H("WT holds for all weights (arbitrary linear information)")
    clause = "SPT <=> A = lim a_j/log j > 0" if tag == "SPT" else "PT <=> SPT <=> A > 0"
    if not A.is_defined:
        return _U(f"{clause}; A is undefined", Direction.IFF)
    cmp = A.compare(0.0)
    if cmp == "gt":
        lo, hi = _tau_all(A, L)
        bound = ExponentBound(lo, hi, "SPT exponent tau*") if tag == "SPT" else None
        return _H(f"{clause}; A = {_fmt(A)}, exponent 2/(A log 1/omega)", Direction.IFF, bound)
    if cmp in ("eq", "lt") or A.is_zero:
        return _F(f"{clause}; A = {A}")
    return _U(f"{clause}; A = {A} straddles 0", Direction.IFF)


@dataclass(frozen=True)
class J0Result:
    holds: bool
    j0: int | None
    proof: str


def pt_clause(model: WeightModel, omega: float) -> J0Result:
    """Is there j0 >= 2 with a_j/log j >= 1/log(1/omega) for all j >= j0?

    Proved in closed form from the tail model; the scan over j <= 10^6 only
    reports the smallest j0 that works within the scanned range.
    """
    theta = 1.0 / -math.log(omega)
    a = model.a
    if isinstance(a, Explicit):
        return J0Result(False, None, "finite a-list: the clause concerns all j >= j0")
    if isinstance(a, LogGrowth):
        cmp = ExtReal.finite(a.c).compare(theta)
        if cmp == "gt":
            holds, proof = True, f"a_j/log j -> {a.c!r} > 1/log(1/omega)"
        elif cmp == "eq":
            # c log(j+1) + offset >= c log j exactly when offset >= -c log(1 + 1/j)
            holds = a.offset >= 0
            proof = f"a_j = log(j+1)/log(1/omega) + {a.offset!r}"
        else:
            holds, proof = False, f"a_j/log j -> {a.c!r} < 1/log(1/omega)"
    elif isinstance(a, PolyGrowth) and a.gamma > 0 or isinstance(a, ExpGrowth) and a.beta > 1:
        holds, proof = True, "a_j/log j -> ∞"
    elif isinstance(a, (Constant, PolyGrowth, ExpGrowth)):
        holds, proof = False, "a_j/log j -> 0"
    else:  # pragma: no cover - every closed form is listed above
        return J0Result(False, None, "unrecognized model")
    if not holds:
        return J0Result(False, None, proof)
    j0 = _scan_j0(model, theta)
    return J0Result(True, j0, proof)


def _scan_j0(model: WeightModel, theta: float) -> int | None:
    a_vals = _expand(model.a, model.explicit_a, J0_SCAN)
    j = np.arange(2, J0_SCAN + 1, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        ok = a_vals[1:] / np.log(j) >= theta
    if not ok[-1]:
        return None
    bad = np.nonzero(~ok)[0]
    return 2 if bad.size == 0 else int(bad[-1]) + 3


def _pt_sufficient(model: WeightModel, omega: float) -> tuple[bool, str]:
    res = pt_clause(model, omega)
    clause = "PT holds if a_j/log j >= 1/log(1/omega) for all j >= j0"
    if not res.holds:
        return False, f"{clause}; not established ({res.proof})"
    where = f"j0 = {res.j0}" if res.j0 is not None else f"j0 > {J0_SCAN}"
    return True, f"{clause}; {res.proof}, {where}"


def _std_spt(problem: str, asy: Asymptotics, L: float) -> Verdict:
    A, theta = asy.A, 1.0 / L
    clause = "SPT holds if A > 1/log(1/omega); SPT with exponent tau requires A >= 1/(tau log(1/omega))"
    if not A.is_defined:
        return _U(f"{clause}; A is undefined", Direction.SUFFICIENT)
    if A.compare(theta) == "gt":
        if problem == "APP":
            lo, hi = _tau_all(A, L)
            bound = ExponentBound(lo, hi + 0.5 * hi * hi, "SPT exponent tau*")
        else:
            lo = 0.0 if A.is_infinite else _inv(A.interval(), theta)[0]
            t_lo, t_hi = _tau_all(A, L)
            hi = min(2.0, t_hi * (1.0 + 0.5 * t_hi))
            bound = ExponentBound(min(lo, hi), hi, "SPT exponent tau*")
        return _H(f"{clause}; A = {_fmt(A)} > 1/log(1/omega) = {theta!r}", Direction.SUFFICIENT, bound)
    if A.is_zero:
        return _F(f"{clause}; A = 0 violates the necessary condition", Direction.NECESSARY)
    rel = "equals" if A.compare(theta) == "eq" else "does not exceed"
    return _U(f"{clause}; A = {A} {rel} 1/log(1/omega) = {theta!r}", Direction.SUFFICIENT)


def _std_pt(problem: str, model: WeightModel, asy: Asymptotics, omega: float) -> Verdict:
    ok, reason = _pt_sufficient(model, omega)
    if ok:
        return _H(reason, Direction.SUFFICIENT)
    if problem == "APP" and asy.A.is_zero:
        return _F(f"{reason}; A = 0 rules out PT even for all linear functionals", Direction.NECESSARY)
    return _U(reason, Direction.SUFFICIENT)


def _std_wt(asy: Asymptotics) -> Verdict:
    clause = "WT holds if lim a_j = ∞"
    if asy.a_limit.is_infinite:
        return _H(f"{clause}; lim a_j = ∞", Direction.SUFFICIENT)
    return _U(f"{clause}; lim a_j = {asy.a_limit}", Direction.SUFFICIENT)


def _kappa_verdict(problem: str, info_class: str, kappa: float, asy: Asymptotics, ec_wt: Verdict) -> Verdict:
    # kappa = 1 is EC-WT itself, whose iff condition takes precedence
    if problem == "APP" and info_class == "ALL" and kappa > 1.0 and kappa * asy.b_star > 1.0:
        return _H(f"KAPPA-WT holds for kappa > 1/b* = {1.0 / asy.b_star!r}", Direction.SUFFICIENT)
    if ec_wt.status is Status.HOLDS:
        return _H("EC-WT implies KAPPA-WT for every kappa >= 1", Direction.SUFFICIENT)
    if kappa == 1.0:
        return Verdict(ec_wt.status, "KAPPA-WT(1) is EC-WT; " + ec_wt.reason, ec_wt.direction)
    return _U(f"KAPPA-WT with kappa = {kappa:g}: no decisive condition", Direction.SUFFICIENT)


def _trivial_int_all(notion: str) -> Verdict:
    return _H(f"{notion}: the integral is itself an admissible functional, so n(eps, s) <= 1")


# -- closure ------------------------------------------------------------------

# (weaker <- stronger) implications inside one report
_EDGES = [
    ("SPT", "PT"),
    ("PT", "WT"),
    ("EC-SPT", "EC-PT"),
    ("EC-PT", "EC-WT"),
    ("EC-SPT", "SPT"),
    ("EC-PT", "PT"),
    ("EC-WT", "WT"),
    ("EC-PT", "UEXP"),
    ("UEXP", "EXP"),
    ("EC-PT", "EC-SPT"),
]
# (stronger report, weaker report): a notion holding for the first holds for the second
_CROSS = [(("APP", "STD"), ("APP", "ALL")), (("APP", "STD"), ("INT", "STD"))]


def _set(report: TractabilityReport, notion: str, status: Status, why: str) -> bool:
    cur = report.verdicts[notion]
    if cur.status is status:
        return False
    if cur.status is not Status.UNKNOWN:
        raise AssertionError(
            f"{report.problem}/{report.info_class} {notion}: {cur.status.value} contradicts implied {status.value} ({why})"
        )
    direction = Direction.SUFFICIENT if status is Status.HOLDS else Direction.NECESSARY
    report.verdicts[notion] = Verdict(status, why, direction, cur.bounds)
    return True


def _edges(report: TractabilityReport):
    out = list(_EDGES)
    for name in report.verdicts:
        if name.startswith("KAPPA-WT"):
            out.append(("EC-WT", name))
    return out


def close(reports: dict[tuple[str, str], TractabilityReport]) -> None:
    """Propagate Holds along implications and Fails against them, in place."""
    changed = True
    while changed:
        changed = False
        for rep in reports.values():
            tag = f"{rep.problem}/{rep.info_class}"
            for strong, weak in _edges(rep):
                if rep.status(strong) is Status.HOLDS:
                    changed |= _set(rep, weak, Status.HOLDS, f"implied by {strong} ({tag})")
                if rep.status(weak) is Status.FAILS:
                    changed |= _set(rep, strong, Status.FAILS, f"{weak} fails ({tag}) and is implied by {strong}")
        for hi_key, lo_key in _CROSS:
            if hi_key not in reports or lo_key not in reports:
                continue
            hi, lo = reports[hi_key], reports[lo_key]
            for name in hi.verdicts:
                if name not in lo.verdicts:
                    continue
                if hi.status(name) is Status.HOLDS:
                    changed |= _set(lo, name, Status.HOLDS, f"{name} holds for {'/'.join(hi_key)}")
                if lo.status(name) is Status.FAILS:
                    changed |= _set(hi, name, Status.FAILS, f"{name} fails for {'/'.join(lo_key)}")


def audit(reports: dict[tuple[str, str], TractabilityReport]) -> None:
    """Raise AssertionError if any implication between verdicts is violated."""
    for rep in reports.values():
        for strong, weak in _edges(rep):
            assert not (rep.status(strong) is Status.HOLDS and rep.status(weak) is not Status.HOLDS), (
                f"{rep.problem}/{rep.info_class}: {strong} holds but {weak} does not"
            )
    for hi_key, lo_key in _CROSS:
        if hi_key in reports and lo_key in reports:
            for name, v in reports[hi_key].verdicts.items():
                if v.status is Status.HOLDS and name in reports[lo_key].verdicts:
                    assert reports[lo_key].status(name) is Status.HOLDS, f"{name}: {hi_key} holds, {lo_key} not"


# -- entry points -------------------------------------------------------------


def _base_report(problem, info_class, model, omega, asy, kappas) -> TractabilityReport:
    L = -math.log(omega)
    rep = TractabilityReport(problem, info_class)
    names = list(BASE_NOTIONS) + [Notion("KAPPA-WT", problem, info_class, k).name for k in kappas]
    if problem == "INT" and info_class == "ALL":
        for name in names:
            rep.verdicts[name] = _trivial_int_all(name)
        return rep
    v = rep.verdicts
    v["EXP"] = _exp_verdict(asy)
    v["UEXP"] = _uexp_verdict(asy)
    if problem == "APP" and info_class == "ALL":
        for tag in ("WT", "PT", "SPT"):
            v[tag] = _app_all(tag, asy, L)
    else:
        v["WT"] = _std_wt(asy)
        v["PT"] = _std_pt(problem, model, asy, omega)
        v["SPT"] = _std_spt(problem, asy, L)
    v["EC-WT"] = _ec_wt_verdict(asy)
    v["EC-PT"] = _ec_spt_verdict(asy)
    v["EC-SPT"] = _ec_spt_verdict(asy)
    for k in kappas:
        v[Notion("KAPPA-WT", problem, info_class, k).name] = _kappa_verdict(problem, info_class, k, asy, v["EC-WT"])
    rep.verdicts = {name: v[name] for name in names}
    return rep


def classify_all(
    model: WeightModel, omega: float, s: int = 1, kappas=(2.0,)
) -> dict[tuple[str, str], TractabilityReport]:
    """Reports for every (problem, information class), closed under implications."""
    if not 0.0 < omega < 1.0:
        raise ValueError("omega must lie in (0, 1)")
    for k in kappas:
        if not k >= 1:
            raise ValueError("kappa must be >= 1")
    model = validate(model)
    asy = asymptotics(model, s)
    reports = {
        (p, c): _base_report(p, c, model, omega, asy, tuple(kappas)) for p in PROBLEMS for c in INFO_CLASSES
    }
    close(reports)
    audit(reports)
    return reports


def classify(problem: str, info_class: str, model: WeightModel, omega: float, s: int = 1, kappas=(2.0,)):
    """Verdicts for one problem and information class."""
    problem, info_class = problem.upper(), info_class.upper()
    if problem not in PROBLEMS or info_class not in INFO_CLASSES:
        raise ValueError(f"unknown problem/class {problem}/{info_class}")
    return classify_all(model, omega, s, kappas)[(problem, info_class)]


def rate_targets(model: WeightModel, s: int) -> dict:
    """p*(s) = 1/B(s) and p* = 1/B (zero when B diverges, undefined for finite lists)."""
    asy = asymptotics(validate(model), s)
    B = asy.B
    if B.is_infinite:
        p_star = ExtReal.zero()
    elif B.is_defined:
        lo, hi = _inv(B.interval())
        p_star = ExtReal.finite(lo, hi)
    else:
        p_star = ExtReal.undefined()
    return {"p_star_s": 1.0 / asy.B_partial, "p_star": p_star}


def ec_complexity_bound(space: SpaceParams, fit: RateFit, eps: float) -> int:
    """ceil(C1 ((log C + log 1/eps) / log 1/q)^(1/p)) from a fitted exponential rate."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    num = math.log(fit.c_hat) + math.log(1.0 / eps)
    if num <= 0:
        return 0
    x = fit.c1_hat * (num / math.log(1.0 / fit.q_hat)) ** (1.0 / fit.p_hat)
    # absorb rounding so exact integers are not pushed up by one
    return int(math.ceil(x * (1.0 - 1e-12)))
