"""Certified truncation of one-dimensional exponentially decaying series.

Every infinite sum in korolab reduces to sums of the form

    sum_{t >= 0} exp(-lam * (u0 + t*step)**b),      lam > 0, u0 >= 0, step > 0,

(the 1-D trace factors, grid aliasing sums, coset masses and kernel series).
The terms are decreasing in ``t``, so the tail after a cutoff can be bounded
without symbolic work:

* ``b >= 1``: consecutive ratios are nonincreasing, so the tail is dominated
  by a geometric series started at the first omitted term;
* ``0 < b < 1``: the tail is bounded by its first term plus the integral,
  which is an upper incomplete gamma function after substituting v = u**b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

EPS = np.finfo(float).eps

# relative slack for exp/pow rounding in each summed term
_TERM_SLACK = 4 * EPS


@dataclass(frozen=True)
class Interval:
    """Closed real interval ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    def __mul__(self, other: "Interval") -> "Interval":
        # only used with nonnegative operands
        if self.lo < 0 or other.lo < 0:
            raise ValueError("interval product implemented for nonnegative operands only")
        return Interval(self.lo * other.lo * (1 - 2 * EPS), self.hi * other.hi * (1 + 2 * EPS))

    def scale(self, c: float) -> "Interval":
        if c >= 0:
            return Interval(self.lo * c, self.hi * c)
        return Interval(self.hi * c, self.lo * c)

    def reciprocal(self) -> "Interval":
        if self.lo <= 0:
            raise ZeroDivisionError("reciprocal of interval touching zero")
        return Interval((1 / self.hi) * (1 - 2 * EPS), (1 / self.lo) * (1 + 2 * EPS))

    def as_list(self) -> list[float]:
        return [self.lo, self.hi]


@dataclass(frozen=True)
class TruncatedSum:
    """Leading terms of a progression sum plus a bound on the omitted tail."""

    u: np.ndarray  # abscissae u0 + t*step of the retained terms
    terms: np.ndarray
    tail: float

    @property
    def partial(self) -> float:
        return math.fsum(self.terms)

    def interval(self) -> Interval:
        p = self.partial
        n = len(self.terms)
        slack = (n + 2) * _TERM_SLACK * p
        return Interval(max(p - slack, 0.0), p + self.tail + slack)


def _log_upper_gamma(k: float, x: float) -> float:
    """log Gamma(k, x) for k > 1, falling back to an asymptotic upper bound on underflow."""
    val = special.gammaincc(k, x)
    if val > 0.0 and math.isfinite(val):
        return math.log(val) + special.gammaln(k)
    # Gamma(k, x) <= x^(k-1) e^(-x) / (1 - (k-1)/x) for x > k - 1
    if x <= 2.0 * (k - 1.0):
        return math.inf
    return (k - 1.0) * math.log(x) - x - math.log1p(-(k - 1.0) / x)


def _tail_bound(lam: float, b: float, u: float, step: float, g_u: float, shift: float = 0.0) -> float:
    """Bound sum_{t>=0} exp(-lam ((u + t step)^b - shift)) for the tail starting at ``u``."""
    if g_u == 0.0:
        # first omitted term underflows; the remainder is below the smallest subnormal
        return 0.0
    if b >= 1.0:
        gap = lam * ((u + step) ** b - u**b)
        one_minus_ratio = -math.expm1(-gap)
        if one_minus_ratio <= 0.0:
            return math.inf
        return g_u / one_minus_ratio
    # integral bound: int_u^inf exp(-lam v^b) dv = (1/b) lam^(-1/b) Gamma(1/b, lam u^b)
    k = 1.0 / b
    log_integral = math.log(k) - k * math.log(lam) + _log_upper_gamma(k, lam * u**b) - math.log(step)
    log_scaled = log_integral + lam * shift
    if log_scaled > 700.0:
        return math.inf
    return g_u + math.exp(log_scaled) * (1 + 1e-10)


def progression_sum(
    lam: float,
    b: float,
    u0: float = 0.0,
    step: float = 1.0,
    *,
    atol: float = 0.0,
    rtol: float = 1e-15,
    max_terms: int = 10_000_000,
    shift: float = 0.0,
) -> TruncatedSum:
    """Truncate ``sum_{t>=0} exp(-lam ((u0 + t step)^b - shift))`` with a certified tail.

    Terms are added until the tail bound is at most ``max(atol, rtol * partial)``.
    ``shift`` rescales every term by ``exp(lam * shift)``; it must not exceed
    ``u0**b`` so that the leading term stays at most one.
    """
    if lam <= 0 or b <= 0 or step <= 0 or u0 < 0:
        raise ValueError("progression_sum needs lam, b, step > 0 and u0 >= 0")
    if shift > u0**b:
        raise ValueError("shift must not exceed u0**b")
    if atol <= 0 and rtol <= 0:
        raise ValueError("need a positive atol or rtol")
    n = 32
    while True:
        u = u0 + step * np.arange(n + 1, dtype=float)
        with np.errstate(over="ignore", under="ignore"):
            g = np.exp(-lam * (u**b - shift))
        terms = g[:n]
        tail = _tail_bound(lam, b, float(u[n]), step, float(g[n]), shift)
        partial = math.fsum(terms)
        if tail <= max(atol, rtol * partial):
            return TruncatedSum(u[:n], terms, tail)
        if n >= max_terms:
            raise OverflowError(f"series did not reach tolerance within {max_terms} terms")
        n = min(2 * n, max_terms)
