"""Eigenvalue spectrum of the embedding operator W_s.

The eigenvalues are omega**E(h) for h in Z^s with the weighted exponent
E(h) = sum_j a_j |h_j|**b_j.  Eigenvalues are kept in the log domain
(``E * log(omega)``) since E reaches astronomically large values for
exponentially growing a_j.

Counting and enumeration walk the coordinates one at a time, materializing
the partial exponent sums that stay below the threshold, and count the last
coordinate in closed form.  All exponent sums are accumulated left to right
with :func:`axis_terms`, so ``count_leq`` and ``exponent`` agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, SpectrumOverflow, UndefinedModel
from .series import Interval, progression_sum
from .weights import WeightModel, prefix, validate

# largest number of partial sums held in memory during enumeration
MAX_POINTS = 20_000_000
_INT_MAX = 2**63 - 1


@dataclass(frozen=True)
class SpaceParams:
    """Dimension, base omega in (0, 1) and a validated weight model."""

    s: int
    omega: float
    weights: WeightModel

    def __post_init__(self):
        if not 0.0 < self.omega < 1.0:
            raise UndefinedModel(f"omega must lie strictly inside (0, 1), got {self.omega}")
        object.__setattr__(self, "weights", validate(self.weights))
        prefix(self.weights, self.s)

    @classmethod
    def from_sequences(cls, a, b, omega: float) -> "SpaceParams":
        a, b = list(a), list(b)
        if len(a) != len(b):
            raise DimensionMismatch("a and b must have equal length")
        return cls(len(a), omega, WeightModel.from_sequences(a, b))

    @cached_property
    def _ab(self) -> tuple[np.ndarray, np.ndarray]:
        return prefix(self.weights, self.s)

    @property
    def a(self) -> np.ndarray:
        return self._ab[0]

    @property
    def b(self) -> np.ndarray:
        return self._ab[1]

    @property
    def log_inv_omega(self) -> float:
        return -math.log(self.omega)

    def with_dimension(self, s: int) -> "SpaceParams":
        return SpaceParams(s, self.omega, self.weights)


@dataclass(frozen=True)
class Eigenpair:
    """Frequency h with exponent E(h); the eigenvalue is omega**E(h)."""

    h: tuple[int, ...]
    exponent: float
    log_eigenvalue: float

    @property
    def eigenvalue(self) -> float:
        return math.exp(self.log_eigenvalue)


def axis_terms(a: float, b: float, absh: np.ndarray) -> np.ndarray:
    """a * |h|**b for nonnegative integer ``absh`` (shared by every exponent sum)."""
    with np.errstate(over="ignore"):
        return a * np.power(absh.astype(float), b)


def exponent(h, space: SpaceParams) -> float:
    """E(h) = sum_j a_j |h_j|**b_j, saturating to +inf."""
    h = np.asarray(h, dtype=np.int64).reshape(-1)
    if h.size != space.s:
        raise DimensionMismatch(f"frequency has {h.size} entries, space has s={space.s}")
    total = 0.0
    for j in range(space.s):
        total = total + float(axis_terms(space.a[j], space.b[j], np.abs(h[j : j + 1]))[0])
    return total


def exponents(H: np.ndarray, space: SpaceParams) -> np.ndarray:
    """Vectorized :func:`exponent` over the rows of ``H``."""
    H = np.asarray(H, dtype=np.int64)
    if H.ndim != 2 or H.shape[1] != space.s:
        raise DimensionMismatch(f"expected an (m, {space.s}) array of frequencies")
    total = np.zeros(H.shape[0])
    for j in range(space.s):
        total = total + axis_terms(space.a[j], space.b[j], np.abs(H[:, j]))
    return total


def _axis_range(a: float, b: float, limit: float) -> np.ndarray:
    """Integers h >= 0 with a*h**b <= limit (limit >= 0)."""
    hmax = int(math.floor((limit / a) ** (1.0 / b))) + 1 if math.isfinite(limit) else None
    if hmax is None or hmax > MAX_POINTS:
        raise SpectrumOverflow(f"coordinate range for threshold {limit} exceeds the work budget")
    h = np.arange(hmax + 1)
    return h[axis_terms(a, b, h) <= limit]


def _accept(values: np.ndarray, T: float, strict: bool) -> np.ndarray:
    return values < T if strict else values <= T


def _partials(space: SpaceParams, T: float, strict: bool, ncoords: int, keep_h: bool):
    """Partial sums over the first ``ncoords`` coordinates that stay within T."""
    acc = np.zeros(1)
    H = np.zeros((1, 0), dtype=np.int64) if keep_h else None
    for j in range(ncoords):
        pos = _axis_range(space.a[j], space.b[j], T)
        hs = np.concatenate([-pos[:0:-1], pos])
        vals = axis_terms(space.a[j], space.b[j], pos)
        # k[i] = number of h >= 0 admissible after acc[i], counted before anything is materialized
        k = np.searchsorted(vals, T - acc, side="right")
        for _ in range(2):
            up = (k < vals.size) & _accept(acc + vals[np.minimum(k, vals.size - 1)], T, strict)
            k = np.where(up, k + 1, k)
            down = (k > 0) & ~_accept(acc + vals[np.maximum(k - 1, 0)], T, strict)
            k = np.where(down, k - 1, k)
        width = np.where(k > 0, 2 * k - 1, 0)
        size = int(width.sum(dtype=object))
        if size > MAX_POINTS:
            raise SpectrumOverflow(f"more than {MAX_POINTS} partial frequencies below threshold {T}")
        rows = np.repeat(np.arange(acc.size), width)
        offset = np.arange(size) - np.repeat(np.cumsum(width) - width, width)
        cols = (pos.size - 1) - (k[rows] - 1) + offset
        acc = acc[rows] + axis_terms(space.a[j], space.b[j], np.abs(hs[cols]))
        if keep_h:
            H = np.concatenate([H[rows], hs[cols][:, None]], axis=1)
    return acc, H


def _last_axis_halfwidth(acc: np.ndarray, a: float, b: float, T: float, strict: bool) -> np.ndarray:
    """For each partial sum, the largest H >= 0 with acc + a*H**b within T (-1 if none)."""
    rem = np.maximum(T - acc, 0.0)
    with np.errstate(over="ignore"):
        H = np.floor((rem / a) ** (1.0 / b))
    H = np.minimum(H, 2.0**62).astype(np.int64)
    for _ in range(3):
        up = _accept(acc + axis_terms(a, b, H + 1), T, strict)
        H = np.where(up, H + 1, H)
    for _ in range(3):
        down = (H >= 0) & ~_accept(acc + axis_terms(a, b, np.maximum(H, 0)), T, strict)
        H = np.where(down, H - 1, H)
    return H


def count_leq(T: float, space: SpaceParams, strict: bool = False) -> int:
    """#{h in Z^s : E(h) <= T}  (``E(h) < T`` when ``strict``)."""
    if T < 0 or (strict and T <= 0):
        return 0
    if not math.isfinite(T):
        raise SpectrumOverflow("threshold must be finite")
    acc, _ = _partials(space, T, strict, space.s - 1, keep_h=False)
    H = _last_axis_halfwidth(acc, space.a[-1], space.b[-1], T, strict)
    counts = np.where(H >= 0, 2 * H + 1, 0)
    total = int(counts.sum(dtype=object))
    if total > _INT_MAX:
        raise SpectrumOverflow(f"count {total} exceeds the 64-bit range")
    return total


def points_leq(T: float, space: SpaceParams, strict: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """All frequencies with E(h) <= T as an (m, s) array, with their exponents."""
    if T < 0 or (strict and T <= 0):
        return np.zeros((0, space.s), dtype=np.int64), np.zeros(0)
    acc, H = _partials(space, T, strict, space.s, keep_h=True)
    return H, acc


def _threshold_for(k: int, space: SpaceParams) -> float:
    """A threshold T with count_leq(T) >= k and not much larger than needed."""
    lo, hi = 0.0, float(space.a[0])
    while count_leq(hi, space) < k:
        lo, hi = hi, 2.0 * hi + 1.0
    # shrink so that the materialized set stays close to k
    for _ in range(60):
        if count_leq(hi, space) <= 2 * k + 64:
            break
        mid = 0.5 * (lo + hi)
        if count_leq(mid, space) >= k:
            hi = mid
        else:
            lo = mid
    return hi


def smallest(k: int, space: SpaceParams) -> tuple[np.ndarray, np.ndarray]:
    """The k smallest exponents (ascending, ties lexicographic on h) and their frequencies."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return np.zeros((0, space.s), dtype=np.int64), np.zeros(0)
    T = _threshold_for(k, space)
    H, E = points_leq(T, space)
    order = np.lexsort(tuple(H[:, j] for j in range(space.s - 1, -1, -1)) + (E,))
    order = order[:k]
    return H[order], E[order]


def enumerate_smallest(k: int, space: SpaceParams) -> list[Eigenpair]:
    H, E = smallest(k, space)
    log_w = math.log(space.omega)
    return [Eigenpair(tuple(int(x) for x in h), float(e), float(e) * log_w) for h, e in zip(H, E)]


def trace_factor(a: float, b: float, omega: float, tau: float, tol: float = 1e-14) -> Interval:
    """Enclosure of 1 + 2 sum_{h>=1} omega**(tau a h**b)."""
    lam = tau * a * -math.log(omega)
    ts = progression_sum(lam, b, 1.0, 1.0, atol=tol / 2, rtol=tol / 2)
    iv = ts.interval()
    return Interval(1.0 + 2.0 * iv.lo, 1.0 + 2.0 * iv.hi)


def trace_tau(space: SpaceParams, tau: float, tol: float = 1e-14) -> Interval:
    """Enclosure of sum_h omega_h**tau = prod_j (1 + 2 sum_{h>=1} omega**(tau a_j h**b_j))."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    out = Interval.point(1.0)
    for a, b in zip(space.a, space.b):
        out = out * trace_factor(float(a), float(b), space.omega, tau, tol)
    return out
