"""Reproducing kernel of the analytic Korobov space with certified truncation.

The kernel factorizes over coordinates,

    K(x, y) = prod_j [1 + 2 sum_{h>=1} omega**(a_j h**b_j) cos(2 pi h (x_j - y_j))],

and each factor is evaluated with the same tail machinery as the traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .series import EPS, progression_sum
from .spectrum import SpaceParams

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class KernelValue:
    value: float
    abs_error: float

    def contains(self, x: float) -> bool:
        return self.value - self.abs_error <= x <= self.value + self.abs_error


def kernel_1d_values(t, a: float, b: float, omega: float, tol: float = DEFAULT_TOL):
    """Vectorized 1-D factor at the points ``t``; returns (values, abs_error_bound)."""
    t = np.asarray(t, dtype=float)
    t = t - np.floor(t)
    lam = a * -math.log(omega)
    ts = progression_sum(lam, b, 1.0, 1.0, atol=tol / 4, rtol=0.0)
    h, terms = ts.u, ts.terms
    phase = np.multiply.outer(t, h)
    phase -= np.floor(phase)
    vals = 1.0 + 2.0 * (np.cos(2 * np.pi * phase) @ terms)
    mass = math.fsum(terms)
    # cos arguments carry an absolute error of order h*eps
    rounding = 2.0 * (len(terms) + 4) * EPS * (1 + 2 * mass) + 4 * np.pi * EPS * float(h @ terms)
    return vals, 2.0 * ts.tail + rounding


def kernel_1d(t: float, j: int, space: SpaceParams, tol: float = DEFAULT_TOL) -> KernelValue:
    """Factor for coordinate ``j`` (1-based) at the difference ``t``."""
    if not 1 <= j <= space.s:
        raise DimensionMismatch(f"coordinate index {j} outside 1..{space.s}")
    vals, err = kernel_1d_values([t], float(space.a[j - 1]), float(space.b[j - 1]), space.omega, tol)
    return KernelValue(float(vals[0]), float(err))


_SNAP = 2.0**50


def _slope_bound(a: float, b: float, omega: float) -> float:
    """Bound on |d/dt| of the 1-D factor: 4 pi sum_h h omega**(a h**b)."""
    ts = progression_sum(a * -math.log(omega), b, 1.0, 1.0, atol=1e-300, rtol=1e-3)
    return 4 * np.pi * (float(ts.u @ ts.terms) + ts.u[-1] * ts.tail * 2)


def _product_error(values: np.ndarray, errors: np.ndarray) -> float:
    """Bound on |prod(v + d) - prod(v)| given |d_j| <= e_j."""
    absv = np.abs(values)
    return float(np.prod(absv + errors) - np.prod(absv))


def kernel(x, y, space: SpaceParams, tol: float = DEFAULT_TOL) -> KernelValue:
    """K(x, y) with a propagated absolute error bound."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != space.s or y.size != space.s:
        raise DimensionMismatch(f"points must have {space.s} coordinates")
    vals = np.empty(space.s)
    errs = np.empty(space.s)
    for j in range(space.s):
        v, e = kernel_1d_values([x[j] - y[j]], float(space.a[j]), float(space.b[j]), space.omega, tol)
        vals[j], errs[j] = v[0], e
    value = float(np.prod(vals))
    err = _product_error(vals, errs) + space.s * EPS * abs(value)
    return KernelValue(value, err)


def gram_matrix(points, space: SpaceParams, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, float]:
    """Kernel matrix of a point set and a uniform entrywise error bound.

    Each coordinate is evaluated only at the distinct differences of its
    values modulo one, which makes grids (m distinct differences) cheap.
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[1] != space.s:
        raise DimensionMismatch(f"points must have {space.s} coordinates")
    X = X - np.floor(X)
    n = X.shape[0]
    K = np.ones((n, n))
    factor_max = np.ones(space.s)
    factor_err = np.zeros(space.s)
    for j in range(space.s):
        u, inv = np.unique(X[:, j], return_inverse=True)
        diff = u[:, None] - u[None, :]
        # snap so that mathematically equal differences share one evaluation
        diff = np.round((diff - np.floor(diff)) * _SNAP) / _SNAP
        diff[diff >= 1.0] = 0.0
        d, dinv = np.unique(diff, return_inverse=True)
        a, b = float(space.a[j]), float(space.b[j])
        vals, err = kernel_1d_values(d, a, b, space.omega, tol)
        Kj = vals[dinv.reshape(diff.shape)]
        K *= Kj[np.ix_(inv, inv)]
        factor_max[j] = np.abs(vals).max()
        factor_err[j] = err + _slope_bound(a, b, space.omega) * 0.5 / _SNAP
    entry_err = _product_error(factor_max, factor_err) + space.s * EPS * float(np.prod(factor_max))
    return K, entry_err
