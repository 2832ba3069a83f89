"""L2-approximation: minimal errors for arbitrary linear information, a grid
sampling algorithm for function values, and exponential-rate fitting.

With arbitrary linear functionals the n-th minimal error is the square root
of the (n+1)-st largest eigenvalue omega**E(h), so everything reduces to the
spectrum module.  For function values the grid algorithm samples on a mesh,
takes the discrete Fourier transform and assigns each retained residue class
(coset) to its representative frequency.  Its worst-case error decouples over
cosets and is computed exactly up to a certified truncation.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize

from .errors import DegenerateSeries, DimensionMismatch
from .series import EPS, progression_sum
from .spectrum import SpaceParams, axis_terms, count_leq, smallest

THREADS_ENV = "KOROLAB_THREADS"
_BATCH = 64
_MAX_MEMBERS = 5_000_000


def max_workers() -> int:
    """Thread cap from ``KOROLAB_THREADS`` (default: CPU count, at least 1)."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


# -- arbitrary linear information -------------------------------------------


def minimal_error_all(n: int, space: SpaceParams) -> float:
    """n-th minimal L2-approximation error using arbitrary linear functionals."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    _, E = smallest(n + 1, space)
    return math.exp(0.5 * float(E[-1]) * math.log(space.omega))


def info_complexity_all(eps: float, space: SpaceParams) -> int:
    """Number of eigenvalues strictly above eps**2, i.e. the minimal n with e(n) <= eps."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    T = 2.0 * math.log(1.0 / eps) / space.log_inv_omega
    return count_leq(T, space, strict=True)


# -- grid sampling ------------------------------------------------------------


@dataclass(frozen=True)
class CosetSpec:
    """Frequencies congruent to ``residue`` modulo ``mesh``.

    ``members`` holds the (truncated) class ordered by exponent, ties
    lexicographic, so ``members[0]`` is the representative.
    """

    mesh: tuple[int, ...]
    residue: tuple[int, ...]
    representative: tuple[int, ...]
    members: np.ndarray
    exponents: np.ndarray


@dataclass(frozen=True)
class _AxisCosets:
    """Per-coordinate data for every residue of one mesh size."""

    a: float
    b: float
    m: int
    rep_h: np.ndarray  # representative frequency per residue
    rep_e: np.ndarray  # its exponent a*|h|**b
    rest_hi: np.ndarray  # upper bound on the class mass over the representative's, minus one


def _rep(r: int, m: int) -> int:
    if r == 0:
        return 0
    # the negative member wins ties since it is lexicographically smaller
    return r if r < m - r else r - m


def _axis_cosets(a: float, b: float, m: int, log_inv_omega: float) -> _AxisCosets:
    lam = a * log_inv_omega
    reps = np.array([_rep(r, m) for r in range(m)], dtype=np.int64)
    rep_e = axis_terms(a, b, np.abs(reps))
    rest = np.empty(m)
    for r in range(m):
        rep_abs = abs(int(reps[r]))
        shift = float(rep_abs) ** b
        # two progressions: h = r + t m (|h| = r + t m) and h = r - m - t m (|h| = m - r + t m)
        starts = [r, m - r]
        if reps[r] >= 0:
            starts[0] += m
        else:
            starts[1] += m
        total = 0.0
        for u0 in starts:
            ts = progression_sum(lam, b, float(u0), float(m), atol=0.0, rtol=1e-16, shift=shift)
            total += ts.interval().hi
        rest[r] = total
    return _AxisCosets(a, b, m, reps, rep_e, rest)


def _axis_members(ax: _AxisCosets, r: int, cut: float) -> tuple[np.ndarray, np.ndarray]:
    """Members h of residue r with excess a|h|^b - a|rep|^b <= cut, sorted, representative first."""
    e_rep = float(ax.rep_e[r])
    u_max = ((cut + e_rep) / ax.a) ** (1.0 / ax.b)
    hs = []
    for u0, first in ((r, r), (ax.m - r, r - ax.m)):
        if u0 > u_max:
            continue
        t = np.arange(int((u_max - u0) // ax.m) + 2, dtype=np.int64)
        hs.append(first + np.sign(first if first else 1) * t * ax.m)
    h = np.concatenate(hs)
    excess = axis_terms(ax.a, ax.b, np.abs(h)) - e_rep
    keep = excess <= cut
    h, excess = h[keep], excess[keep]
    order = np.lexsort((h, excess))
    return h[order], np.maximum(excess[order], 0.0)


def _coset_members(axes: list[_AxisCosets], residue, cut: float, keep_h: bool):
    """Excess exponents (relative to the representative) of the truncated class."""
    acc = np.zeros(1)
    is_rep = np.ones(1, dtype=bool)
    H = np.zeros((1, 0), dtype=np.int64) if keep_h else None
    for ax, r in zip(axes, residue):
        h, ex = _axis_members(ax, int(r), cut)
        cand = acc[:, None] + ex[None, :]
        mask = cand <= cut
        rows, cols = np.nonzero(mask)
        if rows.size > _MAX_MEMBERS:
            raise MemoryError("coset enumeration exceeds the work budget; raise tol")
        acc = cand[rows, cols]
        is_rep = is_rep[rows] & (cols == 0)
        if keep_h:
            H = np.concatenate([H[rows], h[cols][:, None]], axis=1)
    return acc, is_rep, H


def coset(mesh, residue, space: SpaceParams, tol: float = 1e-10) -> CosetSpec:
    """The residue class of ``residue`` modulo ``mesh``, truncated at tol times its top eigenvalue."""
    mesh, residue = _check_mesh(mesh, space), tuple(int(r) for r in residue)
    if len(residue) != space.s or any(not 0 <= r < m for r, m in zip(residue, mesh)):
        raise DimensionMismatch("residue must satisfy 0 <= r_j < m_j")
    axes = _axes(mesh, space)
    cut = math.log(1.0 / tol) / space.log_inv_omega
    ex, _, H = _coset_members(axes, residue, cut, keep_h=True)
    e_rep = sum(float(ax.rep_e[r]) for ax, r in zip(axes, residue))
    order = np.lexsort(tuple(H[:, j] for j in range(space.s - 1, -1, -1)) + (ex,))
    H, ex = H[order], ex[order]
    return CosetSpec(mesh, residue, tuple(int(x) for x in H[0]), H, e_rep + ex)


def _check_mesh(mesh, space: SpaceParams) -> tuple[int, ...]:
    mesh = tuple(int(m) for m in mesh)
    if len(mesh) != space.s:
        raise DimensionMismatch(f"mesh has {len(mesh)} entries, space has s={space.s}")
    if any(m < 1 for m in mesh):
        raise ValueError("mesh sizes must be positive")
    return mesh


def _axes(mesh, space: SpaceParams) -> list[_AxisCosets]:
    return [
        _axis_cosets(float(space.a[j]), float(space.b[j]), mesh[j], space.log_inv_omega)
        for j in range(space.s)
    ]


def _coset_order(axes: list[_AxisCosets]) -> tuple[np.ndarray, np.ndarray]:
    """Flat coset indices sorted by representative exponent then lexicographically, with exponents."""
    E = np.zeros(1)
    for ax in axes:
        E = (E[:, None] + ax.rep_e[None, :]).ravel()
    shape = tuple(ax.m for ax in axes)
    idx = np.unravel_index(np.arange(E.size), shape)
    keys = tuple(axes[j].rep_h[idx[j]] for j in range(len(axes) - 1, -1, -1))
    order = np.lexsort(keys + (E,))
    return order, E[order]


def kept_representatives(mesh, kept: int, space: SpaceParams) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(residue, representative) pairs of the ``kept`` cosets with the smallest representatives."""
    mesh = _check_mesh(mesh, space)
    axes = _axes(mesh, space)
    order, _ = _coset_order(axes)
    out = []
    for flat in order[:kept]:
        res = np.unravel_index(int(flat), mesh)
        rep = tuple(int(ax.rep_h[r]) for ax, r in zip(axes, res))
        out.append((tuple(int(r) for r in res), rep))
    return out


def _rest_upper(axes: list[_AxisCosets], residues: tuple[np.ndarray, ...]) -> np.ndarray:
    """prod_j (1 + rest_j) - 1 without cancellation."""
    diff = np.zeros(residues[0].shape)
    for ax, r in zip(axes, residues):
        rest = ax.rest_hi[r]
        diff = diff * (1.0 + rest) + rest
    return diff * (1 + 4 * len(axes) * EPS)


def _top_eigenvalue(lam: np.ndarray) -> float:
    """Largest eigenvalue of diag(lam) + sqrt(lam) sqrt(lam)^T."""
    if lam.size == 0:
        return 0.0
    total = math.fsum(lam)
    top = float(lam.max())
    if lam.size == 1 or top == total:
        return 2.0 * total

    def secular(mu):
        return 1.0 - math.fsum(lam / (mu - lam))

    lo, hi = total, total + top
    if secular(hi) <= 0.0:
        return hi
    if secular(lo) >= 0.0:
        return lo
    return optimize.brentq(secular, lo, hi, xtol=4 * EPS * hi, rtol=4 * EPS)


def _kept_coset_error(axes, residue, cut: float, omega: float, rest_hi: float) -> tuple[float, float]:
    """Enclosure of the squared error carried by one retained coset, relative to its representative."""
    ex, is_rep, _ = _coset_members(axes, residue, cut, keep_h=False)
    lam = np.power(omega, ex[~is_rep])
    mu = _top_eigenvalue(lam)
    enumerated = math.fsum(lam)
    # the omitted members enter through their mass tau: error^2 <= mu + 2 tau
    tau = max(rest_hi - enumerated, 0.0) + (lam.size + 2) * 4 * EPS * enumerated
    return mu * (1 - 8 * EPS), (mu + 2.0 * tau) * (1 + 8 * EPS)


def grid_app_error(mesh, kept: int, space: SpaceParams, tol: float = 1e-10) -> float:
    """Worst-case L2 error of the grid reconstruction keeping ``kept`` cosets.

    The error operator is block diagonal over cosets.  A dropped coset
    contributes its largest eigenvalue; a kept one the top eigenvalue of
    ``D + v v^T`` over its non-representative members.  Members below
    ``tol`` times the representative's eigenvalue are folded into an additive
    bound, and the returned value is the upper end of the enclosure.
    """
    mesh = _check_mesh(mesh, space)
    n_cosets = math.prod(mesh)
    if not 0 <= kept <= n_cosets:
        raise ValueError(f"kept must lie in 0..{n_cosets}")
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0, 1)")
    log_w = math.log(space.omega)
    if kept == 0:
        return 1.0
    axes = _axes(mesh, space)
    order, E = _coset_order(axes)
    best = math.exp(float(E[kept]) * log_w) if kept < n_cosets else 0.0
    best_lo = best

    kept_idx = order[:kept]
    residues = np.unravel_index(kept_idx, mesh)
    scale = np.exp(E[:kept] * log_w)
    rest = _rest_upper(axes, residues)
    upper = scale * 2.0 * rest
    by_upper = np.argsort(-upper, kind="stable")
    cut = math.log(1.0 / tol) / space.log_inv_omega

    def work(i):
        res = tuple(int(r[i]) for r in residues)
        lo, hi = _kept_coset_error(axes, res, cut, space.omega, float(rest[i]))
        return lo * scale[i], hi * scale[i]

    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        for start in range(0, kept, _BATCH):
            batch = by_upper[start : start + _BATCH]
            if upper[batch[0]] <= best_lo:
                break
            for lo, hi in pool.map(work, batch):
                best_lo = max(best_lo, lo)
                best = max(best, hi)
    return math.sqrt(best)


def grid_reconstruct(f: Callable, mesh, kept: int, space: SpaceParams) -> dict[tuple[int, ...], complex]:
    """Fourier coefficients produced by the grid algorithm for the function ``f``.

    ``f`` is evaluated on an (N, s) array of grid nodes and must return N values.
    """
    mesh = _check_mesh(mesh, space)
    axes_1d = [np.arange(m) / m for m in mesh]
    grids = np.meshgrid(*axes_1d, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    samples = np.asarray(f(nodes), dtype=complex).reshape(mesh)
    data = np.fft.fftn(samples) / math.prod(mesh)
    return {rep: complex(data[res]) for res, rep in kept_representatives(mesh, kept, space)}


# -- synthetic test functions -------------------------------------------------


class SynthFunction(NamedTuple):
    coefficients: dict
    norm: float
    evaluate: Callable


def space_norm(coefficients: dict, space: SpaceParams) -> float:
    """(sum |c_h|^2 omega^(-E(h)))^(1/2) for a finite coefficient map."""
    if not coefficients:
        return 0.0
    H = np.array(list(coefficients.keys()), dtype=np.int64).reshape(len(coefficients), space.s)
    c = np.array(list(coefficients.values()), dtype=complex)
    E = np.zeros(len(c))
    for j in range(space.s):
        E = E + axis_terms(space.a[j], space.b[j], np.abs(H[:, j]))
    return math.sqrt(math.fsum(np.abs(c) ** 2 * np.exp(E * space.log_inv_omega)))


def evaluator(coefficients: dict, s: int) -> Callable:
    """x -> sum_h c_h exp(2 pi i h.x), vectorized over the rows of x."""
    H = np.array(list(coefficients.keys()), dtype=np.int64).reshape(len(coefficients), s)
    c = np.array(list(coefficients.values()), dtype=complex)

    def f(x):
        X = np.atleast_2d(np.asarray(x, dtype=float))
        phase = X @ H.T.astype(float)
        phase -= np.floor(phase)
        return np.exp(2j * np.pi * phase) @ c

    return f


def synth_function(space: SpaceParams, support: int, seed: int) -> SynthFunction:
    """Random unit-norm trigonometric polynomial on the ``support`` largest eigenvalues."""
    if support < 1:
        raise ValueError("support must be at least 1")
    rng = np.random.default_rng(seed)
    H, E = smallest(support, space)
    c = rng.standard_normal(support) + 1j * rng.standard_normal(support)
    c *= np.exp(-0.5 * E * space.log_inv_omega)
    coeffs = {tuple(int(x) for x in h): complex(v) for h, v in zip(H, c)}
    norm = space_norm(coeffs, space)
    coeffs = {h: v / norm for h, v in coeffs.items()}
    return SynthFunction(coeffs, space_norm(coeffs, space), evaluator(coeffs, space.s))


def l2_distance(f_coeffs: dict, g_coeffs: dict) -> float:
    keys = set(f_coeffs) | set(g_coeffs)
    return math.sqrt(math.fsum(abs(f_coeffs.get(k, 0) - g_coeffs.get(k, 0)) ** 2 for k in keys))


# -- rate fitting -------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    """Parameters of e(n) = C q^((n/C1)^p) and the max log-log residual."""

    p_hat: float
    q_hat: float
    c_hat: float
    c1_hat: float
    residual: float

    def predict(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return self.c_hat * self.q_hat ** ((n / self.c1_hat) ** self.p_hat)

    def to_json(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "q_hat": self.q_hat,
            "c_hat": self.c_hat,
            "c1_hat": self.c1_hat,
            "residual": self.residual,
        }


def _regress(logn: np.ndarray, loge: np.ndarray, logc: float):
    y = np.log(logc - loge)
    slope, intercept = np.polyfit(logn, y, 1)
    resid = y - (slope * logn + intercept)
    return float(slope), float(intercept), resid


def fit_rate(series, fixC1: float | None = None) -> RateFit:
    """Fit e_n = C q^((n/C1)^p) by regressing log log(C/e) on log n.

    C starts at max(e) times Euler's number and is refined by minimizing the
    regression's relative residual 1 - R^2.  The slope is p.  Only q^(C1^-p) is
    identifiable, so q defaults to 1/e; with ``fixC1`` the base q is solved
    for instead.
    """
    pts = [(float(n), float(e)) for n, e in series]
    if len(pts) < 4:
        raise DegenerateSeries("need at least 4 (n, e) pairs")
    n = np.array([p[0] for p in pts])
    e = np.array([p[1] for p in pts])
    if np.any(n <= 0) or np.any(np.diff(n) <= 0):
        raise DegenerateSeries("n must be positive and strictly increasing")
    if np.any(np.diff(e) >= 0):
        raise DegenerateSeries("errors must be strictly decreasing")
    if np.any(e <= 0) or np.any(e >= 1):
        raise DegenerateSeries("errors must lie in (0, 1)")
    logn, loge = np.log(n), np.log(e)
    log_max = float(loge.max())

    def badness(logc):
        # 1 - R^2 is scale free; the raw residual shrinks as C grows without bound
        y = np.log(logc - loge)
        return float(np.sum(_regress(logn, loge, logc)[2] ** 2) / np.sum((y - y.mean()) ** 2))

    grid = log_max + np.geomspace(1e-6, 50.0, 200)
    scores = [badness(x) for x in grid]
    k = int(np.argmin(scores))
    best_logc, best_score = float(grid[k]), scores[k]
    start = log_max + 1.0
    if badness(start) <= best_score:
        best_logc, best_score = start, badness(start)
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(badness, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    if res.success and res.fun < best_score:
        best_logc = float(res.x)
    p, intercept, resid = _regress(logn, loge, best_logc)
    if fixC1 is None:
        q = math.exp(-1.0)
        c1 = math.exp(-intercept / p)
    else:
        c1 = float(fixC1)
        q = math.exp(-math.exp(intercept) * c1**p)
    return RateFit(p, q, math.exp(best_logc), c1, float(np.max(np.abs(resid))))


def plateau_ends(ns, errors, which: str = "right") -> list[tuple[int, float]]:
    """Collapse runs of equal errors to one point each (last or first n of the run)."""
    if which not in ("left", "right"):
        raise ValueError("which must be 'left' or 'right'")
    out: list[tuple[int, float]] = []
    for n, e in zip(ns, errors):
        if out and out[-1][1] == e:
            if which == "right":
                out[-1] = (n, e)
            continue
        out.append((n, e))
    return out


def minimal_error_series(n_max: int, space: SpaceParams) -> np.ndarray:
    """minimal_error_all(n) for n = 0..n_max from a single enumeration."""
    _, E = smallest(n_max + 1, space)
    return np.exp(0.5 * E * math.log(space.omega))
