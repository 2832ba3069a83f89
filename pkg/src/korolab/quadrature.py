"""Worst-case integration errors, grid rules and the s-point lower bound.

For a rule Q(f) = sum_k q_k f(x_k) the squared worst-case error has two
equivalent forms:

    kernel form:    1 - 2 Re sum_k q_k + sum_{k,l} q_k conj(q_l) K(x_k, x_l)
    spectral form:  sum_h omega_h |delta_{h,0} - sum_k q_k exp(2 pi i h.x_k)|^2

The kernel form is cheap but loses everything below roughly 1e-16 * K(x, x)
to cancellation.  :func:`wce` uses it when its rounding estimate allows and
switches to the spectral form (a sum of nonnegative terms with a certified
tail) otherwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, NegativeRadicand, SingularSystem, SpectrumOverflow
from .kernel import gram_matrix
from .series import EPS, Interval, progression_sum
from .spectrum import SpaceParams, count_leq, points_leq, trace_tau

RADICAND_CLAMP = 1e-10


@dataclass(frozen=True)
class CubatureRule:
    """Nodes in [0,1)^s with complex coefficients."""

    nodes: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        coeffs = np.asarray(self.coefficients, dtype=complex).reshape(-1)
        if nodes.shape[0] != coeffs.size:
            raise DimensionMismatch(f"{nodes.shape[0]} nodes but {coeffs.size} coefficients")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def empty(cls, s: int) -> "CubatureRule":
        """The zero algorithm."""
        return cls(np.zeros((0, s)), np.zeros(0, dtype=complex))

    @classmethod
    def qmc(cls, nodes) -> "CubatureRule":
        nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
        n = nodes.shape[0]
        return cls(nodes, np.full(n, 1.0 / n, dtype=complex))

    @property
    def n(self) -> int:
        return self.coefficients.size

    @property
    def s(self) -> int:
        return self.nodes.shape[1]

    def apply(self, f) -> complex:
        """Q(f) for a callable taking an (n, s) array of points."""
        if self.n == 0:
            return 0j
        return complex(np.sum(self.coefficients * np.asarray(f(self.nodes))))

    def shifted(self, delta) -> "CubatureRule":
        shifted = self.nodes + np.asarray(delta, dtype=float)
        return CubatureRule(shifted - np.floor(shifted), self.coefficients)


@dataclass(frozen=True)
class GridRule:
    """Equal-weight rule on the grid (k_1/m_1, ..., k_s/m_s), anchored at 0."""

    mesh: tuple[int, ...]

    def __post_init__(self):
        mesh = tuple(int(m) for m in self.mesh)
        if not mesh or any(m < 1 for m in mesh):
            raise ValueError(f"mesh sizes must be >= 1, got {self.mesh}")
        object.__setattr__(self, "mesh", mesh)

    @property
    def n(self) -> int:
        return math.prod(self.mesh)

    def nodes(self) -> np.ndarray:
        axes = [np.arange(m) / m for m in self.mesh]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def to_rule(self) -> CubatureRule:
        return CubatureRule(self.nodes(), np.full(self.n, 1.0 / self.n, dtype=complex))


# ---------------------------------------------------------------------------
# worst-case errors


def _coefficient_sum(q: np.ndarray) -> complex:
    return complex(math.fsum(q.real), math.fsum(q.imag))


def _kernel_radicand(rule: CubatureRule, space: SpaceParams, tol: float) -> tuple[float, float]:
    """Kernel-form radicand and an estimate of its absolute error."""
    q = rule.coefficients
    n = rule.n
    K, entry_err = gram_matrix(rule.nodes, space, tol / n**2)
    Kt = K - 1.0
    qs = _coefficient_sum(q)
    head = (1.0 - qs.real) ** 2 + qs.imag**2
    quad = float(np.real(q @ (Kt @ np.conj(q))))
    qabs = float(np.abs(q).sum())
    kmax = float(np.abs(K).max())
    err = qabs**2 * (entry_err + (2 * n + 8) * EPS * kmax) + 4 * EPS * head
    return head + quad, err


def _fourier_sums(H: np.ndarray, X: np.ndarray, q: np.ndarray) -> np.ndarray:
    """sum_k q_k exp(2 pi i h.x_k) for each row h of H."""
    out = np.empty(H.shape[0], dtype=complex)
    batch = max(1, 2_000_000 // max(X.shape[0], 1))
    for start in range(0, H.shape[0], batch):
        Hb = H[start : start + batch]
        phase = np.zeros((Hb.shape[0], X.shape[0]))
        for j in range(X.shape[1]):
            p = np.multiply.outer(Hb[:, j].astype(float), X[:, j])
            phase += p - np.floor(p)
        phase -= np.floor(phase)
        out[start : start + batch] = np.exp(2j * np.pi * phase) @ q
    return out


def spectral_radicand(
    rule: CubatureRule,
    space: SpaceParams,
    rtol: float = 1e-12,
    guess: float = 1e-16,
    max_frequencies: int = 4_000_000,
) -> Interval:
    """Enclosure of the squared worst-case error from the spectral form.

    Sums omega_h |delta_{h,0} - Q(c_h)|^2 over E(h) <= T and bounds the rest
    by (1 + sum|q|)^2 * omega^(T/2) * trace(1/2).
    """
    X = rule.nodes - np.floor(rule.nodes)
    q = rule.coefficients
    C = (1.0 + float(np.abs(q).sum())) ** 2 * trace_tau(space, 0.5).hi
    L = space.log_inv_omega
    est = max(guess, 1e-300)
    S = 0.0
    for _ in range(8):
        T = max(math.log(C / (rtol * est)) / (0.5 * L), 0.0)
        if count_leq(T, space) > max_frequencies:
            raise SpectrumOverflow(f"spectral worst-case error needs more than {max_frequencies} frequencies")
        H, E = points_leq(T, space)
        Q = _fourier_sums(H, X, q)
        Q[np.all(H == 0, axis=1)] -= 1.0
        S = math.fsum(np.exp(-E * L) * np.abs(Q) ** 2)
        tail = C * math.exp(-0.5 * L * T)
        if tail <= rtol * S or S == 0.0 and tail < 1e-300:
            return Interval(S, S + tail)
        est = S if S > 0 else est * 1e-30
    return Interval(S, S + tail)


def wce(
    rule: CubatureRule,
    space: SpaceParams,
    tol: float = 1e-12,
    rtol: float = 1e-9,
    spectral_rtol: float = 1e-13,
) -> float:
    """Worst-case integration error of ``rule``; the empty rule gives 1.

    The kernel form is used when its certified error bound is within ``rtol``
    of the radicand.  The bound assumes worst-case rounding and is typically
    far above the actual error, so the spectral form is only needed when the
    radicand is tiny and cancellation dominates; it is then summed to
    relative accuracy ``spectral_rtol``.
    """
    if rule.n == 0:
        return 1.0
    if rule.s != space.s:
        raise DimensionMismatch(f"rule has dimension {rule.s}, space has s={space.s}")
    rad, err = _kernel_radicand(rule, space, tol)
    if rad < -RADICAND_CLAMP:
        raise NegativeRadicand(f"worst-case error radicand {rad:.3e} is negative; kernel tolerance too loose?")
    if rad > 0 and err <= rtol * rad:
        return math.sqrt(rad)
    try:
        iv = spectral_radicand(rule, space, spectral_rtol, guess=max(rad, err * 1e-6))
    except SpectrumOverflow:
        warnings.warn("spectral refinement too large; returning the kernel-form value", RuntimeWarning)
        return math.sqrt(max(rad, 0.0))
    return math.sqrt(iv.lo + 0.5 * iv.width)


def _grid_factor_sums(mesh, space: SpaceParams, rtol: float = 1e-15) -> list[Interval]:
    """Enclosures of S_j = sum_{t>=1} omega**(a_j (t m_j)**b_j)."""
    L = space.log_inv_omega
    out = []
    for m, a, b in zip(mesh, space.a, space.b):
        lam = float(a) * L * float(m) ** float(b)
        out.append(progression_sum(lam, float(b), 1.0, 1.0, rtol=rtol).interval())
    return out


def grid_squared_error(mesh, space: SpaceParams) -> Interval:
    """prod_j (1 + 2 S_j) - 1, evaluated without cancellation."""
    mesh = tuple(mesh)
    if len(mesh) != space.s:
        raise DimensionMismatch(f"mesh has {len(mesh)} entries, space has s={space.s}")
    sums = _grid_factor_sums(mesh, space)
    lo = math.expm1(math.fsum(math.log1p(2 * iv.lo) for iv in sums))
    hi = math.expm1(math.fsum(math.log1p(2 * iv.hi) for iv in sums))
    slack = 4 * len(mesh) * EPS
    return Interval(lo * (1 - slack), hi * (1 + slack))


def wce_grid(mesh, space: SpaceParams, tol: float = 1e-14) -> float:
    """Worst-case error of the grid rule with the given mesh (aliasing closed form)."""
    iv = grid_squared_error(mesh, space)
    return math.sqrt(iv.mid)


def optimize_grid(budget: int, space: SpaceParams) -> GridRule:
    """Greedy mesh design by repeated doubling of the most profitable coordinate."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    mesh = [1] * space.s
    current = grid_squared_error(mesh, space).mid
    while 2 * math.prod(mesh) <= budget:
        best_j, best_err = None, None
        for j in range(space.s):
            trial = list(mesh)
            trial[j] *= 2
            err = grid_squared_error(trial, space).mid
            if best_err is None or current - err > current - best_err:
                best_j, best_err = j, err
        mesh[best_j] *= 2
        current = best_err
    return GridRule(tuple(mesh))


def mc_mean_bound(n: int, space: SpaceParams) -> float:
    """sqrt(trace(W_s) / n): upper bound on the n-th minimal integration error."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(trace_tau(space, 1.0).hi / n)


# ---------------------------------------------------------------------------
# lower bound certificate


@dataclass(frozen=True)
class LowerBoundCertificate:
    """Fooling function f = sum_j alpha_j c_{h(j)} vanishing at the given points.

    h(0) = 0 and h(j) is the j-th unit vector.  ``bound`` is the certified
    lower bound on e(s, s) from the norm estimate; ``exact_bound`` uses the
    exact norm of |f|^2.
    """

    alpha: np.ndarray
    points: np.ndarray
    bound: float
    exact_bound: float
    residual: float
    omega: float = field(repr=False, default=0.5)

    def fooling(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        basis = np.concatenate([np.ones((x.shape[0], 1)), np.exp(2j * np.pi * x)], axis=1)
        return basis @ self.alpha

    def to_json(self) -> dict:
        return {
            "alpha": [[float(z.real), float(z.imag)] for z in self.alpha],
            "points": self.points.tolist(),
            "bound": self.bound,
            "exact_bound": self.exact_bound,
            "residual": self.residual,
        }


def closed_form_lower_bound(space: SpaceParams) -> float:
    """omega**a_s / sqrt(1 + omega**(2 a_s))."""
    w = space.omega ** float(space.a[-1])
    return w / math.sqrt(1.0 + w * w)


def lower_bound_certificate(points, space: SpaceParams, null_tol: float = 1e-12) -> LowerBoundCertificate:
    """Certificate that no s-point rule integrates better than ``bound``."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    s = space.s
    if X.shape != (s, s):
        raise DimensionMismatch(f"need exactly s={s} points of dimension {s}, got shape {X.shape}")
    M = np.concatenate([np.ones((s, 1)), np.exp(2j * np.pi * X)], axis=1)
    _, sv, vh = linalg.svd(M)
    alpha = np.conj(vh[-1])
    alpha = alpha / np.linalg.norm(alpha)
    residual = float(np.abs(M @ alpha).max())
    scale = max(float(sv[0]), 1.0) if sv.size else 1.0
    if residual > null_tol * scale * (s + 1):
        raise SingularSystem(f"null-space residual {residual:.3e} above tolerance")

    w_inv = np.concatenate([[1.0], space.omega ** -space.a.astype(float)])
    p = np.abs(alpha) ** 2 * w_inv
    total = math.fsum(p)
    bound = 1.0 / math.sqrt(1.0 + total * total)
    exact_sq = 1.0 + math.fsum(p * (total - p))
    exact_bound = 1.0 / math.sqrt(exact_sq)
    return LowerBoundCertificate(alpha, X, bound, exact_bound, residual, space.omega)
