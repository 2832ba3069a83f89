"""Weight sequences a = (a_j), b = (b_j) and their asymptotic invariants.

A :class:`WeightModel` pairs two sequence models.  Closed-form variants give
their limits exactly, per variant; explicit finite lists give ``Undefined``
limits instead of extrapolations.

The invariants used downstream are::

    A      = lim a_j / log j
    B      = sum_j 1/b_j          (B(s) for the partial sum)
    alpha* = liminf (log a_j) / j
    a*     = inf a_j = a_1,  b* = inf b_j
    lim a_j
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    DimensionMismatch,
    MonotonicityViolation,
    NonPositiveWeight,
    UndefinedAsymptotic,
    UndefinedModel,
)
from .series import EPS, Interval


class Kind(enum.Enum):
    ZERO = "zero"
    FINITE = "finite"
    INFINITE = "infinite"
    UNDEFINED = "undefined"


@dataclass(frozen=True)
class ExtReal:
    """Tagged extended real.  Finite values carry an enclosing interval."""

    kind: Kind
    lo: float | None = None
    hi: float | None = None

    @classmethod
    def zero(cls) -> "ExtReal":
        return cls(Kind.ZERO)

    @classmethod
    def inf(cls) -> "ExtReal":
        return cls(Kind.INFINITE)

    @classmethod
    def undefined(cls) -> "ExtReal":
        return cls(Kind.UNDEFINED)

    @classmethod
    def finite(cls, lo: float, hi: float | None = None) -> "ExtReal":
        hi = lo if hi is None else hi
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise ValueError(f"bad finite value [{lo}, {hi}]")
        return cls(Kind.FINITE, lo, hi)

    @property
    def is_zero(self) -> bool:
        return self.kind is Kind.ZERO

    @property
    def is_finite(self) -> bool:
        return self.kind in (Kind.ZERO, Kind.FINITE)

    @property
    def is_infinite(self) -> bool:
        return self.kind is Kind.INFINITE

    @property
    def is_defined(self) -> bool:
        return self.kind is not Kind.UNDEFINED

    def interval(self) -> Interval:
        if self.kind is Kind.ZERO:
            return Interval.point(0.0)
        if self.kind is Kind.FINITE:
            return Interval(self.lo, self.hi)
        raise UndefinedAsymptotic(f"no finite enclosure for {self.kind.value} value")

    def compare(self, x: float, rtol: float = 1e-12) -> str:
        """Compare against a finite threshold: 'lt', 'eq', 'gt' or 'unknown'.

        Values within ``rtol`` of ``x`` count as equal; an enclosure that
        straddles the band gives 'unknown'.
        """
        if self.kind is Kind.UNDEFINED:
            return "unknown"
        if self.kind is Kind.INFINITE:
            return "gt"
        lo, hi = (0.0, 0.0) if self.kind is Kind.ZERO else (self.lo, self.hi)
        band = rtol * abs(x)
        if lo > x + band:
            return "gt"
        if hi < x - band:
            return "lt"
        if lo >= x - band and hi <= x + band:
            return "eq"
        return "unknown"

    def to_json(self):
        if self.kind is Kind.FINITE:
            return {"kind": "finite", "lo": self.lo, "hi": self.hi}
        return {"kind": self.kind.value}

    def __str__(self) -> str:
        if self.kind is Kind.FINITE:
            if self.lo == self.hi:
                return repr(self.lo)
            return f"[{self.lo!r}, {self.hi!r}]"
        return self.kind.value


# ---------------------------------------------------------------------------
# sequence models


def _check_param(name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise UndefinedModel(f"parameter {name!r} must be a number, got {value!r}") from None
    if not math.isfinite(v):
        raise UndefinedModel(f"parameter {name!r} must be finite, got {value!r}")
    return v


@dataclass(frozen=True)
class Constant:
    c: float
    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "c", _check_param("c", self.c))

    def values(self, j: np.ndarray) -> np.ndarray:
        return np.full(j.shape, self.c, dtype=float)

    def nondecreasing(self) -> bool:
        return True

    def inf_from(self, j0: int) -> float:
        return self.c

    def limit(self) -> ExtReal:
        return ExtReal.finite(self.c)

    def log_ratio_limit(self) -> ExtReal:
        return ExtReal.zero()

    def alpha_star(self) -> ExtReal:
        return ExtReal.zero()

    def params(self) -> dict:
        return {"c": self.c}


@dataclass(frozen=True)
class LogGrowth:
    """c * log(j + 1) + offset."""

    c: float
    offset: float = 0.0
    kind = "log"

    def __post_init__(self):
        object.__setattr__(self, "c", _check_param("c", self.c))
        object.__setattr__(self, "offset", _check_param("offset", self.offset))

    def values(self, j: np.ndarray) -> np.ndarray:
        return self.c * np.log(j + 1.0) + self.offset

    def nondecreasing(self) -> bool:
        return self.c >= 0

    def inf_from(self, j0: int) -> float:
        if self.c < 0:
            return -math.inf
        return self.c * math.log(j0 + 1.0) + self.offset

    def limit(self) -> ExtReal:
        if self.c > 0:
            return ExtReal.inf()
        if self.c == 0:
            return ExtReal.finite(self.offset)
        return ExtReal.undefined()

    def log_ratio_limit(self) -> ExtReal:
        # (c log(j+1) + offset) / log j -> c
        if self.c > 0:
            return ExtReal.finite(self.c)
        if self.c == 0:
            return ExtReal.zero()
        return ExtReal.undefined()

    def alpha_star(self) -> ExtReal:
        return ExtReal.zero()

    def params(self) -> dict:
        return {"c": self.c, "offset": self.offset}


@dataclass(frozen=True)
class PolyGrowth:
    """c * j**gamma."""

    c: float
    gamma: float
    kind = "poly"

    def __post_init__(self):
        object.__setattr__(self, "c", _check_param("c", self.c))
        object.__setattr__(self, "gamma", _check_param("gamma", self.gamma))

    def values(self, j: np.ndarray) -> np.ndarray:
        return self.c * j.astype(float) ** self.gamma

    def nondecreasing(self) -> bool:
        return self.c >= 0 and self.gamma >= 0

    def inf_from(self, j0: int) -> float:
        if self.gamma < 0:
            return 0.0 if self.c > 0 else -math.inf
        return self.c * float(j0) ** self.gamma

    def limit(self) -> ExtReal:
        if self.gamma > 0:
            return ExtReal.inf()
        if self.gamma == 0:
            return ExtReal.finite(self.c)
        return ExtReal.zero()

    def log_ratio_limit(self) -> ExtReal:
        return ExtReal.inf() if self.gamma > 0 else ExtReal.zero()

    def alpha_star(self) -> ExtReal:
        return ExtReal.zero()

    def params(self) -> dict:
        return {"c": self.c, "gamma": self.gamma}


@dataclass(frozen=True)
class ExpGrowth:
    """c * beta**j."""

    c: float
    beta: float
    kind = "exp"

    def __post_init__(self):
        object.__setattr__(self, "c", _check_param("c", self.c))
        object.__setattr__(self, "beta", _check_param("beta", self.beta))
        if self.beta <= 0:
            raise UndefinedModel(f"ExpGrowth needs beta > 0, got {self.beta}")

    def values(self, j: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return self.c * self.beta ** j.astype(float)

    def nondecreasing(self) -> bool:
        return self.c >= 0 and self.beta >= 1

    def inf_from(self, j0: int) -> float:
        if self.beta < 1:
            return 0.0 if self.c > 0 else -math.inf
        return self.c * self.beta**j0

    def limit(self) -> ExtReal:
        if self.beta > 1:
            return ExtReal.inf()
        if self.beta == 1:
            return ExtReal.finite(self.c)
        return ExtReal.zero()

    def log_ratio_limit(self) -> ExtReal:
        return ExtReal.inf() if self.beta > 1 else ExtReal.zero()

    def alpha_star(self) -> ExtReal:
        # (log c + j log beta) / j -> log beta
        if self.beta > 1:
            return ExtReal.finite(math.log(self.beta))
        return ExtReal.zero()

    def params(self) -> dict:
        return {"c": self.c, "beta": self.beta}


@dataclass(frozen=True)
class Explicit:
    """A finite list; limits are undefined."""

    values_: tuple[float, ...]
    kind = "explicit"

    def __post_init__(self):
        vals = tuple(_check_param("values", v) for v in self.values_)
        if not vals:
            raise UndefinedModel("explicit list must not be empty")
        object.__setattr__(self, "values_", vals)

    def values(self, j: np.ndarray) -> np.ndarray:
        if j.size and j.max() > len(self.values_):
            raise DimensionMismatch(
                f"explicit list has {len(self.values_)} entries, index {int(j.max())} requested"
            )
        return np.array([self.values_[i - 1] for i in j.astype(int)], dtype=float)

    def nondecreasing(self) -> bool:
        return all(x <= y for x, y in zip(self.values_, self.values_[1:]))

    def inf_from(self, j0: int) -> float:
        rest = self.values_[j0 - 1:]
        return min(rest) if rest else math.inf

    def limit(self) -> ExtReal:
        return ExtReal.undefined()

    def log_ratio_limit(self) -> ExtReal:
        return ExtReal.undefined()

    def alpha_star(self) -> ExtReal:
        return ExtReal.undefined()

    def params(self) -> dict:
        return {"values": list(self.values_)}


SequenceModel = Union[Constant, LogGrowth, PolyGrowth, ExpGrowth, Explicit]

_KINDS = {
    "constant": (Constant, ("c",)),
    "log": (LogGrowth, ("c", "offset")),
    "poly": (PolyGrowth, ("c", "gamma")),
    "exp": (ExpGrowth, ("c", "beta")),
    "explicit": (Explicit, ("values",)),
}


def sequence_from_json(obj) -> SequenceModel:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise UndefinedModel(f"sequence model must be an object with a 'kind', got {obj!r}")
    kind = obj["kind"]
    if kind not in _KINDS:
        raise UndefinedModel(f"unknown sequence kind {kind!r}; expected one of {sorted(_KINDS)}")
    cls, names = _KINDS[kind]
    extra = set(obj) - {"kind", *names}
    if extra:
        raise UndefinedModel(f"unknown keys for {kind!r} model: {sorted(extra)}")
    if kind == "explicit":
        vals = obj.get("values")
        if not isinstance(vals, list):
            raise UndefinedModel("explicit model needs a 'values' list")
        return Explicit(tuple(vals))
    required = names[:1] if kind == "log" else names
    missing = [n for n in required if n not in obj]
    if missing:
        raise UndefinedModel(f"{kind!r} model missing {missing}")
    return cls(**{n: obj[n] for n in names if n in obj})


def sequence_to_json(seq: SequenceModel) -> dict:
    return {"kind": seq.kind, **seq.params()}


# ---------------------------------------------------------------------------
# weight model


@dataclass(frozen=True)
class WeightModel:
    """Two sequence models plus optional explicit prefixes overriding their first terms."""

    a: SequenceModel
    b: SequenceModel
    explicit_a: tuple[float, ...] = ()
    explicit_b: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "explicit_a", tuple(_check_param("explicit_a", v) for v in self.explicit_a))
        object.__setattr__(self, "explicit_b", tuple(_check_param("explicit_b", v) for v in self.explicit_b))

    @classmethod
    def from_sequences(cls, a, b) -> "WeightModel":
        """Explicit model from finite lists (the usual way to build test spaces)."""
        return validate(cls(Explicit(tuple(a)), Explicit(tuple(b))))

    @classmethod
    def from_json(cls, obj) -> "WeightModel":
        if not isinstance(obj, dict):
            raise UndefinedModel("weight model must be a JSON object")
        extra = set(obj) - {"a", "b", "explicit_a", "explicit_b"}
        if extra:
            raise UndefinedModel(f"unknown keys in weight model: {sorted(extra)}")
        for key in ("a", "b"):
            if key not in obj:
                raise UndefinedModel(f"weight model missing {key!r}")
        return cls(
            sequence_from_json(obj["a"]),
            sequence_from_json(obj["b"]),
            tuple(obj.get("explicit_a", ())),
            tuple(obj.get("explicit_b", ())),
        )

    def to_json(self) -> dict:
        out = {"a": sequence_to_json(self.a), "b": sequence_to_json(self.b)}
        if self.explicit_a:
            out["explicit_a"] = list(self.explicit_a)
        if self.explicit_b:
            out["explicit_b"] = list(self.explicit_b)
        return out

    @property
    def max_dimension(self) -> float:
        """Largest s for which a prefix exists (inf for closed forms)."""
        dims = [len(seq.values_) for seq in (self.a, self.b) if isinstance(seq, Explicit)]
        return min(dims) if dims else math.inf


def _expand(seq: SequenceModel, override: tuple[float, ...], s: int) -> np.ndarray:
    j = np.arange(1, s + 1)
    k = min(len(override), s)
    out = np.empty(s, dtype=float)
    out[:k] = override[:k]
    if s > k:
        out[k:] = seq.values(j[k:])
    return out


def _closed_inf(seq: SequenceModel, override: tuple[float, ...]) -> float:
    tail = seq.inf_from(len(override) + 1)
    return min([tail, *override])


def validate(model: WeightModel) -> WeightModel:
    """Normalize a model: sort explicit a-lists, check positivity and ordering."""
    a, explicit_a = model.a, model.explicit_a
    if isinstance(a, Explicit):
        a = Explicit(tuple(sorted(a.values_)))
    explicit_a = tuple(sorted(explicit_a))
    model = WeightModel(a, model.b, explicit_a, model.explicit_b)

    # a: a_1 > 0 and nondecreasing, including the junction after the override
    k = len(explicit_a)
    first = explicit_a[0] if k else float(a.values(np.array([1]))[0])
    if not first > 0:
        raise NonPositiveWeight(f"a_1 must be positive, got {first}")
    if not a.nondecreasing():
        raise MonotonicityViolation(f"{a.kind} a-model with {a.params()} is not nondecreasing")
    if k and not (isinstance(a, Explicit) and len(a.values_) <= k):
        nxt = float(a.values(np.array([k + 1]))[0])
        if explicit_a[-1] > nxt:
            raise MonotonicityViolation(
                f"explicit a-prefix ends at {explicit_a[-1]} but the closed form continues with a_{k + 1} = {nxt}"
            )

    # b: inf b_j > 0
    b_inf = _closed_inf(model.b, model.explicit_b)
    if not b_inf > 0:
        raise NonPositiveWeight(f"inf b_j must be positive, got {b_inf}")
    return model


def prefix(model: WeightModel, s: int) -> tuple[np.ndarray, np.ndarray]:
    """(a_1..a_s, b_1..b_s); explicit overrides take precedence."""
    if s < 1:
        raise DimensionMismatch(f"dimension must be >= 1, got {s}")
    if s > model.max_dimension:
        raise DimensionMismatch(f"model defines only {model.max_dimension} coordinates, s={s} requested")
    a = _expand(model.a, model.explicit_a, s)
    b = _expand(model.b, model.explicit_b, s)
    if not a[0] > 0:
        raise NonPositiveWeight(f"a_1 must be positive, got {a[0]}")
    if np.any(np.diff(a) < 0):
        raise MonotonicityViolation("generated a-prefix is not nondecreasing")
    if np.any(b <= 0) or not np.all(np.isfinite(b)):
        raise NonPositiveWeight("generated b-prefix has a nonpositive or non-finite entry")
    return a, b


# ---------------------------------------------------------------------------
# asymptotics


def _zeta_tail(gamma: float, j0: int, tol: float) -> Interval:
    """Enclosure of sum_{j >= j0} j**(-gamma) for gamma > 1.

    Exact partial sum up to N, then convexity bounds on the remainder:
    trapezoid from below, midpoint from above.
    """
    n_terms = 1024
    while True:
        N = j0 + n_terms - 1
        j = np.arange(j0, N + 1, dtype=float)
        partial = math.fsum(j**-gamma)
        g1 = gamma - 1.0
        f_next = (N + 1.0) ** -gamma
        lo_tail = (N + 1.0) ** -g1 / g1 + 0.5 * f_next
        hi_tail = (N + 0.5) ** -g1 / g1
        # fsum is correctly rounded; each power carries a relative error below 2 eps
        slack = 4 * EPS * (partial + hi_tail)
        if hi_tail - lo_tail + 2 * slack <= tol or n_terms >= 1 << 24:
            return Interval(partial + lo_tail - slack, partial + hi_tail + slack)
        n_terms *= 4


def _reciprocal_tail(seq: SequenceModel, j0: int, tol: float) -> ExtReal:
    """sum_{j >= j0} 1 / b_j for a closed-form b-model."""
    if isinstance(seq, PolyGrowth) and seq.gamma > 1:
        iv = _zeta_tail(seq.gamma, j0, tol * seq.c)
        return ExtReal.finite(iv.lo / seq.c, iv.hi / seq.c)
    if isinstance(seq, ExpGrowth) and seq.beta > 1:
        # geometric: beta^(-j0) / (c (1 - 1/beta))
        val = seq.beta ** (-j0) / (seq.c * (1.0 - 1.0 / seq.beta))
        return ExtReal.finite(val * (1 - 8 * EPS), val * (1 + 8 * EPS))
    return ExtReal.inf()


@dataclass(frozen=True)
class Asymptotics:
    """Invariants of a weight model.  ``B_partial`` holds B(s) for the requested s."""

    A: ExtReal
    B: ExtReal
    alpha_star: ExtReal
    a_star: float
    b_star: float
    a_limit: ExtReal
    s: int
    B_partial: float
    B_tail: ExtReal = field(default_factory=ExtReal.undefined)  # sum_{j > s} 1/b_j

    def require(self, name: str) -> ExtReal:
        value = getattr(self, name)
        if not value.is_defined:
            raise UndefinedAsymptotic(f"{name} is undefined for this weight model")
        return value

    def to_json(self) -> dict:
        return {
            "A": self.A.to_json(),
            "B": self.B.to_json(),
            "alpha_star": self.alpha_star.to_json(),
            "a_star": self.a_star,
            "b_star": self.b_star,
            "lim_a": self.a_limit.to_json(),
            "s": self.s,
            "B_partial": self.B_partial,
        }


def asymptotics(model: WeightModel, s: int = 1, tol: float = 1e-12) -> Asymptotics:
    """Exact invariants per closed-form variant; ``Undefined`` limits for finite lists.

    ``B`` is an enclosure of width at most ``tol`` when finite.
    """
    a_vals, b_vals = prefix(model, s)
    B_partial = math.fsum(1.0 / b_vals)
    a_star = float(model.explicit_a[0]) if model.explicit_a else float(model.a.values(np.array([1]))[0])
    b_star = _closed_inf(model.b, model.explicit_b)

    b_seq, a_seq = model.b, model.a
    if isinstance(b_seq, Explicit):
        B = B_tail = ExtReal.undefined()
    else:
        k = len(model.explicit_b)
        head = math.fsum(1.0 / v for v in model.explicit_b)
        tail = _reciprocal_tail(b_seq, k + 1, tol)
        if tail.is_infinite:
            B = ExtReal.inf()
        else:
            slack = (k + 1) * EPS * head
            B = ExtReal.finite(head + tail.lo - slack, head + tail.hi + slack)
        if s >= k:
            B_tail = _reciprocal_tail(b_seq, s + 1, tol)
        else:
            rest = math.fsum(1.0 / v for v in model.explicit_b[s:])
            t = _reciprocal_tail(b_seq, k + 1, tol)
            B_tail = t if t.is_infinite else ExtReal.finite(rest + t.lo, rest + t.hi)

    return Asymptotics(
        A=a_seq.log_ratio_limit(),
        B=B,
        alpha_star=a_seq.alpha_star(),
        a_star=a_star,
        b_star=b_star,
        a_limit=a_seq.limit(),
        s=s,
        B_partial=B_partial,
        B_tail=B_tail,
    )
