"""Command-line front end.

Exit codes: 0 success, 2 configuration error (bad flags, unreadable or
invalid space file), 3 numeric failure (spectrum overflow, negative
radicand, degenerate fit).  Results go to ``--out`` (written atomically) or
to stdout.  ``KOROLAB_THREADS`` caps worker threads.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click
import numpy as np

from . import approx, quadrature, tractability
from .errors import (
    DegenerateSeries,
    DimensionMismatch,
    NegativeRadicand,
    SingularSystem,
    SpectrumOverflow,
    UndefinedAsymptotic,
    WeightError,
)
from .kernel import kernel
from .spectrum import SpaceParams
from .weights import WeightModel, asymptotics

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
DEFAULT_OMEGA = 0.5
SPACE_KEYS = {"a", "b", "explicit_a", "explicit_b", "omega", "s"}


class ConfigError(Exception):
    pass


class NumericError(Exception):
    pass


# -- configuration ------------------------------------------------------------


@dataclass
class RunConfig:
    """Everything that determines a run; round-trips through JSON."""

    command: str
    space: str | None = None
    omega: float | None = None
    s: int | None = None
    out: str | None = None
    tol: float | None = None
    seed: int = 0
    options: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError("run config must be a JSON object")
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown run config keys: {sorted(unknown)}")
        if "command" not in obj:
            raise ConfigError("run config missing 'command'")
        return cls(**obj)


def load_space(cfg: RunConfig) -> tuple[WeightModel, float, int]:
    """Weight model, omega and dimension from the space file and flags (flags win)."""
    if cfg.space is None:
        raise ConfigError("--space is required")
    try:
        raw = json.loads(Path(cfg.space).read_text())
    except OSError as exc:
        raise ConfigError(f"--space: cannot read {cfg.space}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--space: malformed JSON in {cfg.space}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("--space: top level must be a JSON object")
    unknown = set(raw) - SPACE_KEYS
    if unknown:
        raise ConfigError(f"--space: unknown keys {sorted(unknown)}")
    omega = cfg.omega if cfg.omega is not None else raw.get("omega", DEFAULT_OMEGA)
    try:
        model = WeightModel.from_json({k: v for k, v in raw.items() if k not in ("omega", "s")})
        omega = float(omega)
    except (WeightError, TypeError, ValueError) as exc:
        raise ConfigError(f"--space: {exc}") from exc
    if not 0.0 < omega < 1.0:
        raise ConfigError(f"omega: must lie in (0, 1), got {omega}")
    s = cfg.s if cfg.s is not None else raw.get("s")
    if s is None:
        s = model.max_dimension if math.isfinite(model.max_dimension) else 1
    if not isinstance(s, int) or s < 1:
        raise ConfigError(f"s: must be a positive integer, got {s!r}")
    return model, omega, s


def make_space(model: WeightModel, omega: float, s: int) -> SpaceParams:
    try:
        return SpaceParams(s, omega, model)
    except (WeightError, DimensionMismatch) as exc:
        raise ConfigError(f"s: {exc}") from exc


def parse_ints(text: str, name: str) -> list[int]:
    """Comma-separated integers; ``a:b`` and ``a:b:step`` expand to inclusive ranges."""
    out: list[int] = []
    try:
        for tok in text.split(","):
            tok = tok.strip()
            if ":" in tok:
                parts = [int(p) for p in tok.split(":")]
                if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] < 1):
                    raise ValueError(tok)
                step = parts[2] if len(parts) == 3 else 1
                out.extend(range(parts[0], parts[1] + 1, step))
            elif tok:
                out.append(int(tok))
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {text!r}") from exc
    if not out:
        raise ConfigError(f"{name}: empty list")
    return out


def parse_dim(text: str | None) -> int | None:
    if text is None:
        return None
    vals = parse_ints(text, "--s")
    if len(vals) != 1:
        raise ConfigError("--s: expected a single dimension")
    return vals[0]


def parse_floats(text: str, name: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {text!r}") from exc
    if not vals:
        raise ConfigError(f"{name}: empty list")
    return vals


def read_matrix(path: str, name: str) -> tuple[list[str], np.ndarray]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"{name}: cannot read {path}: {exc.strerror}") from exc
    rows = [r for r in rows if r and not r[0].startswith("#")]
    if not rows:
        raise ConfigError(f"{name}: {path} is empty")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{name}: non-numeric entry in {path}") from exc
    if data.size and data.shape[1] != len(header):
        raise ConfigError(f"{name}: rows do not match the header in {path}")
    return header, data.reshape(-1, len(header))


# -- output -------------------------------------------------------------------


def fmt(x: float) -> str:
    """Shortest round-trip decimal form of a double."""
    return repr(float(x))


def emit(text: str, out: str | None) -> None:
    """Write to ``out`` atomically (temp file + rename), or to stdout."""
    if out is None:
        click.echo(text, nl=False)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def guarded(fn):
    """Map library exceptions onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except (WeightError, DimensionMismatch) as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except (
            NumericError,
            SpectrumOverflow,
            NegativeRadicand,
            SingularSystem,
            DegenerateSeries,
            UndefinedAsymptotic,
            OverflowError,
            MemoryError,
            ArithmeticError,
        ) as exc:
            click.echo(f"numeric error: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)

    return wrapper


def space_options(fn):
    fn = click.option("--seed", type=int, default=0, show_default=True, help="Seed for synthetic data.")(fn)
    fn = click.option("--tol", type=float, default=None, help="Tolerance override.")(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout).")(fn)
    fn = click.option("--omega", type=float, default=None, help="Base omega in (0, 1); overrides the space file.")(fn)
    fn = click.option("--s", "s", default=None, help="Dimension (a list for 'complexity'); overrides the space file.")(fn)
    fn = click.option("--space", type=click.Path(dir_okay=False), default=None, help="Space definition (JSON).")(fn)
    return fn


# -- commands -----------------------------------------------------------------


@click.group()
def main():
    """Worst-case errors, complexity and tractability for analytic Korobov spaces."""


@main.command()
@space_options
@guarded
def analyze(space, s, omega, out, tol, seed):
    """Tractability reports for both problems and information classes."""
    cfg = RunConfig("analyze", space, omega, parse_dim(s), out, tol, seed)
    model, omega, s = load_space(cfg)
    reports = tractability.classify_all(model, omega, s)
    targets = tractability.rate_targets(model, s)
    result = {
        "config": cfg.to_json(),
        "space": model.to_json(),
        "omega": omega,
        "s": s,
        "asymptotics": asymptotics(model, s).to_json(),
        "rate_targets": {"p_star_s": targets["p_star_s"], "p_star": targets["p_star"].to_json()},
        "reports": [r.to_json() for r in reports.values()],
    }
    emit(dump_json(result), out)


def _convergence_rows(strategy: str, ns: list[int], space: SpaceParams) -> list[tuple[int, float]]:
    rows = []
    if strategy == "spectral-app":
        errs = approx.minimal_error_series(max(ns), space)
        rows = [(n, float(errs[n])) for n in ns]
    else:
        for n in ns:
            grid = quadrature.optimize_grid(n, space)
            rows.append((n, quadrature.wce_grid(grid.mesh, space)))
    for n, e in rows:
        if not math.isfinite(e):
            raise NumericError(f"error evaluation at n={n} is not finite")
    return rows


def _fit(rows):
    pts = approx.plateau_ends([n for n, _ in rows if n > 0], [e for n, e in rows if n > 0], "left")
    pts = [(n, e) for n, e in pts if 0 < e < 1]
    try:
        return approx.fit_rate(pts)
    except DegenerateSeries:
        return None


@main.command()
@space_options
@click.option("--strategy", type=click.Choice(["grid-int", "spectral-app"]), required=True)
@click.option("--n", "n_list", required=True, help="Strictly increasing n values, e.g. 1,2,4 or 1:2000.")
@click.option("--figure", type=click.Path(dir_okay=False), default=None, help="Also save a plot here.")
@guarded
def convergence(space, s, omega, out, tol, seed, strategy, n_list, figure):
    """Error against n, with the fitted exponential rate in footer comments."""
    cfg = RunConfig("convergence", space, omega, parse_dim(s), out, tol, seed, {"strategy": strategy, "n": n_list})
    model, omega, s = load_space(cfg)
    sp = make_space(model, omega, s)
    ns = parse_ints(n_list, "--n")
    if any(n < 0 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("--n: values must be nonnegative and strictly increasing")
    rows = _convergence_rows(strategy, ns, sp)
    fit = _fit(rows)
    buf = io.StringIO()
    buf.write("n,error\n")
    for n, e in rows:
        buf.write(f"{n},{fmt(e)}\n")
    buf.write(f"# p_hat={fmt(fit.p_hat) if fit else 'nan'}\n")
    buf.write(f"# p_target={fmt(1.0 / asymptotics(model, s).B_partial)}\n")
    emit(buf.getvalue(), out)
    if figure:
        from .plotting import plot_convergence

        plot_convergence(rows, figure, fit, title=f"{strategy}, s = {s}")


@main.command()
@space_options
@click.option("--eps", "eps_list", required=True, help="Comma-separated eps values in (0, 1].")
@click.option("--figure", type=click.Path(dir_okay=False), default=None, help="Also save a plot here.")
@guarded
def complexity(space, s, omega, out, tol, seed, eps_list, figure):
    """Information complexity n(eps, s) for arbitrary linear information."""
    dims = sorted(set(parse_ints(s, "--s"))) if s is not None else None
    cfg = RunConfig("complexity", space, omega, dims[-1] if dims else None, out, tol, seed, {"eps": eps_list, "s": s})
    model, omega, s_default = load_space(cfg)
    dims = dims or [s_default]
    if dims[0] < 1:
        raise ConfigError("--s: dimensions must be positive")
    eps_vals = parse_floats(eps_list, "--eps")
    if any(not 0.0 < e <= 1.0 for e in eps_vals):
        raise ConfigError("--eps: values must lie in (0, 1]")
    buf = io.StringIO()
    buf.write("s,eps,n\n")
    rows, overflow = [], False
    for d in dims:
        sp = make_space(model, omega, d)
        for eps in sorted(set(eps_vals), reverse=True):
            try:
                n = approx.info_complexity_all(eps, sp)
            except SpectrumOverflow:
                overflow = True
                buf.write(f"# overflow s={d} eps={fmt(eps)}\n")
                continue
            rows.append((d, eps, n))
            buf.write(f"{d},{fmt(eps)},{n}\n")
    emit(buf.getvalue(), out)
    if figure and rows:
        from .plotting import plot_complexity

        plot_complexity(rows, figure)
    if overflow:
        click.echo("numeric error: spectrum overflow for some rows", err=True)
        sys.exit(EXIT_NUMERIC)


@main.command("wce-int")
@space_options
@click.option("--rule", "rule_path", required=True, type=click.Path(dir_okay=False), help="CSV: x1..xs,re_q,im_q.")
@guarded
def wce_int(space, s, omega, out, tol, seed, rule_path):
    """Worst-case integration error of a cubature rule."""
    cfg = RunConfig("wce-int", space, omega, parse_dim(s), out, tol, seed, {"rule": rule_path})
    header, data = read_matrix(rule_path, "--rule")
    if header[-2:] != ["re_q", "im_q"]:
        raise ConfigError("--rule: header must end with re_q,im_q")
    dim = len(header) - 2
    if cfg.s is None:
        cfg.s = dim
    model, omega, s = load_space(cfg)
    if s != dim:
        raise ConfigError(f"--rule: {dim} coordinates but s={s}")
    sp = make_space(model, omega, s)
    rule = quadrature.CubatureRule(data[:, :dim], data[:, dim] + 1j * data[:, dim + 1])
    value = quadrature.wce(rule, sp, tol=tol or 1e-12)
    emit(dump_json({"n": rule.n, "s": s, "omega": omega, "wce": value}), out)


@main.command("lower-bound")
@space_options
@click.option("--points", "points_path", required=True, type=click.Path(dir_okay=False), help="CSV: x1..xs.")
@guarded
def lower_bound(space, s, omega, out, tol, seed, points_path):
    """Fooling-function certificate for s points in dimension s."""
    cfg = RunConfig("lower-bound", space, omega, parse_dim(s), out, tol, seed, {"points": points_path})
    header, data = read_matrix(points_path, "--points")
    if cfg.s is None:
        cfg.s = len(header)
    model, omega, s = load_space(cfg)
    if data.shape != (s, s):
        raise ConfigError(f"--points: need {s} points with {s} coordinates, got {data.shape}")
    sp = make_space(model, omega, s)
    cert = quadrature.lower_bound_certificate(data, sp, null_tol=tol or 1e-12)
    emit(dump_json(cert.to_json()), out)


@main.command("kernel-eval")
@space_options
@click.option("--x", "x_text", required=True, help="Comma-separated coordinates.")
@click.option("--y", "y_text", required=True, help="Comma-separated coordinates.")
@guarded
def kernel_eval(space, s, omega, out, tol, seed, x_text, y_text):
    """Reproducing kernel K(x, y) with its error bound."""
    x, y = parse_floats(x_text, "--x"), parse_floats(y_text, "--y")
    cfg = RunConfig("kernel-eval", space, omega, parse_dim(s), out, tol, seed, {"x": x_text, "y": y_text})
    if cfg.s is None:
        cfg.s = len(x)
    model, omega, s = load_space(cfg)
    if len(x) != s or len(y) != s:
        raise ConfigError(f"--x/--y: need {s} coordinates each")
    sp = make_space(model, omega, s)
    kv = kernel(x, y, sp, tol=tol or 1e-12)
    emit(dump_json({"value": kv.value, "abs_error": kv.abs_error}), out)


if __name__ == "__main__":  # pragma: no cover
    main()
