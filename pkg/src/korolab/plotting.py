"""Optional figures for the CLI series commands (written only when asked for)."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_convergence(rows, path, fit=None, title: str | None = None) -> None:
    """Semilog plot of error against n, with the fitted rate curve if given."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = [n for n, _ in rows]
    es = [e for _, e in rows]
    ax.semilogy(ns, es, "o", ms=3, label="computed")
    if fit is not None and ns:
        lo, hi = max(min(ns), 1), max(ns)
        grid = [lo + (hi - lo) * k / 200 for k in range(201)]
        ax.semilogy(grid, fit.predict(grid), "-", lw=1, label=f"fit, p = {fit.p_hat:.4g}")
    ax.set_xlabel("n")
    ax.set_ylabel("error")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_complexity(rows, path) -> None:
    """Information complexity against log(1/eps), one line per dimension."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for s in sorted({r[0] for r in rows}):
        pts = sorted((math.log(1.0 / eps), n) for ss, eps, n in rows if ss == s)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3, label=f"s = {s}")
    ax.set_xlabel("log(1/eps)")
    ax.set_ylabel("n(eps, s)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
