"""Figures written next to the CSV tables (Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 3.8),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.frameon": False,
}
MAX_TRACES = 20


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_fracint(t, f, integral, recovered, alpha: float, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(t, f, label="f", lw=1.6)
        ax.plot(t, integral, label=rf"$I^{{{alpha:.3g}}}_{{T-}} f$", lw=1.2)
        ax.plot(t, recovered, "--", label=r"$D(I f)$", lw=1.0)
        ax.set_xlabel("t")
        ax.legend()
        return _save(fig, path)


def plot_paths(t, values, hurst: float, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for row in values[:MAX_TRACES]:
            ax.plot(t, row, lw=0.7, alpha=0.8)
        ax.set_title(f"fBm sample paths, H = {hurst:g}")
        ax.set_xlabel("t")
        ax.set_ylabel("$B_t$")
        return _save(fig, path)


def plot_moments(t, mean, second, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(t, mean, "o-", ms=3, label=r"$E X_t$")
        ax.plot(t, second, "s-", ms=3, label=r"$E X_t^2$")
        ax.set_xlabel("t")
        ax.legend()
        return _save(fig, path)


def plot_solution(t, values, path) -> Path:
    """``values[i, j]`` is ``X_{t_j}`` on path ``i``."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for row in values[:MAX_TRACES]:
            ax.plot(t, row, lw=0.7, alpha=0.8)
        ax.plot(t, values.mean(axis=0), "k", lw=1.6, label="sample mean")
        ax.set_xlabel("t")
        ax.set_ylabel("$X_t$")
        ax.legend()
        return _save(fig, path)


def plot_series(reports: dict, path) -> Path:
    """Log terms of each checked series against the chaos level."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, rep in reports.items():
            lt = np.asarray(rep.log_terms)
            k = np.arange(len(lt))
            keep = np.isfinite(lt)
            ax.plot(k[keep], lt[keep] / np.log(10), lw=1.2, label=f"{name} ({rep.verdict})")
        ax.set_xlabel("level k")
        ax.set_ylabel(r"$\log_{10}$ term")
        ax.legend()
        return _save(fig, path)
