"""Figure rendering for the experiment reports.

Each helper takes already-computed results and writes a PNG next to the
corresponding CSV. Uses the Agg backend so runs are headless-safe.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .solver import RunTrace  # noqa: E402

__all__ = ["plot_trace", "plot_convergence", "plot_phase", "plot_rate"]

_LOG_FLOOR = 1e-16


def _save(fig, path: Union[str, Path]) -> Path:
    p = Path(path)
    fig.tight_layout()
    fig.savefig(p, dpi=150)
    plt.close(fig)
    return p


def plot_trace(trace: RunTrace, path: Union[str, Path]) -> Path:
    """Objective (and relative errors, when available) against iteration."""
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    it = trace.column("iteration")
    ax.semilogy(it, np.maximum(trace.column("objective"), _LOG_FLOOR), label="objective")
    rel_x = trace.column("rel_err_x")
    if np.any(np.isfinite(rel_x)):
        ax.semilogy(it, np.maximum(rel_x, _LOG_FLOOR), label="rel err X")
    rel_s = trace.column("rel_err_s")
    if np.any(np.isfinite(rel_s)):
        ax.semilogy(it, np.maximum(rel_s, _LOG_FLOOR), label="rel err S")
    gd = trace.phase_records("gd")
    if gd and gd[0].iteration > 0:
        ax.axvline(gd[0].iteration, color="gray", ls=":", lw=1, label="gd phase start")
    ax.set_xlabel("iteration")
    ax.set_ylabel("value (log scale)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_convergence(traces: Sequence[RunTrace], path: Union[str, Path]) -> Path:
    """Relative error of X in log scale vs. gd iteration, one line per trial."""
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    for trace in traces:
        rel = trace.column("rel_err_x", phase="gd")
        if not np.any(np.isfinite(rel)):
            rel = trace.column("objective", phase="gd")
        ax.semilogy(np.arange(len(rel)), np.maximum(rel, _LOG_FLOOR), lw=0.8, alpha=0.6)
    ax.set_xlabel("gd iteration")
    ax.set_ylabel("relative error of X (log scale)")
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def plot_phase(grid: Sequence[float], fractions: Sequence[float], sweep_name: str,
               path: Union[str, Path]) -> Path:
    """Recovery success fraction vs. the sweep variable."""
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.plot(grid, fractions, "o-")
    ax.set_xlabel(sweep_name)
    ax.set_ylabel("success fraction")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def plot_rate(grid: Sequence[float], means: Sequence[float], stds: Sequence[float],
              sweep_name: str, path: Union[str, Path]) -> Path:
    """Mean squared relative error (with std bars) vs. the sweep variable."""
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.errorbar(grid, means, yerr=stds, fmt="o-", capsize=3)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(sweep_name)
    ax.set_ylabel("mean squared relative error")
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)
