"""Figure rendering for traces and bound comparisons.

Figures are written next to the delimited outputs so a run directory is
self-contained: a log-log gap plot (last iterate, running best, optional
bound overlay) and the step-size/error schedule plot.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .algorithms import RunTrace

__all__ = ["render_gap_figure", "render_schedule_figure", "render_report"]


def render_gap_figure(trace: RunTrace, out_png,
                      bounds: Optional[dict] = None) -> Path:
    """Log-log objective-gap curve with the running-best curve and, when
    given, a bound overlay (dict with ``Ts`` and ``bounds`` arrays)."""
    ts = np.arange(1, trace.T + 1)
    gaps = trace.f_gaps()
    best = np.minimum.accumulate(gaps)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    pos = gaps > 0
    ax.loglog(ts[pos], gaps[pos], lw=1.0, label="last iterate")
    posb = best > 0
    ax.loglog(ts[posb], best[posb], lw=1.0, ls="--", label="best so far")
    if bounds is not None:
        ax.loglog(bounds["Ts"], bounds["bounds"], lw=1.2, color="k",
                  label=f"bound ({bounds.get('rule', '?')})")
    ax.set_xlabel("iteration t")
    ax.set_ylabel("objective gap")
    ax.set_title(f"{trace.problem_id} / {trace.algo_id}")
    ax.legend(frameon=False)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    out_png = Path(out_png)
    out_png.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png


def render_schedule_figure(trace: RunTrace, out_png) -> Path:
    ts = np.arange(1, trace.T + 1)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(ts, trace.alpha_values, lw=1.0, label="step size")
    if np.any(trace.eps_values > 0):
        pos = trace.eps_values > 0
        ax.loglog(ts[pos], trace.eps_values[pos], lw=1.0, ls=":",
                  label="achieved subgradient error")
    ax.set_xlabel("iteration t")
    ax.set_ylabel("value")
    ax.set_title(f"{trace.problem_id} / {trace.algo_id}: schedule")
    ax.legend(frameon=False)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    out_png = Path(out_png)
    out_png.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png


def render_report(trace: RunTrace, out_dir, bounds: Optional[dict] = None) -> list[Path]:
    """Render all figures for a trace into ``out_dir``; returns the paths."""
    out_dir = Path(out_dir)
    stem = f"{trace.problem_id}_{trace.algo_id}"
    return [
        render_gap_figure(trace, out_dir / f"{stem}_gap.png", bounds=bounds),
        render_schedule_figure(trace, out_dir / f"{stem}_schedule.png"),
    ]
