"""Figures for synopsis runs, written straight to files."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .model import FrameGeometry, SynopsisState, Tube  # noqa: E402


def _style():
    plt.rcParams.update({
        "font.size": 9,
        "axes.spines.top": False,
        "axes.spines.right": False,
        "savefig.dpi": 120,
        "savefig.bbox": "tight",
    })


def plot_schedule(tubes, state: SynopsisState, geom: FrameGeometry, t_max=None):
    """Life interval of every tube before (grey) and after (blue) re-placement."""
    _style()
    tubes = sorted(tubes, key=lambda t: (state[t.id], t.id))
    fig, ax = plt.subplots(figsize=(7, max(2.0, 0.22 * len(tubes) + 1)))
    for row, t in enumerate(tubes):
        ax.barh(row, t.duration, left=t.original_start - 0.5, height=0.8, color="0.85")
        ax.barh(row, t.duration, left=state[t.id] - 0.5, height=0.45, color="tab:blue")
    ax.axvline(geom.duration + 0.5, color="0.4", lw=0.8, ls="--", label="original end")
    if t_max is not None:
        ax.axvline(t_max + 0.5, color="tab:red", lw=0.8, ls=":", label="t_max")
    ax.set_yticks(range(len(tubes)))
    ax.set_yticklabels([t.id for t in tubes], fontsize=6)
    ax.set_xlabel("frame")
    ax.legend(loc="lower right", fontsize=7, frameon=False)
    ax.set_title("tube placement (grey: original, blue: synopsis)")
    return fig


def plot_spacetime(tubes, state: SynopsisState, geom: FrameGeometry):
    """Horizontal box centre against synopsis frame, one line per tube."""
    _style()
    fig, ax = plt.subplots(figsize=(6, 4))
    for t in sorted(tubes, key=lambda t: t.id):
        frames = state[t.id] + np.arange(t.duration)
        xc = t.boxes[:, 0] + t.boxes[:, 2] / 2
        if geom.cyclic:
            xc = np.mod(xc, geom.width)
            # break the line where it wraps around the seam
            breaks = np.nonzero(np.abs(np.diff(xc)) > geom.width / 2)[0] + 1
            xc = np.insert(xc, breaks, np.nan)
            frames = np.insert(frames.astype(float), breaks, np.nan)
        ax.plot(xc, frames, lw=1)
    ax.set_xlim(0, geom.width)
    ax.set_xlabel("x (px)")
    ax.set_ylabel("synopsis frame")
    ax.invert_yaxis()
    return fig


def plot_trace(trace):
    _style()
    trace = np.asarray(trace, dtype=float).reshape(-1, 4)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(trace[:, 0], trace[:, 2], lw=0.8, label="current")
    ax.plot(trace[:, 0], trace[:, 3], lw=1.2, label="best")
    ax.set_xlabel("iteration")
    ax.set_ylabel("cost")
    ax2 = ax.twinx()
    ax2.semilogy(trace[:, 0], trace[:, 1], color="0.6", lw=0.8, ls="--")
    ax2.set_ylabel("temperature", color="0.4")
    ax.legend(loc="upper right", fontsize=7, frameon=False)
    return fig


def save_figures(out_dir, tubes, state, geom, trace=(), t_max=None, prefix="") -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    figs = {"schedule": plot_schedule(tubes, state, geom, t_max),
            "spacetime": plot_spacetime(tubes, state, geom)}
    if len(trace):
        figs["trace"] = plot_trace(trace)
    written = []
    for name, fig in figs.items():
        path = out_dir / f"{prefix}{name}.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written
