"""Render benchmark and training reports as figure files.

All functions write PNG files next to the delimited output; matplotlib
runs with the Agg backend so no display is needed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .motion import DIMS


def plot_rd_curves(points, path) -> None:
    """CR vs distortion, one curve per (codec, L)."""
    fig, ax = plt.subplots(figsize=(5, 4))
    keys = sorted({(p.codec, p.L) for p in points})
    for codec, L in keys:
        pts = sorted((p.CR, p.D) for p in points if (p.codec, p.L) == (codec, L))
        label = codec if codec == "frame" else f"{codec} L={L}"
        ax.plot([c for c, _ in pts], [d for _, d in pts], marker="o", label=label)
    ax.set_xlabel("compression ratio")
    ax.set_ylabel("distortion (source units)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sparsity_curves(points, path) -> None:
    """Distortion vs kept coefficient fraction, one curve per transform."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for name in sorted({p.transform for p in points}):
        pts = sorted((p.fraction, p.D) for p in points if p.transform == name)
        ax.plot([f for f, _ in pts], [d for _, d in pts], marker="o", label=name)
    ax.set_xlabel("fraction of nonzero coefficients")
    ax.set_ylabel("distortion (source units)")
    ax.set_yscale("log")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_convergence(model, path) -> None:
    """Per-dimension objective value against training iteration."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for d in DIMS:
        trace = model.meta.objective_trace.get(d, [])
        if trace:
            ax.plot(range(1, len(trace) + 1), trace, label=d)
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective")
    ax.set_yscale("log")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
