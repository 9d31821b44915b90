"""Static figures for frontier runs.

Figures only read the arrays the CLI has already written; nothing here
feeds back into numeric output. SVG output is made reproducible by fixing
the hash salt and dropping the date stamp.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "svg.hashsalt": "pareto-bursts",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (5.0, 3.6),
}

AXIS_LABELS = {
    "neg_max_pop_deviation": "max. population deviation (negated)",
    "min_polsby_popper": "min. Polsby-Popper",
}


def _label(crit: str) -> str:
    return AXIS_LABELS.get(crit, crit)


def save(fig, path) -> Path:
    path = Path(path)
    kwargs = {"metadata": {"Date": None}} if path.suffix == ".svg" else {}
    fig.savefig(path, bbox_inches="tight", **kwargs)
    plt.close(fig)
    return path


def _frontier_line(ax, pts: np.ndarray, **kw):
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    ax.plot(pts[order, 0], pts[order, 1], marker="o", markersize=3, linewidth=1, **kw)


def plot_frontier_progress(
    checkpoints: Mapping[int, np.ndarray],
    path,
    criteria: Sequence[str],
    baseline: np.ndarray | None = None,
):
    """Frontier at several burst counts, optionally over raw-chain samples."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if baseline is not None and len(baseline):
            ax.scatter(baseline[:, 0], baseline[:, 1], s=4, color="0.7", label="chain samples", zorder=1)
        cmap = plt.get_cmap("viridis")
        keys = sorted(checkpoints)
        for i, burst in enumerate(keys):
            color = cmap(i / max(len(keys) - 1, 1))
            _frontier_line(ax, checkpoints[burst], color=color, label=f"{burst} bursts", zorder=2)
        ax.set_xlabel(_label(criteria[0]))
        ax.set_ylabel(_label(criteria[1]))
        if keys or baseline is not None:
            ax.legend(frameon=False)
        return save(fig, path)


def plot_burst_sweep(frontiers: Mapping[int, Sequence[np.ndarray]], path, criteria: Sequence[str]):
    """One panel per burst size, one line per replication."""
    sizes = sorted(frontiers)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(sizes), sharex=True, sharey=True, figsize=(3.0 * len(sizes), 3.2), squeeze=False)
        for ax, b in zip(axes[0], sizes):
            for pts in frontiers[b]:
                _frontier_line(ax, pts, color="C0", alpha=0.5)
            ax.set_title(f"b = {b}")
            ax.set_xlabel(_label(criteria[0]))
        axes[0][0].set_ylabel(_label(criteria[1]))
        return save(fig, path)


def plot_frontier_scaling(rows: Sequence[tuple[int, int, int, int]], path):
    """Frontier size against sample size, one line per dimension.

    ``rows`` are ``(J, n, rep, frontier_size)``.
    """
    data = np.array(rows, dtype=np.float64).reshape(-1, 4)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for J in sorted(set(data[:, 0].astype(int))):
            sub = data[data[:, 0] == J]
            ns = sorted(set(sub[:, 1].astype(int)))
            means = [sub[sub[:, 1] == n, 3].mean() for n in ns]
            ax.scatter(sub[:, 1], sub[:, 3], s=4, alpha=0.3)
            ax.plot(ns, means, marker="o", markersize=3, label=f"J = {J}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("sample size n")
        ax.set_ylabel("frontier size")
        ax.legend(frameon=False)
        return save(fig, path)
