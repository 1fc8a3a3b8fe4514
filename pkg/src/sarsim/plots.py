"""Matplotlib figure rendering for the report path.

These are presentation-quality companions to the delimited outputs; the CSVs
and the PGM stay the canonical data.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .episode import EpisodeResult, TrainingLog
from .geometry import FloorPlan
from .metrics import ComparisonRow
from .propagation import RssMap

_WALL_STYLE = {"wall": ("black", "-"), "window": ("tab:blue", "-"), "door": ("tab:brown", "--")}


def _draw_plan(ax, plan: FloorPlan) -> None:
    for w in plan.walls:
        color, style = _WALL_STYLE[w.kind]
        ax.plot([w.p1[0], w.p2[0]], [w.p1[1], w.p2[1]], style, color=color, linewidth=2)
    ax.set_xlim(0, plan.width)
    ax.set_ylim(0, plan.height)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")


def save_heatmap_png(rss_map: RssMap, path, trajectory=None, title: str | None = None) -> None:
    plan = rss_map.plan
    fig, ax = plt.subplots(figsize=(max(4.0, plan.width / 8.0), max(4.0, plan.height / 8.0)))
    im = ax.imshow(
        rss_map.grid,
        origin="lower",
        extent=(0, plan.width, 0, plan.height),
        cmap="viridis",
        interpolation="nearest",
    )
    _draw_plan(ax, plan)
    ax.plot(*rss_map.tx_position, marker="*", color="red", markersize=14, linestyle="none")
    if trajectory:
        xs = [p[0] + 0.5 for p in trajectory]
        ys = [p[1] + 0.5 for p in trajectory]
        ax.plot(xs, ys, color="white", linewidth=1.5)
        ax.plot(xs[0], ys[0], marker="o", color="white")
        ax.plot(xs[-1], ys[-1], marker="s", color="white")
    fig.colorbar(im, ax=ax, label="RSS [dBm]", shrink=0.8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_trajectory_png(rss_map: RssMap, result: EpisodeResult, path) -> None:
    save_heatmap_png(
        rss_map,
        path,
        trajectory=result.trajectory,
        title="%d steps, %s" % (result.steps, result.outcome.value),
    )


def save_learning_curve_png(log: TrainingLog, path) -> None:
    steps = np.array([rec.steps for rec in log.records])
    episodes = np.arange(len(steps))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(episodes, steps, linewidth=0.4, alpha=0.4, label="per episode")
    if len(steps) >= 20:
        window = max(10, len(steps) // 100)
        kernel = np.ones(window) / window
        smooth = np.convolve(steps, kernel, mode="valid")
        ax.plot(episodes[window - 1:], smooth, color="tab:red", label="rolling mean")
    ax.set_xlabel("episode")
    ax.set_ylabel("steps to termination")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_comparison_png(rows: list[ComparisonRow], path) -> None:
    labels = [
        "%s\n%.1f GHz\n%d it, seed %d" % (r.antenna, r.frequency_hz / 1e9, r.iterations, r.seed)
        for r in rows
    ]
    firsts = [
        np.nan if r.episodes_to_first_rescue is None else r.episodes_to_first_rescue
        for r in rows
    ]
    fig, ax = plt.subplots(figsize=(max(6.0, 1.1 * len(rows)), 4.5))
    ax.bar(range(len(rows)), firsts, color="tab:blue")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("episodes to first rescue")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
