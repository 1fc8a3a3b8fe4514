"""Run metrics and file exports: trajectory stats, CSV/PGM writers, manifest.

Every writer is byte-deterministic for fixed inputs: newlines are always
``\\n``, floats are formatted with fixed rules, and row order follows the
row-major cell order of the plan.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .errors import DomainError, InvalidTrajectoryError
from .episode import EpisodeResult, Outcome, TrainingLog
from .agent import QTable
from .geometry import SQRT2, Action, Position
from .propagation import RssMap

_STEP_LENGTHS = {
    (0, 1): 1.0, (0, -1): 1.0, (1, 0): 1.0, (-1, 0): 1.0,
    (1, 1): SQRT2, (1, -1): SQRT2, (-1, 1): SQRT2, (-1, -1): SQRT2,
}

SENSING_INTERVAL_S = 1.0


def trajectory_length(trajectory: Sequence[tuple[int, int]]) -> float:
    """Path length in meters; every hop must be one of the eight moves."""
    total = 0.0
    for i in range(1, len(trajectory)):
        dx = trajectory[i][0] - trajectory[i - 1][0]
        dy = trajectory[i][1] - trajectory[i - 1][1]
        step = _STEP_LENGTHS.get((dx, dy))
        if step is None:
            raise InvalidTrajectoryError(
                "illegal hop %r -> %r at index %d"
                % (tuple(trajectory[i - 1]), tuple(trajectory[i]), i)
            )
        total += step
    return total


def flight_time(trajectory: Sequence[tuple[int, int]], speed_v: float) -> float:
    """Seconds spent flying the path at constant speed v."""
    if speed_v <= 0:
        raise DomainError("speed must be > 0, got %g" % speed_v)
    return trajectory_length(trajectory) / speed_v


def sensing_time(trajectory: Sequence[tuple[int, int]]) -> float:
    """Seconds spent sensing: one interval per step taken."""
    return (len(trajectory) - 1) * SENSING_INTERVAL_S


@dataclass(frozen=True)
class TrajectoryStats:
    steps: int
    length_m: float
    flight_time_s: float
    sensing_time_s: float
    rescued: bool


def trajectory_stats(result: EpisodeResult, speed_v: float) -> TrajectoryStats:
    return TrajectoryStats(
        steps=result.steps,
        length_m=trajectory_length(result.trajectory),
        flight_time_s=flight_time(result.trajectory, speed_v),
        sensing_time_s=sensing_time(result.trajectory),
        rescued=result.outcome is Outcome.RESCUED,
    )


def episodes_to_first_rescue(log: TrainingLog) -> int | None:
    """Index of the first rescued training episode, or None if none rescued."""
    for rec in log.records:
        if rec.outcome is Outcome.RESCUED:
            return rec.episode
    return None


def median_final_steps(log: TrainingLog, window: int = 1000) -> float:
    """Median episode length over the last ``window`` episodes."""
    tail = [rec.steps for rec in log.records[-window:]]
    if not tail:
        raise DomainError("training log holds no episodes")
    tail.sort()
    mid = len(tail) // 2
    if len(tail) % 2:
        return float(tail[mid])
    return (tail[mid - 1] + tail[mid]) / 2.0


# -- writers ---------------------------------------------------------------


def write_trajectory_csv(result: EpisodeResult | None, path) -> None:
    """One row per visited cell; step 0 carries no action or reward."""
    with open(path, "w", newline="\n") as fh:
        fh.write("step,x,y,rss_dbm,action,reward\n")
        if result is None:
            return
        for i, pos in enumerate(result.trajectory):
            if i == 0:
                fh.write("0,%d,%d,%.2f,,\n" % (pos.x, pos.y, result.rss_trace[0]))
            else:
                fh.write(
                    "%d,%d,%d,%.2f,%s,%.2f\n"
                    % (
                        i,
                        pos.x,
                        pos.y,
                        result.rss_trace[i],
                        result.actions[i - 1].name,
                        result.rewards[i - 1],
                    )
                )


def write_training_log_csv(log: TrainingLog, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("episode,steps,cum_reward,outcome,epsilon\n")
        for rec in log.records:
            fh.write(
                "%d,%d,%.2f,%s,%.6f\n"
                % (rec.episode, rec.steps, rec.cum_reward, rec.outcome.value, rec.epsilon)
            )


def write_rss_map_csv(rss_map: RssMap, path) -> None:
    """Free cells in row-major order, RSS at 2 decimal places."""
    with open(path, "w", newline="\n") as fh:
        fh.write("x,y,rss_dbm\n")
        for pos, rss in rss_map.items():
            fh.write("%d,%d,%.2f\n" % (pos.x, pos.y, rss))


def write_rss_map_pgm(rss_map: RssMap, path) -> None:
    """Plain-text PGM heat map, north up, blocked cells black.

    Free-cell values scale linearly from the map minimum (0) to the maximum
    (255).
    """
    plan = rss_map.plan
    lo = rss_map.min_dbm
    hi = rss_map.max_dbm
    span = hi - lo
    with open(path, "w", newline="\n") as fh:
        fh.write("P2\n%d %d\n255\n" % (plan.width, plan.height))
        for y in range(plan.height - 1, -1, -1):
            row = []
            for x in range(plan.width):
                if plan.is_free((x, y)):
                    rss = float(rss_map.grid[y, x])
                    level = 255 if span == 0.0 else int(round((rss - lo) / span * 255.0))
                else:
                    level = 0
                row.append(str(level))
            fh.write(" ".join(row) + "\n")


def write_manifest(path, scenario, tool_version: str = __version__) -> None:
    """Flat key-value manifest: enough to rerun the exact same training."""
    doc = {
        "scenario_sha256": scenario.sha256(),
        "master_seed": scenario.master_seed,
        "tool_version": tool_version,
        "config_json": scenario.canonical_json(),
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_outputs(
    out_dir,
    *,
    scenario,
    rss_map: RssMap,
    qtable: QTable,
    log: TrainingLog | None = None,
    eval_result: EpisodeResult | None = None,
) -> dict[str, Path]:
    """Write the full artifact set for a run and return the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "rss_map_csv": out / "rss_map.csv",
        "rss_map_pgm": out / "rss_map.pgm",
        "qtable_csv": out / "qtable.csv",
        "manifest": out / "manifest.json",
    }
    write_rss_map_csv(rss_map, paths["rss_map_csv"])
    write_rss_map_pgm(rss_map, paths["rss_map_pgm"])
    qtable.save_csv(paths["qtable_csv"])
    write_manifest(paths["manifest"], scenario)
    if log is not None:
        paths["training_log_csv"] = out / "training_log.csv"
        write_training_log_csv(log, paths["training_log_csv"])
    if eval_result is not None:
        paths["trajectory_csv"] = out / "trajectory.csv"
        write_trajectory_csv(eval_result, paths["trajectory_csv"])
    return paths


# -- comparison reports ----------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    antenna: str
    frequency_hz: float
    iterations: int
    seed: int
    scenario_sha256: str
    episodes_to_first_rescue: int | None
    median_final_steps: float
    eval_steps: int
    eval_length_m: float
    eval_flight_time_s: float
    eval_rescued: bool


def write_comparison_csv(rows: Iterable[ComparisonRow], path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(
            "antenna,frequency_hz,iterations,seed,scenario_sha256,"
            "episodes_to_first_rescue,median_final_steps,eval_steps,"
            "eval_length_m,eval_flight_time_s,eval_rescued\n"
        )
        for r in rows:
            first = "" if r.episodes_to_first_rescue is None else str(r.episodes_to_first_rescue)
            fh.write(
                "%s,%s,%d,%d,%s,%s,%.1f,%d,%.2f,%.2f,%s\n"
                % (
                    r.antenna,
                    repr(r.frequency_hz),
                    r.iterations,
                    r.seed,
                    r.scenario_sha256,
                    first,
                    r.median_final_steps,
                    r.eval_steps,
                    r.eval_length_m,
                    r.eval_flight_time_s,
                    "yes" if r.eval_rescued else "no",
                )
            )
