"""Command-line interface: heatmap, train, eval, and compare subcommands.

Exit codes: 0 success, 1 usage or parse error, 2 validation error, 3 runtime
failure.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from . import __version__
from .agent import QTable
from .episode import build_environment, train
from .errors import ParseError, SarsimError, ValidationError, QTableMismatchError
from .geometry import Position
from .metrics import (
    ComparisonRow,
    episodes_to_first_rescue,
    median_final_steps,
    trajectory_stats,
    write_comparison_csv,
    write_manifest,
    write_outputs,
    write_rss_map_csv,
    write_rss_map_pgm,
    write_trajectory_csv,
)
from .scenario import ScenarioConfig, parse_scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

COMPARE_AXES = ("antenna", "frequency", "iterations")
ANTENNA_ARMS = ("directional", "omnidirectional")
FREQUENCY_ARMS = (2.4e9, 5e9)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this CLI reserves 2 for validation."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="sarsim",
        description="RSS-driven Q-learning search-and-rescue simulator.",
    )
    parser.add_argument("--version", action="version", version="sarsim %s" % __version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def common(p):
        p.add_argument("--config", required=True, metavar="PATH", help="scenario JSON file")
        p.add_argument("--out", required=True, metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, default=None, metavar="N",
                       help="override the config's master_seed")
        p.add_argument("--iterations", type=int, default=None, metavar="N",
                       help="override the config's training episode count")

    p_heat = sub.add_parser("heatmap",
                            help="build the RSS map and export CSV, PGM and PNG")
    common(p_heat)
    p_heat.set_defaults(func=cmd_heatmap)

    p_train = sub.add_parser("train",
                             help="run the full training schedule and export all artifacts")
    common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval",
                            help="greedy rollout of a saved Q-table")
    common(p_eval)
    p_eval.add_argument("--qtable", required=True, metavar="PATH",
                        help="Q-table CSV produced by train")
    p_eval.add_argument("--start", default=None, metavar="X,Y",
                        help="start cell; defaults to the config's start")
    p_eval.set_defaults(func=cmd_eval)

    p_cmp = sub.add_parser("compare",
                           help="train across antenna/frequency/iteration arms and report")
    common(p_cmp)
    p_cmp.add_argument("--axes", default="antenna", metavar="A,B",
                       help="comma list from {antenna,frequency,iterations}")
    p_cmp.add_argument("--seeds", default=None, metavar="S0,S1",
                       help="comma list of master seeds (default: the config seed)")
    p_cmp.add_argument("--iterations-list", default=None, metavar="N0,N1",
                       help="episode counts for the iterations axis")
    p_cmp.add_argument("--antenna-both-ends", action="store_true",
                       help="toggle the transmitter pattern together with the receiver")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def _overrides(args) -> dict:
    ov = {}
    if args.seed is not None:
        ov["master_seed"] = args.seed
    if args.iterations is not None:
        ov["iterations"] = args.iterations
    return ov


def _eval_start(scenario: ScenarioConfig, env) -> Position:
    """The configured start, or a seed-derived free non-terminal cell."""
    if scenario.start is not None:
        return scenario.start
    pool = [
        env.states.position_of(s)
        for s in range(env.states.n_states)
        if env.base[s] < env.threshold_dbm
    ]
    rng = random.Random(scenario.master_seed)
    return pool[rng.randrange(len(pool))]


def cmd_heatmap(args) -> int:
    from . import plots

    scenario = parse_scenario(args.config, _overrides(args))
    rss_map, _ = build_environment(scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rss_map_csv(rss_map, out / "rss_map.csv")
    write_rss_map_pgm(rss_map, out / "rss_map.pgm")
    write_manifest(out / "manifest.json", scenario)
    plots.save_heatmap_png(rss_map, out / "rss_map.png")
    print("heatmap: %d free cells, RSS %.2f to %.2f dBm -> %s"
          % (sum(1 for _ in rss_map.items()), rss_map.min_dbm, rss_map.max_dbm, out))
    return EXIT_OK


def cmd_train(args) -> int:
    from . import plots

    scenario = parse_scenario(args.config, _overrides(args))
    qtable, log = train(scenario)
    rss_map, env = build_environment(scenario)
    start = _eval_start(scenario, env)
    eval_result = env.run(start, qtable, epsilon=0.0, rng=None,
                          max_steps=scenario.max_steps, learn=False)
    out = Path(args.out)
    write_outputs(out, scenario=scenario, rss_map=rss_map, qtable=qtable,
                  log=log, eval_result=eval_result)
    plots.save_heatmap_png(rss_map, out / "rss_map.png")
    plots.save_learning_curve_png(log, out / "learning_curve.png")
    plots.save_trajectory_png(rss_map, eval_result, out / "trajectory.png")
    first = episodes_to_first_rescue(log)
    print("train: %d episodes, first rescue %s, eval %s in %d steps -> %s"
          % (scenario.iterations,
             "at episode %d" % first if first is not None else "never",
             eval_result.outcome.value, eval_result.steps, out))
    return EXIT_OK


def cmd_eval(args) -> int:
    from . import plots

    scenario = parse_scenario(args.config, _overrides(args))
    rss_map, env = build_environment(scenario)
    qtable = QTable.load_csv(args.qtable, scenario.hyperparams, scenario.master_seed)
    if qtable.n_states != env.states.n_states:
        raise QTableMismatchError(
            "Q-table %s has %d states but this scenario has %d"
            % (args.qtable, qtable.n_states, env.states.n_states)
        )
    if args.start is not None:
        try:
            sx, sy = (int(c) for c in args.start.split(","))
        except ValueError:
            raise ParseError("--start must look like X,Y with integers") from None
        start = Position(sx, sy)
    else:
        start = _eval_start(scenario, env)
    result = env.run(start, qtable, epsilon=0.0, rng=None,
                     max_steps=scenario.max_steps, learn=False)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(result, out / "trajectory.csv")
    write_manifest(out / "manifest.json", scenario)
    plots.save_trajectory_png(rss_map, result, out / "trajectory.png")
    stats = trajectory_stats(result, scenario.speed_v)
    print("eval: %s after %d steps, %.2f m, %.2f s flight -> %s"
          % (result.outcome.value, stats.steps, stats.length_m, stats.flight_time_s, out))
    return EXIT_OK


def cmd_compare(args) -> int:
    from . import plots

    axes = tuple(a.strip() for a in args.axes.split(",") if a.strip())
    for axis in axes:
        if axis not in COMPARE_AXES:
            raise ParseError("unknown compare axis %r (choose from %s)"
                             % (axis, ", ".join(COMPARE_AXES)))
    if not axes:
        raise ParseError("--axes must name at least one axis")
    base_overrides = _overrides(args)
    base = parse_scenario(args.config, base_overrides)
    if args.seeds is not None:
        try:
            seeds = [int(s) for s in args.seeds.split(",")]
        except ValueError:
            raise ParseError("--seeds must be a comma list of integers") from None
    else:
        seeds = [base.master_seed]
    if "iterations" in axes:
        if args.iterations_list is None:
            raise ParseError("the iterations axis needs --iterations-list")
        try:
            iteration_arms = [int(s) for s in args.iterations_list.split(",")]
        except ValueError:
            raise ParseError("--iterations-list must be a comma list of integers") from None
    else:
        iteration_arms = [base.iterations]
    antenna_arms = ANTENNA_ARMS if "antenna" in axes else (base.propagation.rx_pattern.kind,)
    frequency_arms = FREQUENCY_ARMS if "frequency" in axes else (base.propagation.frequency_hz,)

    rows = []
    for antenna in antenna_arms:
        for freq in frequency_arms:
            for iterations in iteration_arms:
                for seed in seeds:
                    ov = dict(base_overrides)
                    ov.update(
                        master_seed=seed,
                        iterations=iterations,
                        frequency_hz=freq,
                    )
                    if "antenna" in axes:
                        ov["rx_kind"] = antenna
                        if args.antenna_both_ends:
                            ov["tx_kind"] = antenna
                    scenario = parse_scenario(args.config, ov)
                    qtable, log = train(scenario)
                    _, env = build_environment(scenario)
                    start = _eval_start(scenario, env)
                    result = env.run(start, qtable, epsilon=0.0, rng=None,
                                     max_steps=scenario.max_steps, learn=False)
                    stats = trajectory_stats(result, scenario.speed_v)
                    rows.append(ComparisonRow(
                        antenna=antenna,
                        frequency_hz=freq,
                        iterations=iterations,
                        seed=seed,
                        scenario_sha256=scenario.sha256(),
                        episodes_to_first_rescue=episodes_to_first_rescue(log),
                        median_final_steps=median_final_steps(log),
                        eval_steps=stats.steps,
                        eval_length_m=stats.length_m,
                        eval_flight_time_s=stats.flight_time_s,
                        eval_rescued=stats.rescued,
                    ))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_comparison_csv(rows, out / "comparison.csv")
    plots.save_comparison_png(rows, out / "comparison.png")
    print("compare: %d arms x %d seeds -> %s" % (len(rows) // max(len(seeds), 1), len(seeds), out))
    return EXIT_OK


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    except SarsimError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())
