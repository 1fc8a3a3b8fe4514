"""Acceptance gate for the finished simulator.

Each test pins one end-to-end contract, with its numeric tolerance and its
wall-clock budget spelled out inline. Run with ``pytest -v`` to get one
pass/fail line per contract. The full-map training runs near the end take a
few minutes; everything before them is quick.
"""

import math
import random
import statistics
import time

import pytest

from sarsim import (
    Action,
    Hyperparams,
    Outcome,
    Position,
    PropagationParams,
    QTable,
    build_environment,
    bundled_scenario_path,
    episodes_to_first_rescue,
    greedy_policy,
    parse_scenario,
    rss_threshold_for_distance,
    train,
    value_iteration_oracle,
)
from sarsim.cli import EXIT_OK, run
from sarsim.geometry import segments_intersect

from conftest import corridor_scenario, open10_scenario, split15_scenario

PLAN1 = bundled_scenario_path("floorplan1.json")
PLAN2 = bundled_scenario_path("floorplan2.json")

# independent re-derivation of the move geometry: y grows northward
DISPLACEMENT = {
    Action.N: (0, 1), Action.NE: (1, 1), Action.E: (1, 0), Action.SE: (1, -1),
    Action.S: (0, -1), Action.SW: (-1, -1), Action.W: (-1, 0), Action.NW: (-1, 1),
}


def test_criterion_1_rescue_threshold_at_two_meters():
    """25 dBm at 2.4 GHz puts the 2 m rescue threshold within 0.1 dB of -21 dBm."""
    threshold = rss_threshold_for_distance(2.0, PropagationParams())
    assert abs(threshold - (-21.0)) <= 0.1
    assert threshold == pytest.approx(-21.072607969395108, abs=1e-12)


def test_criterion_2_band_shift_and_wall_penalty_exact():
    """Moving plan 2 from 2.4 to 5 GHz lowers every cell by exactly the
    free-space shift, plus 4 dB per crossed wall segment (doors cancel).
    Tolerance 1e-9 dB per cell; budget 1 s."""
    t0 = time.monotonic()
    low = parse_scenario(PLAN2, {"frequency_hz": 2.4e9})
    high = parse_scenario(PLAN2, {"frequency_hz": 5e9})
    assert low.propagation.shadowing_sigma_db == 0.0
    map_low, _ = build_environment(low)
    map_high, _ = build_environment(high)
    shift = 20.0 * math.log10(5e9 / 2.4e9)
    tx = low.victim
    hard_walls = [w for w in low.plan.walls if w.kind == "wall"]
    los_cells = obstructed_cells = 0
    for pos, rss_low in map_low.items():
        center = low.plan.cell_center(pos)
        n_walls = sum(1 for w in hard_walls if segments_intersect(tx, center, w.p1, w.p2))
        if n_walls == 0:
            los_cells += 1
        else:
            obstructed_cells += 1
        expected = rss_low - shift - 4.0 * n_walls
        assert map_high.rss_at_cell(pos) == pytest.approx(expected, abs=1e-9), pos
    # both branches of the claim must actually occur on this plan
    assert los_cells > 0 and obstructed_cells > 0
    assert time.monotonic() - t0 < 1.0


def test_criterion_3_greedy_policy_matches_value_iteration():
    """After 20,000 episodes on the split 15x10 plan, the greedy policy agrees
    with the value-iteration optimum on >= 95% of states whose top two action
    values differ by more than 1e-6, for each of 3 seeds. Budget 30 s/seed."""
    for seed in (0, 1, 2):
        t0 = time.monotonic()
        sc = split15_scenario(master_seed=seed)
        qtable, _ = train(sc)
        rss_map, env = build_environment(sc)
        oracle = value_iteration_oracle(
            rss_map, sc.plan, sc.hyperparams.gamma, env.threshold_dbm
        )
        learned = greedy_policy(qtable)
        decided = matched = 0
        for sid in range(env.states.n_states):
            if oracle.policy[sid] is None or oracle.top_gap(sid) <= 1e-6:
                continue
            decided += 1
            if learned[sid] == oracle.policy[sid]:
                matched += 1
        assert decided > 0
        assert matched / decided >= 0.95, (
            "seed %d: %d/%d states match" % (seed, matched, decided)
        )
        assert time.monotonic() - t0 < 30.0


def test_criterion_4_desk_scale_rescue_is_step_optimal():
    """10x10 open plan, start (0,0), terminal neighborhood at (8,8): after
    5,000 episodes the greedy rollout rescues in <= 8 steps (the diagonal
    lower bound) for at least 9 of 10 seeds. Budget 10 s/seed."""
    optimal = 0
    for seed in range(10):
        t0 = time.monotonic()
        sc = open10_scenario(master_seed=seed)
        qtable, _ = train(sc)
        _, env = build_environment(sc)
        result = env.run(
            Position(0, 0), qtable, epsilon=0.0, rng=None,
            max_steps=sc.max_steps, learn=False,
        )
        if result.outcome is Outcome.RESCUED and result.steps <= 8:
            optimal += 1
        assert time.monotonic() - t0 < 10.0
    assert optimal >= 9, "%d/10 seeds rescued within 8 steps" % optimal


def test_criterion_5_full_training_run_is_collision_free():
    """Every (state, action) transition taken across the full 30,000-episode
    run on plan 1 starts on a free cell, lands on a free in-bounds cell, and
    crosses no flight-blocking segment. Hard assertion; budget 2 min."""
    t0 = time.monotonic()
    sc = parse_scenario(PLAN1)
    assert sc.iterations == 30000
    _, log = train(sc)
    elapsed = time.monotonic() - t0
    _, env = build_environment(sc)
    plan = sc.plan
    blocking = [w for w in plan.walls if w.blocks_flight]
    taken = 0
    for sid in range(env.states.n_states):
        pos = env.states.position_of(sid)
        row = log.visited_transitions[sid * 8:(sid + 1) * 8]
        if not any(row):
            continue
        assert plan.is_free(pos)
        for action in Action:
            if not row[action]:
                continue
            taken += 1
            dx, dy = DISPLACEMENT[action]
            dest = Position(pos.x + dx, pos.y + dy)
            assert plan.in_bounds(dest), (pos, action)
            assert dest not in plan.blocked_cells, (pos, action)
            a = plan.cell_center(pos)
            b = plan.cell_center(dest)
            assert not any(
                segments_intersect(a, b, w.p1, w.p2) for w in blocking
            ), (pos, action)
    assert taken > 100  # the audit actually saw a training run
    assert elapsed < 120.0, "training took %.1f s" % elapsed


def test_criterion_6_directional_receiver_converges_no_slower():
    """Corridor scenario, 10 paired seeds: the heading-aligned directional
    receiver reaches its first rescue no later than the omnidirectional one
    in median, and wins or ties in >= 7 of 10 pairs. Budget 2 min total."""
    t0 = time.monotonic()
    first = {"directional": [], "omnidirectional": []}
    for kind in first:
        for seed in range(10):
            _, log = train(corridor_scenario(kind, master_seed=seed))
            episodes = episodes_to_first_rescue(log)
            first[kind].append(math.inf if episodes is None else episodes)
    wins = sum(
        1 for d, o in zip(first["directional"], first["omnidirectional"]) if d <= o
    )
    median_d = statistics.median(first["directional"])
    median_o = statistics.median(first["omnidirectional"])
    assert median_d <= median_o, (median_d, median_o)
    assert wins >= 7, "directional wins or ties %d/10" % wins
    assert time.monotonic() - t0 < 120.0


def test_criterion_7_rewards_telescope_exactly():
    """1,000 uniform-random episodes on plan 2: the plain left-to-right sum of
    rewards equals final minus initial RSS with zero float error, every
    episode. Budget 5 s."""
    t0 = time.monotonic()
    sc = parse_scenario(PLAN2)
    _, env = build_environment(sc)
    # alpha=0 freezes the table, so learn=True gives a pure random walk
    qtable = QTable(env.states.n_states, Hyperparams(alpha=0.0))
    for episode in range(1000):
        rng = random.Random(sc.master_seed + episode)
        result = env.run(
            sc.start, qtable, epsilon=1.0, rng=rng,
            max_steps=sc.max_steps, learn=True,
        )
        assert sum(result.rewards) == result.rss_trace[-1] - result.rss_trace[0]
    assert time.monotonic() - t0 < 5.0


def test_criterion_8_training_is_byte_deterministic(tmp_path):
    """Two CLI train runs from the same config produce byte-identical logs,
    Q-tables and trajectories. Budget: twice the single-run budget."""
    t0 = time.monotonic()
    dirs = (tmp_path / "a", tmp_path / "b")
    for out in dirs:
        assert run(["train", "--config", str(PLAN1), "--out", str(out)]) == EXIT_OK
    for name in ("training_log.csv", "qtable.csv", "trajectory.csv"):
        first, second = (d / name for d in dirs)
        assert first.read_bytes() == second.read_bytes(), name
    assert time.monotonic() - t0 < 240.0
