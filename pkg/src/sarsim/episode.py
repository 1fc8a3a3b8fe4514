"""The sense-act-learn loop: single episodes, evaluation, and the trainer.

One step is: sense RSS, map it to a state, pick an action epsilon-greedily,
move (re-drawing randomly whenever the move turns out blocked), sense again,
take the difference of the two readings as the reward, back up the Q-value,
repeat. An episode ends on rescue (RSS at or above the threshold), on the
step limit, or boxed in with all eight moves blocked.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

from .agent import N_ACTIONS, QTable, StateSpace, select_action
from .errors import InvalidStartError, NoActionAvailableError, UnknownStateError
from .geometry import Action, FloorPlan, Position
from .propagation import (
    AntennaPattern,
    RssMap,
    build_rss_map,
    quantize_dbm,
    rss_threshold_for_distance,
)

if TYPE_CHECKING:
    from .scenario import ScenarioConfig

import math

DEFAULT_MAX_STEPS = 10_000
DEFAULT_TERMINAL_DISTANCE_M = 2.0


class Outcome(str, Enum):
    RESCUED = "rescued"
    STEP_LIMIT = "step_limit"
    BOXED_IN = "boxed_in"


def reward(rss_prev_dbm: float, rss_cur_dbm: float) -> float:
    """Per-step reward: the change in sensed signal strength."""
    return rss_cur_dbm - rss_prev_dbm


def is_terminal(rss_dbm: float, threshold_dbm: float) -> bool:
    """Rescue fires at or above the threshold."""
    return rss_dbm >= threshold_dbm


@dataclass
class EpisodeResult:
    trajectory: list[Position]
    actions: list[Action]
    rewards: list[float]
    rss_trace: list[float]
    outcome: Outcome
    episode_index: int = 0

    @property
    def steps(self) -> int:
        return len(self.trajectory) - 1

    @property
    def cum_reward(self) -> float:
        return sum(self.rewards)


@dataclass
class EpisodeRecord:
    episode: int
    steps: int
    cum_reward: float
    outcome: Outcome
    epsilon: float


@dataclass
class TrainingLog:
    """Per-episode aggregates plus enough provenance to reproduce the run."""

    records: list[EpisodeRecord]
    master_seed: int
    scenario_sha256: str = ""
    n_states: int = 0
    # flat |S| x 8 mask of (state, action) transitions ever taken in training
    visited_transitions: bytearray = field(default_factory=bytearray)

    def was_visited(self, sid: int, action: Action) -> bool:
        return bool(self.visited_transitions[sid * N_ACTIONS + action])


class SearchEnv:
    """Precomputed move and sensing tables for one map.

    ``steering`` switches on a heading-aligned receive antenna: the stored
    map then carries no receive gain, and each reading adds the pattern's
    gain for the current travel direction. The state labels always come from
    the stored map, so the cell/state bijection is untouched.
    """

    def __init__(
        self,
        rss_map: RssMap,
        plan: FloorPlan,
        threshold_dbm: float | None = None,
        steering: AntennaPattern | None = None,
    ):
        if threshold_dbm is None:
            threshold_dbm = rss_threshold_for_distance(
                DEFAULT_TERMINAL_DISTANCE_M, rss_map.params
            )
        self.rss_map = rss_map
        self.plan = plan
        self.threshold_dbm = threshold_dbm
        self.steering = steering
        self.states = StateSpace(rss_map)
        n = self.states.n_states
        self.base: list[float] = [
            quantize_dbm(self.states.rss_of(s)) for s in range(n)
        ]
        self.next_state: list[list[int]] = []
        for sid in range(n):
            pos = self.states.position_of(sid)
            row = []
            for action in Action:
                dest = plan.apply_action(pos, action)
                row.append(-1 if dest is None else self.states.state_of(dest))
            self.next_state.append(row)
        if steering is not None and steering.kind == "directional":
            tx_x, tx_y = rss_map.tx_position
            self.heading_gain: list[list[float]] | None = []
            for sid in range(n):
                cx, cy = plan.cell_center(self.states.position_of(sid))
                az_to_tx = math.degrees(math.atan2(tx_y - cy, tx_x - cx))
                self.heading_gain.append(
                    [
                        quantize_dbm(
                            steering.gain_at_offset_db(a.azimuth_deg - az_to_tx)
                        )
                        for a in Action
                    ]
                )
        else:
            self.heading_gain = None

    def sensed(self, sid: int, heading: Action) -> float:
        if self.heading_gain is None:
            return self.base[sid]
        return self.base[sid] + self.heading_gain[sid][heading]

    def run(
        self,
        start: tuple[int, int],
        q: QTable,
        *,
        epsilon: float,
        rng: random.Random | None = None,
        max_steps: int = DEFAULT_MAX_STEPS,
        learn: bool = True,
        episode_index: int = 0,
        visited: bytearray | None = None,
    ) -> EpisodeResult:
        if q.n_states != self.states.n_states:
            raise ValueError(
                "Q-table has %d states but the map has %d" % (q.n_states, self.states.n_states)
            )
        if not self.plan.is_free(start):
            raise InvalidStartError("start cell %r is blocked or out of bounds" % (tuple(start),))
        sid = self.states.state_of(start)
        cur = self.sensed(sid, Action.E)  # boresight east before the first move
        trajectory = [sid]
        actions: list[int] = []
        rewards: list[float] = []
        trace = [cur]
        threshold = self.threshold_dbm
        next_state = self.next_state
        outcome = Outcome.STEP_LIMIT
        if cur >= threshold:
            outcome = Outcome.RESCUED
            max_steps = 0
        if max_steps > 0 and epsilon > 0.0 and rng is None:
            raise ValueError("an rng is required when epsilon > 0")
        # the loop below mirrors select_action / q.update exactly but stays
        # call-free on the common path; full plan runs take ~1e8 steps
        base = self.base
        hg = self.heading_gain
        qvalues = q.values
        h = q.hyperparams
        alpha, gamma = h.alpha, h.gamma
        one_minus_alpha = 1.0 - alpha
        explore = rng.random if rng is not None else None
        redraw_eps = 1.0 if learn else 0.0
        step = 0
        while step < max_steps:
            step += 1
            row = next_state[sid]
            qrow = qvalues[sid]
            if epsilon > 0.0 and explore() < epsilon:
                a = rng.randrange(N_ACTIONS)
            else:
                a = 0
                best_v = qrow[0]
                if qrow[1] > best_v:
                    a, best_v = 1, qrow[1]
                if qrow[2] > best_v:
                    a, best_v = 2, qrow[2]
                if qrow[3] > best_v:
                    a, best_v = 3, qrow[3]
                if qrow[4] > best_v:
                    a, best_v = 4, qrow[4]
                if qrow[5] > best_v:
                    a, best_v = 5, qrow[5]
                if qrow[6] > best_v:
                    a, best_v = 6, qrow[6]
                if qrow[7] > best_v:
                    a = 7
            if row[a] < 0:
                # blocked: drop the action and re-draw among the rest,
                # randomly while learning, by argmax when evaluating
                forbidden = {a}
                try:
                    while True:
                        a = select_action(q, sid, forbidden, rng, redraw_eps)
                        if row[a] >= 0:
                            break
                        forbidden.add(a)
                except NoActionAvailableError:
                    outcome = Outcome.BOXED_IN
                    break
            nsid = row[a]
            nxt = base[nsid] if hg is None else base[nsid] + hg[nsid][a]
            r = nxt - cur
            if learn:
                qrow[a] = one_minus_alpha * qrow[a] + alpha * (
                    r + gamma * max(qvalues[nsid])
                )
            if visited is not None:
                visited[sid * N_ACTIONS + a] = 1
            trajectory.append(nsid)
            actions.append(a)
            rewards.append(r)
            trace.append(nxt)
            sid = nsid
            cur = nxt
            if cur >= threshold:
                outcome = Outcome.RESCUED
                break
        positions = [self.states.position_of(s) for s in trajectory]
        return EpisodeResult(
            positions, [Action(a) for a in actions], rewards, trace, outcome, episode_index
        )

    def _train_episode(
        self,
        sid: int,
        q: QTable,
        epsilon: float,
        rng: random.Random,
        max_steps: int,
        visited: bytearray,
        best_a: list[int],
        best_v: list[float],
    ) -> tuple[int, float, Outcome]:
        """One learning episode without the per-step trajectory records.

        Behaviourally identical to ``run(..., learn=True)``: same rng draws,
        same float operations in the same order, same Q mutations. ``best_a``
        and ``best_v`` cache each row's first-index argmax and maximum and are
        kept exact across updates, which is what makes 20,000 long episodes
        affordable. ``test_episode`` holds the equivalence proof.
        """
        cur = self.sensed(sid, Action.E)
        if cur >= self.threshold_dbm:
            return 0, 0.0, Outcome.RESCUED
        threshold = self.threshold_dbm
        next_state = self.next_state
        base = self.base
        hg = self.heading_gain
        qvalues = q.values
        h = q.hyperparams
        alpha, gamma = h.alpha, h.gamma
        one_minus_alpha = 1.0 - alpha
        explore = rng.random
        randrange = rng.randrange
        outcome = Outcome.STEP_LIMIT
        cum = 0.0
        step = 0
        while step < max_steps:
            step += 1
            row = next_state[sid]
            if epsilon > 0.0 and explore() < epsilon:
                a = randrange(N_ACTIONS)
            else:
                a = best_a[sid]
            if row[a] < 0:
                forbidden = {a}
                try:
                    while True:
                        a = select_action(q, sid, forbidden, rng, 1.0)
                        if row[a] >= 0:
                            break
                        forbidden.add(a)
                except NoActionAvailableError:
                    outcome = Outcome.BOXED_IN
                    break
            nsid = row[a]
            nxt = base[nsid] if hg is None else base[nsid] + hg[nsid][a]
            r = nxt - cur
            qrow = qvalues[sid]
            new = one_minus_alpha * qrow[a] + alpha * (r + gamma * best_v[nsid])
            qrow[a] = new
            b = best_a[sid]
            if a == b:
                if new >= best_v[sid]:
                    best_v[sid] = new
                else:
                    # the old maximum dropped; rescan, first index wins ties
                    b, bv = 0, qrow[0]
                    for i in range(1, N_ACTIONS):
                        if qrow[i] > bv:
                            b, bv = i, qrow[i]
                    best_a[sid] = b
                    best_v[sid] = bv
            elif new > best_v[sid] or (new == best_v[sid] and a < b):
                best_a[sid] = a
                best_v[sid] = new
            visited[sid * N_ACTIONS + a] = 1
            cum += r
            sid = nsid
            cur = nxt
            if cur >= threshold:
                outcome = Outcome.RESCUED
                break
        if outcome is Outcome.BOXED_IN:
            step -= 1  # the aborted draw is not a completed move
        return step, cum, outcome


def run_episode(
    start: tuple[int, int],
    rss_map: RssMap,
    plan: FloorPlan,
    q: QTable,
    *,
    epsilon: float | None = None,
    rng: random.Random | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
    threshold_dbm: float | None = None,
    learn: bool = True,
) -> EpisodeResult:
    """Run one training episode, mutating ``q`` in place.

    Convenience wrapper that builds a fresh environment; batch callers should
    hold a ``SearchEnv`` and call ``run`` on it directly.
    """
    env = SearchEnv(rss_map, plan, threshold_dbm)
    eps = q.hyperparams.epsilon if epsilon is None else epsilon
    return env.run(start, q, epsilon=eps, rng=rng, max_steps=max_steps, learn=learn)


def evaluate(
    q: QTable,
    start: tuple[int, int],
    rss_map: RssMap,
    plan: FloorPlan,
    *,
    max_steps: int = DEFAULT_MAX_STEPS,
    threshold_dbm: float | None = None,
) -> EpisodeResult:
    """Greedy rollout: epsilon 0, no updates, deterministic re-draws."""
    env = SearchEnv(rss_map, plan, threshold_dbm)
    return env.run(start, q, epsilon=0.0, rng=None, max_steps=max_steps, learn=False)


def build_environment(scenario: "ScenarioConfig") -> tuple[RssMap, SearchEnv]:
    """Materialize the map and environment a scenario describes."""
    map_params, steering = scenario.map_params_and_steering()
    rss_map = build_rss_map(scenario.plan, scenario.victim, map_params)
    env = SearchEnv(rss_map, scenario.plan, scenario.threshold_dbm(), steering)
    return rss_map, env


def train(scenario: "ScenarioConfig") -> tuple[QTable, TrainingLog]:
    """Run the scenario's full training schedule.

    Episode e draws its randomness from ``Random(master_seed + e)`` and uses
    epsilon ``max(eps_min, eps0 * decay^e)``; with a random start, the start
    cell is that stream's first draw, uniform over free non-terminal cells.
    """
    _, env = build_environment(scenario)
    h = scenario.hyperparams
    q = QTable(env.states.n_states, h, rng_seed=scenario.master_seed)
    if scenario.start is not None:
        start_fixed = Position(*scenario.start)
        if env.sensed(env.states.state_of(start_fixed), Action.E) >= env.threshold_dbm:
            raise InvalidStartError(
                "configured start %r is already within rescue range" % (tuple(start_fixed),)
            )
        start_pool: list[Position] = []
    else:
        start_fixed = None
        start_pool = [
            env.states.position_of(s)
            for s in range(env.states.n_states)
            if env.base[s] < env.threshold_dbm
        ]
        if not start_pool:
            raise InvalidStartError("every free cell is already within rescue range")
    visited = bytearray(env.states.n_states * N_ACTIONS)
    records: list[EpisodeRecord] = []
    best_a = []
    best_v = []
    for qrow in q.values:
        b, bv = 0, qrow[0]
        for i in range(1, N_ACTIONS):
            if qrow[i] > bv:
                b, bv = i, qrow[i]
        best_a.append(b)
        best_v.append(bv)
    for ep in range(scenario.iterations):
        rng = random.Random(scenario.master_seed + ep)
        eps = h.epsilon * (h.epsilon_decay ** ep)
        if eps < h.epsilon_min:
            eps = h.epsilon_min
        if start_fixed is None:
            start = start_pool[rng.randrange(len(start_pool))]
        else:
            start = start_fixed
        steps, cum_reward, outcome = env._train_episode(
            env.states.state_of(start),
            q,
            eps,
            rng,
            scenario.max_steps,
            visited,
            best_a,
            best_v,
        )
        records.append(EpisodeRecord(ep, steps, cum_reward, outcome, eps))
    log = TrainingLog(
        records,
        scenario.master_seed,
        scenario.sha256(),
        env.states.n_states,
        visited,
    )
    return q, log
