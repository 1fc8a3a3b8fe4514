"""Tabular Q-learning: RSS-keyed states, the update rule, policies, an oracle.

States are labeled by the cell's RSS value rather than by coordinates: the
agent only ever observes signal strength, and on a well-formed map the
labeling is a bijection between free cells and states. Labels use a 1e-6 dB
quantization; construction fails loudly if two cells collide at that
resolution.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    NoActionAvailableError,
    NonTerminationError,
    StateUniquenessError,
    UnknownStateError,
)
from .geometry import Action, FloorPlan, N_ACTIONS, Position
from .propagation import RssMap, quantize_dbm

StateId = int

# Resolution of the RSS -> state lookup. Fine enough that crafted plans never
# collide, coarse enough that float noise cannot split one cell in two.
STATE_KEY_QUANTUM_DB = 1e-6


def _state_key(rss_dbm: float) -> int:
    return round(rss_dbm / STATE_KEY_QUANTUM_DB)


class StateSpace:
    """Bijective mapping between the free cells of a map and state ids.

    Ids are assigned in row-major cell order, so they are stable across runs
    of the same scenario.
    """

    def __init__(self, rss_map: RssMap):
        self._map = rss_map
        self._cells: list[Position] = []
        self._by_cell: dict[Position, StateId] = {}
        self._by_key: dict[int, StateId] = {}
        self._rss: list[float] = []
        for pos, rss in rss_map.items():
            key = _state_key(rss)
            if key in self._by_key:
                other = self._cells[self._by_key[key]]
                raise StateUniquenessError(
                    "cells %r and %r have the same RSS to within %g dB"
                    % (tuple(other), tuple(pos), STATE_KEY_QUANTUM_DB)
                )
            sid = len(self._cells)
            self._by_key[key] = sid
            self._by_cell[pos] = sid
            self._cells.append(pos)
            self._rss.append(rss)

    @property
    def n_states(self) -> int:
        return len(self._cells)

    def state_of(self, pos: tuple[int, int]) -> StateId:
        try:
            return self._by_cell[Position(*pos)]
        except KeyError:
            raise UnknownStateError("cell %r has no state (blocked or out of bounds)" % (tuple(pos),)) from None

    def position_of(self, sid: StateId) -> Position:
        return self._cells[sid]

    def rss_of(self, sid: StateId) -> float:
        return self._rss[sid]

    def state_for_rss(self, rss_dbm: float) -> StateId:
        """Look up the state whose stored RSS matches a sensed value."""
        sid = self._by_key.get(_state_key(rss_dbm))
        if sid is None:
            raise UnknownStateError(
                "no state with RSS %.6f dBm; map and sensor disagree" % rss_dbm
            )
        return sid


@dataclass(frozen=True)
class Hyperparams:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon: float = 1.0
    epsilon_decay: float = 0.999
    epsilon_min: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        if not 0.0 < self.epsilon_decay <= 1.0:
            raise ValueError("epsilon_decay must be in (0, 1]")
        if not 0.0 <= self.epsilon_min <= self.epsilon:
            raise ValueError("epsilon_min must be in [0, epsilon]")


class QTable:
    """A dense |S| x 8 table of action values, zero-initialized.

    Rows are plain Python lists: the training loop touches single entries
    tens of millions of times and list indexing is what keeps that cheap.
    """

    def __init__(self, n_states: int, hyperparams: Hyperparams | None = None, rng_seed: int = 0):
        if n_states <= 0:
            raise ValueError("n_states must be positive")
        self.values: list[list[float]] = [[0.0] * N_ACTIONS for _ in range(n_states)]
        self.hyperparams = hyperparams if hyperparams is not None else Hyperparams()
        self.rng_seed = rng_seed

    @property
    def n_states(self) -> int:
        return len(self.values)

    def update(self, s: StateId, a: Action, reward: float, s_next: StateId) -> None:
        """One Bellman backup: Q <- (1-alpha) Q + alpha (r + gamma max Q')."""
        h = self.hyperparams
        row = self.values[s]
        row[a] = (1.0 - h.alpha) * row[a] + h.alpha * (
            reward + h.gamma * max(self.values[s_next])
        )

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def save_csv(self, path) -> None:
        """Full-precision export, one row per (state, action)."""
        with open(path, "w", newline="\n") as fh:
            fh.write("state_id,action,value\n")
            for sid, row in enumerate(self.values):
                for action in Action:
                    fh.write("%d,%s,%s\n" % (sid, action.name, repr(row[action])))

    @classmethod
    def load_csv(cls, path, hyperparams: Hyperparams | None = None, rng_seed: int = 0) -> "QTable":
        entries: dict[tuple[int, int], float] = {}
        max_sid = -1
        with open(path, "r", newline="") as fh:
            header = fh.readline().strip()
            if header != "state_id,action,value":
                raise ValueError("unrecognized Q-table header %r" % header)
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                sid_s, action_s, value_s = line.split(",")
                sid = int(sid_s)
                entries[(sid, Action[action_s])] = float(value_s)
                max_sid = max(max_sid, sid)
        if max_sid < 0:
            raise ValueError("Q-table file %s holds no rows" % path)
        table = cls(max_sid + 1, hyperparams, rng_seed)
        for (sid, a), v in entries.items():
            table.values[sid][a] = v
        return table


def q_update(q: QTable, s: StateId, a: Action, reward: float, s_next: StateId) -> None:
    q.update(s, a, reward, s_next)


def select_action(
    q: QTable,
    s: StateId,
    forbidden: Iterable[Action] = (),
    rng: random.Random | None = None,
    epsilon: float | None = None,
) -> Action:
    """Epsilon-greedy choice over the actions not in ``forbidden``.

    With probability epsilon the pick is uniform over the permitted actions,
    otherwise it is the permitted argmax with ties broken by the lowest
    action index. Epsilon defaults to the table's configured value. At
    epsilon 0 no randomness is consumed at all.
    """
    eps = q.hyperparams.epsilon if epsilon is None else epsilon
    banned = set(forbidden)
    permitted = [a for a in range(N_ACTIONS) if a not in banned]
    if not permitted:
        raise NoActionAvailableError("all %d actions forbidden for state %d" % (N_ACTIONS, s))
    if eps > 0.0:
        if rng is None:
            raise ValueError("an rng is required when epsilon > 0")
        if rng.random() < eps:
            return Action(permitted[rng.randrange(len(permitted))])
    row = q.values[s]
    best = permitted[0]
    best_v = row[best]
    for a in permitted[1:]:
        if row[a] > best_v:
            best, best_v = a, row[a]
    return Action(best)


def greedy_policy(q: QTable) -> list[Action]:
    """Argmax action per state, lowest index winning ties."""
    policy = []
    for row in q.values:
        best = 0
        best_v = row[0]
        for a in range(1, N_ACTIONS):
            if row[a] > best_v:
                best, best_v = a, row[a]
        policy.append(Action(best))
    return policy


@dataclass
class OracleResult:
    """Converged optimal values and policy for the static rescue MDP."""

    states: StateSpace
    values: np.ndarray            # V*(s); 0 for terminal or stuck states
    action_values: np.ndarray     # Q*(s, a); -inf where a is unavailable
    policy: list[Action | None]   # None for terminal or stuck states
    terminal: np.ndarray          # bool per state
    sweeps: int

    def top_gap(self, sid: StateId) -> float:
        """Best minus second-best action value; inf with a single action."""
        row = np.sort(self.action_values[sid])[::-1]
        if len(row) < 2 or not np.isfinite(row[1]):
            return float("inf")
        return float(row[0] - row[1])


def value_iteration_oracle(
    rss_map: RssMap,
    plan: FloorPlan,
    gamma: float,
    terminal_threshold_dbm: float,
    tol: float = 1e-9,
    max_sweeps: int = 1_000_000,
) -> OracleResult:
    """Solve the same MDP the learner faces by synchronous value iteration.

    Transitions come straight from ``plan.apply_action`` and rewards are
    differences of (sensing-quantized) map values, so this is an independent
    check on anything the episode loop precomputes. Terminal states are
    absorbing with value 0. Sweeps run until the largest value change drops
    below ``tol``.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must be in [0, 1)")
    states = StateSpace(rss_map)
    n = states.n_states
    base = np.array([quantize_dbm(states.rss_of(s)) for s in range(n)])
    terminal = base >= terminal_threshold_dbm

    next_state = np.full((n, N_ACTIONS), -1, dtype=np.int64)
    for sid in range(n):
        pos = states.position_of(sid)
        for action in Action:
            dest = plan.apply_action(pos, action)
            if dest is not None:
                next_state[sid, action] = states.state_of(dest)

    available = (next_state >= 0) & ~terminal[:, None]
    ns_safe = np.where(next_state >= 0, next_state, 0)
    rewards = np.where(available, base[ns_safe] - base[:, None], 0.0)

    values = np.zeros(n)
    for sweep in range(1, max_sweeps + 1):
        q = np.where(available, rewards + gamma * values[ns_safe], -np.inf)
        new_values = np.max(q, axis=1)
        # terminal states absorb; stuck states (no available action) hold 0
        new_values[terminal] = 0.0
        new_values[~np.isfinite(new_values)] = 0.0
        delta = float(np.max(np.abs(new_values - values)))
        values = new_values
        if delta < tol:
            break
    else:
        raise NonTerminationError(
            "value iteration did not converge in %d sweeps (last delta %g)"
            % (max_sweeps, delta)
        )

    action_values = np.where(available, rewards + gamma * values[ns_safe], -np.inf)
    policy: list[Action | None] = []
    for sid in range(n):
        if terminal[sid] or not available[sid].any():
            policy.append(None)
        else:
            policy.append(Action(int(np.argmax(action_values[sid]))))
    return OracleResult(states, values, action_values, policy, terminal, sweep)
