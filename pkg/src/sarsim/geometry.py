"""Floor-plan geometry: the 1 m grid, the eight compass moves, and wall obstacles.

Coordinates are meters with the origin at the south-west corner. Grid cell
(x, y) covers the square [x, x+1) x [y, y+1) and its center sits at
(x + 0.5, y + 0.5). North is +y, east is +x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, NamedTuple

from .errors import InvalidStartError

SQRT2 = math.sqrt(2.0)

WALL_KINDS = ("wall", "door", "window")

# Door segments mark openings: they attenuate RF but never block flight.
FLIGHT_BLOCKING_KINDS = frozenset({"wall", "window"})

DEFAULT_CLEARANCE_M = 1.0


class Position(NamedTuple):
    x: int
    y: int


class Action(IntEnum):
    """Eight compass moves, 45 degrees apart.

    The integer order (N=0 .. NW=7) is also the tie-break order wherever an
    argmax has to pick between equal values.
    """

    N = 0
    NE = 1
    E = 2
    SE = 3
    S = 4
    SW = 5
    W = 6
    NW = 7

    @property
    def displacement(self) -> tuple[int, int]:
        return _DISPLACEMENTS[self]

    @property
    def azimuth_deg(self) -> float:
        """Direction of travel, degrees counterclockwise from east."""
        dx, dy = _DISPLACEMENTS[self]
        return math.degrees(math.atan2(dy, dx))


_DISPLACEMENTS: dict[Action, tuple[int, int]] = {
    Action.N: (0, 1),
    Action.NE: (1, 1),
    Action.E: (1, 0),
    Action.SE: (1, -1),
    Action.S: (0, -1),
    Action.SW: (-1, -1),
    Action.W: (-1, 0),
    Action.NW: (-1, 1),
}

N_ACTIONS = len(Action)


def step_distance(action: Action) -> float:
    """Length in meters of one move: 1 for cardinal, sqrt(2) for diagonal."""
    dx, dy = _DISPLACEMENTS[Action(action)]
    return SQRT2 if dx != 0 and dy != 0 else 1.0


def _orient(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _between(a: float, b: float, c: float) -> bool:
    lo, hi = (a, b) if a <= b else (b, a)
    return lo <= c <= hi


def _on_segment(ax: float, ay: float, bx: float, by: float, px: float, py: float) -> bool:
    # caller guarantees p is collinear with a-b
    return _between(ax, bx, px) and _between(ay, by, py)


def segments_intersect(
    p1: tuple[float, float],
    p2: tuple[float, float],
    q1: tuple[float, float],
    q2: tuple[float, float],
) -> bool:
    """True when closed segments p1-p2 and q1-q2 share at least one point.

    Endpoint touches and collinear overlap both count as intersection, so a
    diagonal move that clips a wall's endpoint is still a collision.
    """
    ax, ay = p1
    bx, by = p2
    cx, cy = q1
    dx, dy = q2
    d1 = _orient(cx, cy, dx, dy, ax, ay)
    d2 = _orient(cx, cy, dx, dy, bx, by)
    d3 = _orient(ax, ay, bx, by, cx, cy)
    d4 = _orient(ax, ay, bx, by, dx, dy)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if d2 == 0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    if d3 == 0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if d4 == 0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    return False


def point_segment_distance(
    px: float, py: float, ax: float, ay: float, bx: float, by: float
) -> float:
    vx, vy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    vv = vx * vx + vy * vy
    if vv == 0.0:
        t = 0.0
    else:
        t = (wx * vx + wy * vy) / vv
        t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(wx - t * vx, wy - t * vy)


@dataclass(frozen=True)
class Wall:
    """A zero-thickness segment with an RF attenuation per crossing."""

    p1: tuple[float, float]
    p2: tuple[float, float]
    kind: str = "wall"
    attenuation_db: float = 5.0

    def __post_init__(self) -> None:
        if tuple(self.p1) == tuple(self.p2):
            raise ValueError("wall endpoints coincide: %r" % (self.p1,))
        if self.kind not in WALL_KINDS:
            raise ValueError("unknown wall kind %r" % (self.kind,))
        if self.attenuation_db < 0:
            raise ValueError("attenuation_db must be >= 0")
        object.__setattr__(self, "p1", (float(self.p1[0]), float(self.p1[1])))
        object.__setattr__(self, "p2", (float(self.p2[0]), float(self.p2[1])))

    @property
    def blocks_flight(self) -> bool:
        return self.kind in FLIGHT_BLOCKING_KINDS


def segment_intersects_wall(
    p1: tuple[float, float], p2: tuple[float, float], wall: Wall
) -> bool:
    return segments_intersect(p1, p2, wall.p1, wall.p2)


@dataclass(frozen=True)
class FloorPlan:
    """A width x height cell grid plus wall segments.

    Cells whose centers lie within ``clearance_m`` of any flight-blocking
    segment are marked blocked at construction time, which keeps any free cell
    at least ``clearance_m`` away from the nearest wall on either side.
    """

    width: int
    height: int
    walls: tuple[Wall, ...] = ()
    clearance_m: float = DEFAULT_CLEARANCE_M

    def __post_init__(self) -> None:
        if int(self.width) != self.width or int(self.height) != self.height:
            raise ValueError("grid dimensions must be integers")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("grid dimensions must be positive")
        if self.clearance_m < 0:
            raise ValueError("clearance_m must be >= 0")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        object.__setattr__(self, "walls", tuple(self.walls))
        for w in self.walls:
            for ex, ey in (w.p1, w.p2):
                if not (0.0 <= ex <= self.width and 0.0 <= ey <= self.height):
                    raise ValueError(
                        "wall endpoint (%g, %g) outside the %dx%d grid"
                        % (ex, ey, self.width, self.height)
                    )
        blocking = tuple(w for w in self.walls if w.blocks_flight)
        object.__setattr__(self, "_blocking", blocking)
        blocked = set()
        for y in range(self.height):
            cy = y + 0.5
            for x in range(self.width):
                cx = x + 0.5
                for w in blocking:
                    if (
                        point_segment_distance(cx, cy, *w.p1, *w.p2)
                        <= self.clearance_m
                    ):
                        blocked.add(Position(x, y))
                        break
        object.__setattr__(self, "blocked_cells", frozenset(blocked))

    # -- cell queries ------------------------------------------------------

    @staticmethod
    def cell_center(pos: tuple[int, int]) -> tuple[float, float]:
        return (pos[0] + 0.5, pos[1] + 0.5)

    def in_bounds(self, pos: tuple[int, int]) -> bool:
        return 0 <= pos[0] < self.width and 0 <= pos[1] < self.height

    def is_free(self, pos: tuple[int, int]) -> bool:
        return self.in_bounds(pos) and Position(*pos) not in self.blocked_cells

    def free_cells(self) -> Iterator[Position]:
        """All free cells in row-major order (y rows, x within a row)."""
        for y in range(self.height):
            for x in range(self.width):
                p = Position(x, y)
                if p not in self.blocked_cells:
                    yield p

    # -- movement ----------------------------------------------------------

    def segment_blocked(self, p1: tuple[float, float], p2: tuple[float, float]) -> bool:
        """True when the segment crosses any flight-blocking wall."""
        return any(segments_intersect(p1, p2, w.p1, w.p2) for w in self._blocking)

    def apply_action(self, pos: tuple[int, int], action: Action) -> Position | None:
        """Destination of one move, or None when the move is blocked.

        Blocked means: destination out of bounds, destination cell blocked, or
        the straight line between the two cell centers crossing a wall.
        """
        if not self.is_free(pos):
            raise InvalidStartError("cannot move from blocked or out-of-bounds cell %r" % (tuple(pos),))
        dx, dy = _DISPLACEMENTS[Action(action)]
        dest = Position(pos[0] + dx, pos[1] + dy)
        if not self.in_bounds(dest) or dest in self.blocked_cells:
            return None
        if self.segment_blocked(self.cell_center(pos), self.cell_center(dest)):
            return None
        return dest

    def count_wall_crossings(
        self, p1: tuple[float, float], p2: tuple[float, float]
    ) -> tuple[int, float]:
        """Number of wall records the segment crosses and their summed attenuation.

        Doors and windows count here: this is the RF view of the plan, not the
        flight view.
        """
        count = 0
        total = 0.0
        for w in self.walls:
            if segments_intersect(p1, p2, w.p1, w.p2):
                count += 1
                total += w.attenuation_db
        return count, total

    def reachable_from(self, start: tuple[int, int]) -> set[Position]:
        """Flood fill over the move graph; includes ``start`` itself."""
        if not self.is_free(start):
            raise InvalidStartError("flood fill start %r is not a free cell" % (tuple(start),))
        seen = {Position(*start)}
        frontier = [Position(*start)]
        while frontier:
            here = frontier.pop()
            for action in Action:
                dest = self.apply_action(here, action)
                if dest is not None and dest not in seen:
                    seen.add(dest)
                    frontier.append(dest)
        return seen
