"""Surrogate RF propagation: log-distance path loss, wall losses, antenna gain.

The field is a deterministic function of the floor plan and the transmitter
setup. Received power in dBm at a point is

    rss = tx_power - (10 n log10 d + 20 log10 f + 20 log10(4 pi / c))
          - sum of wall attenuations + G_tx + G_rx + X

with d clamped below at 0.5 m and X an optional per-cell lognormal shadowing
term (in dB) that is frozen by (shadowing_seed, cell index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .errors import DomainError
from .geometry import FloorPlan, Position

SPEED_OF_LIGHT_M_S = 299_792_458.0

# 20 log10(4 pi / c): the frequency-form FSPL constant, about -147.55 dB.
FSPL_CONST_DB = 20.0 * math.log10(4.0 * math.pi / SPEED_OF_LIGHT_M_S)

MIN_DISTANCE_M = 0.5

# Sensed RSS is snapped to a dyadic grid so that sums of per-step reward
# differences telescope exactly in float arithmetic. 2^-20 dB is far below
# anything physical and keeps every partial sum on the grid.
SENSE_QUANTUM_DB = 2.0 ** -20


def quantize_dbm(rss_dbm: float) -> float:
    """Snap a dBm value onto the dyadic sensing grid."""
    return round(rss_dbm / SENSE_QUANTUM_DB) * SENSE_QUANTUM_DB


def free_space_path_loss(distance_m: float, frequency_hz: float) -> float:
    """Free-space path loss in dB at distance d and frequency f.

    FSPL = 20 log10(d) + 20 log10(f) + 20 log10(4 pi / c); about 40.05 dB at
    1 m and 2.4 GHz.
    """
    if distance_m <= 0:
        raise DomainError("distance must be > 0, got %g" % distance_m)
    if frequency_hz <= 0:
        raise DomainError("frequency must be > 0, got %g" % frequency_hz)
    return 20.0 * math.log10(distance_m) + 20.0 * math.log10(frequency_hz) + FSPL_CONST_DB


@dataclass(frozen=True)
class AntennaPattern:
    """Azimuthal gain model, either omnidirectional or a cos^k beam.

    The directional gain is 10 log10(max(cos^k(offset), floor)) with the
    offset clamped to +/-90 degrees; beyond that only the front-to-back floor
    leaks through. Peak gain is exactly 0 dB either way.
    """

    kind: str = "omnidirectional"
    exponent_k: float = 4.0
    front_to_back_floor_db: float = -20.0
    boresight_deg: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("omnidirectional", "directional"):
            raise ValueError("unknown antenna kind %r" % (self.kind,))
        if self.exponent_k <= 0:
            raise ValueError("exponent_k must be > 0")
        if self.front_to_back_floor_db > 0:
            raise ValueError("front_to_back_floor_db must be <= 0")

    @classmethod
    def omni(cls) -> "AntennaPattern":
        return cls(kind="omnidirectional")

    @classmethod
    def directional(
        cls,
        boresight_deg: float = 0.0,
        exponent_k: float = 4.0,
        front_to_back_floor_db: float = -20.0,
    ) -> "AntennaPattern":
        return cls(
            kind="directional",
            exponent_k=exponent_k,
            front_to_back_floor_db=front_to_back_floor_db,
            boresight_deg=boresight_deg,
        )

    def gain_at_offset_db(self, offset_deg: float) -> float:
        """Gain at an angle measured from boresight."""
        if self.kind == "omnidirectional":
            return 0.0
        off = abs((offset_deg + 180.0) % 360.0 - 180.0)
        if off >= 90.0:
            return self.front_to_back_floor_db
        g = math.cos(math.radians(off)) ** self.exponent_k
        g_floor = 10.0 ** (self.front_to_back_floor_db / 10.0)
        return 10.0 * math.log10(max(g, g_floor))

    def gain_db(self, azimuth_deg: float) -> float:
        """Gain toward an absolute azimuth (degrees CCW from east)."""
        if self.kind == "omnidirectional":
            return 0.0
        return self.gain_at_offset_db(azimuth_deg - self.boresight_deg)


def antenna_gain(pattern: AntennaPattern, azimuth_deg: float) -> float:
    return pattern.gain_db(azimuth_deg)


@dataclass(frozen=True)
class PropagationParams:
    tx_power_dbm: float = 25.0
    frequency_hz: float = 2.4e9
    path_loss_exponent_n: float = 2.0
    shadowing_sigma_db: float = 0.0
    shadowing_seed: int = 0
    tx_pattern: AntennaPattern = field(default_factory=AntennaPattern.omni)
    rx_pattern: AntennaPattern = field(default_factory=AntennaPattern.omni)

    def __post_init__(self) -> None:
        if self.frequency_hz <= 0:
            raise ValueError("frequency_hz must be > 0")
        if self.path_loss_exponent_n < 1.0:
            raise ValueError("path_loss_exponent_n must be >= 1")
        if self.shadowing_sigma_db < 0:
            raise ValueError("shadowing_sigma_db must be >= 0")
        if self.shadowing_seed < 0:
            raise ValueError("shadowing_seed must be >= 0")


def rss_threshold_for_distance(distance_m: float, params: PropagationParams) -> float:
    """Rescue threshold: the free-space RSS at ``distance_m`` with 0 dB gains.

    By convention this uses n=2 and no walls regardless of the scenario, so
    -21.07 dBm at 2 m for a 25 dBm transmitter at 2.4 GHz.
    """
    if distance_m <= 0:
        raise DomainError("distance must be > 0, got %g" % distance_m)
    return params.tx_power_dbm - free_space_path_loss(distance_m, params.frequency_hz)


def _cell_of(plan: FloorPlan, point: tuple[float, float]) -> Position:
    x = min(int(math.floor(point[0])), plan.width - 1)
    y = min(int(math.floor(point[1])), plan.height - 1)
    return Position(max(x, 0), max(y, 0))


def _shadowing_db(params: PropagationParams, plan: FloorPlan, cell: Position) -> float:
    if params.shadowing_sigma_db == 0.0:
        return 0.0
    index = cell.y * plan.width + cell.x
    rng = np.random.default_rng([params.shadowing_seed, index])
    return float(rng.normal(0.0, params.shadowing_sigma_db))


def rss_at(
    tx: tuple[float, float],
    rx: tuple[float, float],
    plan: FloorPlan,
    params: PropagationParams,
) -> float:
    """Received power in dBm at point ``rx`` from a transmitter at ``tx``."""
    txp = (float(tx[0]), float(tx[1]))
    rxp = (float(rx[0]), float(rx[1]))
    if txp == rxp:
        raise DomainError("tx and rx coincide at %r" % (txp,))
    for label, (px, py) in (("tx", txp), ("rx", rxp)):
        if not (0.0 <= px <= plan.width and 0.0 <= py <= plan.height):
            raise DomainError("%s point (%g, %g) outside the grid" % (label, px, py))
    dx = rxp[0] - txp[0]
    dy = rxp[1] - txp[1]
    d = max(math.hypot(dx, dy), MIN_DISTANCE_M)
    loss = (
        10.0 * params.path_loss_exponent_n * math.log10(d)
        + 20.0 * math.log10(params.frequency_hz)
        + FSPL_CONST_DB
    )
    _, wall_att = plan.count_wall_crossings(txp, rxp)
    azimuth = math.degrees(math.atan2(dy, dx))
    g_tx = params.tx_pattern.gain_db(azimuth)
    g_rx = params.rx_pattern.gain_db(azimuth + 180.0)
    shadow = _shadowing_db(params, plan, _cell_of(plan, rxp))
    return params.tx_power_dbm - loss - wall_att + g_tx + g_rx + shadow


class RssMap:
    """Per-cell RSS field for one fixed transmitter and antenna setup.

    Values are stored on an (height, width) float grid with NaN marking
    blocked cells; every free cell holds exactly one finite dBm value.
    """

    def __init__(
        self,
        plan: FloorPlan,
        tx_position: tuple[float, float],
        params: PropagationParams,
        grid: np.ndarray,
    ):
        if grid.shape != (plan.height, plan.width):
            raise ValueError("grid shape %r does not match plan" % (grid.shape,))
        self.plan = plan
        self.tx_position = (float(tx_position[0]), float(tx_position[1]))
        self.params = params
        self.grid = grid
        self.grid.flags.writeable = False

    def rss_at_cell(self, pos: tuple[int, int]) -> float:
        if not self.plan.is_free(pos):
            raise DomainError("no RSS stored for blocked cell %r" % (tuple(pos),))
        return float(self.grid[pos[1], pos[0]])

    def items(self) -> Iterator[tuple[Position, float]]:
        """(cell, rss) pairs in row-major order."""
        for pos in self.plan.free_cells():
            yield pos, float(self.grid[pos.y, pos.x])

    @property
    def min_dbm(self) -> float:
        return float(np.nanmin(self.grid))

    @property
    def max_dbm(self) -> float:
        return float(np.nanmax(self.grid))


def build_rss_map(
    plan: FloorPlan, tx: tuple[float, float], params: PropagationParams
) -> RssMap:
    """Evaluate the field at the center of every free cell."""
    txp = (float(tx[0]), float(tx[1]))
    if not (0.0 <= txp[0] <= plan.width and 0.0 <= txp[1] <= plan.height):
        raise DomainError("tx point %r outside the grid" % (txp,))
    grid = np.full((plan.height, plan.width), np.nan, dtype=np.float64)
    for pos in plan.free_cells():
        center = plan.cell_center(pos)
        if center == txp:
            # transmitter sits exactly on this cell center: clamp the distance
            # and take both patterns at their peak
            loss = (
                10.0 * params.path_loss_exponent_n * math.log10(MIN_DISTANCE_M)
                + 20.0 * math.log10(params.frequency_hz)
                + FSPL_CONST_DB
            )
            value = params.tx_power_dbm - loss + _shadowing_db(params, plan, pos)
        else:
            value = rss_at(txp, center, plan, params)
        grid[pos.y, pos.x] = value
    return RssMap(plan, txp, params, grid)
