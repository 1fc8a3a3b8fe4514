"""Shared fixtures: small crafted plans plus the heavyweight training runs
that several acceptance criteria reuse."""

import random

import pytest

from sarsim import (
    AntennaPattern,
    FloorPlan,
    Hyperparams,
    Position,
    PropagationParams,
    ScenarioConfig,
    Wall,
    build_rss_map,
)


def open10_scenario(master_seed=0, iterations=5000):
    """10x10 open plan; victim cell (9,9); rescue lobe covers only (8,8)."""
    return ScenarioConfig(
        plan=FloorPlan(10, 10, ()),
        victim=(9.37, 9.31),
        start=Position(0, 0),
        propagation=PropagationParams(
            tx_pattern=AntennaPattern.directional(boresight_deg=220.0, exponent_k=8.0)
        ),
        rx_heading_aligned=False,
        hyperparams=Hyperparams(),
        iterations=iterations,
        max_steps=200,
        master_seed=master_seed,
    )


def split15_scenario(master_seed=0, iterations=20000):
    """15x10 plan split by one interior wall, random starts.

    The sub-cell rescue radius keeps every cell below the rescue threshold,
    so each episode spends its whole step budget exploring; that is what lets
    the learned policy resolve near-tie action rankings across the entire
    plan instead of only along the corridor to the victim.
    """
    return ScenarioConfig(
        plan=FloorPlan(15, 10, (Wall((7, 2), (7, 10)),), clearance_m=1.0),
        victim=(12.23, 5.79),
        start=None,
        propagation=PropagationParams(
            tx_pattern=AntennaPattern.directional(boresight_deg=185.0)
        ),
        rx_heading_aligned=False,
        hyperparams=Hyperparams(),
        iterations=iterations,
        max_steps=2400,
        master_seed=master_seed,
        terminal_distance_m=0.75,
    )


CORRIDOR_WALLS = (
    Wall((10, 0), (10, 4)),
    Wall((20, 4), (20, 8)),
    Wall((30, 0), (30, 4)),
)


def corridor_scenario(rx_kind, master_seed=0, iterations=3000):
    """40x8 corridor with three baffles; only the UAV antenna varies.

    The step cap is ~1.5x the shortest detour path, so an undirected walk
    cannot stumble into a rescue: the first rescued episode marks the point
    where the learned policy steers most of the course. A broad receive lobe
    (k=1, -6 dB floor) keeps the heading-alignment bonus a gradient toward
    the transmitter without drowning the underlying range signal.
    """
    return ScenarioConfig(
        plan=FloorPlan(40, 8, CORRIDOR_WALLS),
        victim=(37.29, 3.17),
        start=Position(1, 1),
        propagation=PropagationParams(
            tx_pattern=AntennaPattern.directional(boresight_deg=180.0),
            rx_pattern=(
                AntennaPattern.directional(exponent_k=1.0, front_to_back_floor_db=-6.0)
                if rx_kind == "directional"
                else AntennaPattern.omni()
            ),
        ),
        rx_heading_aligned=True,
        hyperparams=Hyperparams(),
        iterations=iterations,
        max_steps=65,
        master_seed=master_seed,
    )


@pytest.fixture(scope="session")
def tiny_map():
    """5x4 open map with an omni transmitter, for quick state/episode tests."""
    plan = FloorPlan(5, 4, ())
    params = PropagationParams()
    return plan, build_rss_map(plan, (4.31, 3.17), params)


@pytest.fixture
def rng():
    return random.Random(1234)
