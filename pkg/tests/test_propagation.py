"""Path loss, thresholds, antenna gain, shadowing, and the RSS map."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sarsim import (
    AntennaPattern,
    DomainError,
    FloorPlan,
    Position,
    PropagationParams,
    Wall,
    build_rss_map,
    free_space_path_loss,
    rss_at,
    rss_threshold_for_distance,
)
from sarsim.propagation import (
    FSPL_CONST_DB,
    MIN_DISTANCE_M,
    SENSE_QUANTUM_DB,
    SPEED_OF_LIGHT_M_S,
    antenna_gain,
    quantize_dbm,
)


class TestFreeSpacePathLoss:
    def test_reference_value_1m(self):
        # 20 log10(2.4e9) + 20 log10(4 pi / c); about 40.05 dB
        assert free_space_path_loss(1.0, 2.4e9) == pytest.approx(
            40.05200805611548, abs=1e-12
        )

    def test_constant_term(self):
        expected = 20.0 * math.log10(4.0 * math.pi / SPEED_OF_LIGHT_M_S)
        assert FSPL_CONST_DB == expected
        assert SPEED_OF_LIGHT_M_S == 299_792_458.0

    def test_doubling_distance_adds_6dB(self):
        a = free_space_path_loss(1.0, 2.4e9)
        b = free_space_path_loss(2.0, 2.4e9)
        assert b - a == pytest.approx(20.0 * math.log10(2.0), abs=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            free_space_path_loss(0.0, 2.4e9)
        with pytest.raises(DomainError):
            free_space_path_loss(-1.0, 2.4e9)
        with pytest.raises(DomainError):
            free_space_path_loss(1.0, 0.0)

    @given(st.floats(0.1, 1000), st.floats(0.1, 1000))
    def test_monotone_in_distance(self, d1, d2):
        f = 2.4e9
        if d1 < d2:
            assert free_space_path_loss(d1, f) < free_space_path_loss(d2, f)

    @given(st.floats(1e8, 1e11), st.floats(1e8, 1e11))
    def test_monotone_in_frequency(self, f1, f2):
        if f1 < f2:
            assert free_space_path_loss(2.0, f1) < free_space_path_loss(2.0, f2)


class TestThreshold:
    def test_rescue_threshold_2m(self):
        thr = rss_threshold_for_distance(2.0, PropagationParams())
        assert thr == pytest.approx(-21.072607969395108, abs=1e-12)

    def test_threshold_1m(self):
        thr = rss_threshold_for_distance(1.0, PropagationParams())
        assert thr == pytest.approx(-15.052008056115483, abs=1e-12)

    def test_threshold_5ghz(self):
        thr = rss_threshold_for_distance(2.0, PropagationParams(frequency_hz=5e9))
        assert thr == pytest.approx(-27.447783221883356, abs=1e-12)

    def test_threshold_ignores_path_loss_exponent(self):
        # the rescue radius is defined in free space no matter the indoor n
        a = rss_threshold_for_distance(2.0, PropagationParams())
        b = rss_threshold_for_distance(2.0, PropagationParams(path_loss_exponent_n=3.5))
        assert a == b

    def test_threshold_tracks_tx_power(self):
        a = rss_threshold_for_distance(2.0, PropagationParams())
        b = rss_threshold_for_distance(2.0, PropagationParams(tx_power_dbm=30.0))
        assert b - a == pytest.approx(5.0, abs=1e-12)

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(DomainError):
            rss_threshold_for_distance(0.0, PropagationParams())


class TestAntennaPattern:
    def test_omni_flat(self):
        pat = AntennaPattern.omni()
        for az in (-720.0, -37.0, 0.0, 90.0, 181.0, 400.0):
            assert pat.gain_db(az) == 0.0

    def test_directional_peak_on_boresight(self):
        pat = AntennaPattern.directional(boresight_deg=30.0)
        assert pat.gain_db(30.0) == 0.0
        assert pat.gain_at_offset_db(0.0) == 0.0

    def test_half_power_ish_point(self):
        # cos^4 crosses -3 dB near 32.77 degrees off boresight
        pat = AntennaPattern.directional()
        g = pat.gain_at_offset_db(32.77)
        assert g == pytest.approx(40.0 * math.log10(math.cos(math.radians(32.77))), abs=1e-12)
        assert g == pytest.approx(-3.0, abs=0.02)

    def test_hard_floor_beyond_90(self):
        pat = AntennaPattern.directional()
        for off in (90.0, 90.0001, 135.0, 180.0, -90.0, -170.0):
            assert pat.gain_at_offset_db(off) == -20.0

    def test_floor_clamps_deep_nulls(self):
        # cos^4 at 80 degrees is below -20 dB; the floor wins
        pat = AntennaPattern.directional()
        assert pat.gain_at_offset_db(80.0) == -20.0

    def test_gain_is_even_in_offset(self):
        pat = AntennaPattern.directional()
        for off in (10.0, 45.0, 60.0, 89.0):
            assert pat.gain_at_offset_db(off) == pat.gain_at_offset_db(-off)

    def test_wraps_modulo_360(self):
        pat = AntennaPattern.directional()
        assert pat.gain_at_offset_db(20.0) == pat.gain_at_offset_db(380.0)
        assert pat.gain_at_offset_db(20.0) == pat.gain_at_offset_db(-340.0)

    def test_boresight_shift(self):
        pat = AntennaPattern.directional(boresight_deg=200.0)
        base = AntennaPattern.directional()
        assert pat.gain_db(215.0) == base.gain_db(15.0)

    def test_gain_never_positive(self):
        pat = AntennaPattern.directional(exponent_k=2.0, front_to_back_floor_db=-30.0)
        for off in range(0, 360, 7):
            assert pat.gain_at_offset_db(float(off)) <= 0.0

    def test_antenna_gain_helper(self):
        pat = AntennaPattern.directional(boresight_deg=90.0)
        assert antenna_gain(pat, 90.0) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            AntennaPattern(kind="sector")
        with pytest.raises(ValueError):
            AntennaPattern.directional(exponent_k=0.0)
        with pytest.raises(ValueError):
            AntennaPattern(kind="directional", front_to_back_floor_db=1.0)


class TestPropagationParams:
    def test_defaults(self):
        p = PropagationParams()
        assert p.tx_power_dbm == 25.0
        assert p.frequency_hz == 2.4e9
        assert p.path_loss_exponent_n == 2.0
        assert p.tx_pattern.kind == "omnidirectional"

    def test_validation(self):
        with pytest.raises(ValueError):
            PropagationParams(frequency_hz=0.0)
        with pytest.raises(ValueError):
            PropagationParams(path_loss_exponent_n=0.5)
        with pytest.raises(ValueError):
            PropagationParams(shadowing_sigma_db=-1.0)
        with pytest.raises(ValueError):
            PropagationParams(shadowing_seed=-3)


class TestRssAt:
    plan = FloorPlan(10, 10)

    def test_free_space_value(self):
        # 4 m east, omni: exactly power minus FSPL(4 m)
        got = rss_at((1.0, 5.0), (5.0, 5.0), self.plan, PropagationParams())
        assert got == pytest.approx(25.0 - free_space_path_loss(4.0, 2.4e9), abs=1e-12)

    def test_distance_clamp(self):
        p = PropagationParams()
        near = rss_at((1.0, 5.0), (1.2, 5.0), self.plan, p)
        at_clamp = rss_at((1.0, 5.0), (1.0 + MIN_DISTANCE_M, 5.0), self.plan, p)
        assert near == pytest.approx(at_clamp, abs=1e-12)

    def test_coincident_points_rejected(self):
        with pytest.raises(DomainError):
            rss_at((2.0, 2.0), (2.0, 2.0), self.plan, PropagationParams())

    def test_out_of_grid_rejected(self):
        with pytest.raises(DomainError):
            rss_at((-0.5, 2.0), (2.0, 2.0), self.plan, PropagationParams())
        with pytest.raises(DomainError):
            rss_at((2.0, 2.0), (2.0, 11.0), self.plan, PropagationParams())

    def test_wall_attenuation_subtracts(self):
        walled = FloorPlan(10, 10, (Wall((4, 0), (4, 10)),), clearance_m=0.4)
        p = PropagationParams()
        blocked = rss_at((1.0, 5.0), (7.0, 5.0), walled, p)
        clear = rss_at((1.0, 5.0), (7.0, 5.0), self.plan, p)
        assert clear - blocked == pytest.approx(5.0, abs=1e-12)

    def test_reciprocity_omni(self):
        p = PropagationParams()
        ab = rss_at((1.3, 2.1), (6.7, 8.4), self.plan, p)
        ba = rss_at((6.7, 8.4), (1.3, 2.1), self.plan, p)
        assert ab == pytest.approx(ba, abs=1e-12)

    def test_rx_pattern_faces_back_toward_tx(self):
        # rx boresight pointing away from tx sees the -20 dB floor
        p_toward = PropagationParams(
            rx_pattern=AntennaPattern.directional(boresight_deg=180.0)
        )
        p_away = PropagationParams(
            rx_pattern=AntennaPattern.directional(boresight_deg=0.0)
        )
        toward = rss_at((1.0, 5.0), (5.0, 5.0), self.plan, p_toward)
        away = rss_at((1.0, 5.0), (5.0, 5.0), self.plan, p_away)
        assert toward - away == pytest.approx(20.0, abs=1e-12)

    def test_higher_exponent_hurts(self):
        a = rss_at((1.0, 5.0), (5.0, 5.0), self.plan, PropagationParams())
        b = rss_at(
            (1.0, 5.0), (5.0, 5.0), self.plan,
            PropagationParams(path_loss_exponent_n=3.0),
        )
        assert b < a
        assert a - b == pytest.approx(10.0 * math.log10(4.0), abs=1e-12)

    def test_rss_decreases_along_los_ray(self):
        p = PropagationParams()
        values = [
            rss_at((0.5, 5.0), (0.5 + d, 5.0), self.plan, p)
            for d in (1.0, 2.0, 3.5, 5.0, 7.0, 9.0)
        ]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_radial_symmetry_omni(self):
        p = PropagationParams()
        tx = (5.0, 5.0)
        around = [
            rss_at(tx, (5.0 + 3.0, 5.0), self.plan, p),
            rss_at(tx, (5.0 - 3.0, 5.0), self.plan, p),
            rss_at(tx, (5.0, 5.0 + 3.0), self.plan, p),
            rss_at(tx, (5.0, 5.0 - 3.0), self.plan, p),
        ]
        assert max(around) - min(around) < 1e-12


class TestShadowing:
    plan = FloorPlan(6, 6)

    def test_off_by_default(self):
        p0 = PropagationParams()
        p1 = PropagationParams(shadowing_seed=9)
        a = rss_at((1.0, 1.0), (4.0, 4.0), self.plan, p0)
        b = rss_at((1.0, 1.0), (4.0, 4.0), self.plan, p1)
        assert a == b

    def test_frozen_per_cell(self):
        p = PropagationParams(shadowing_sigma_db=4.0, shadowing_seed=7)
        a = rss_at((1.0, 1.0), (4.2, 4.7), self.plan, p)
        b = rss_at((1.0, 1.0), (4.2, 4.7), self.plan, p)
        assert a == b

    def test_seed_changes_field(self):
        pa = PropagationParams(shadowing_sigma_db=4.0, shadowing_seed=1)
        pb = PropagationParams(shadowing_sigma_db=4.0, shadowing_seed=2)
        a = rss_at((1.0, 1.0), (4.0, 4.0), self.plan, pa)
        b = rss_at((1.0, 1.0), (4.0, 4.0), self.plan, pb)
        assert a != b

    def test_zero_mean_large_sample(self):
        p = PropagationParams(shadowing_sigma_db=6.0, shadowing_seed=3)
        base = PropagationParams()
        plan = FloorPlan(40, 40)
        tx = (0.23, 0.31)
        diffs = []
        for y in range(0, 40, 2):
            for x in range(0, 40, 2):
                rx = (x + 0.5, y + 0.5)
                diffs.append(rss_at(tx, rx, plan, p) - rss_at(tx, rx, plan, base))
        mean = sum(diffs) / len(diffs)
        # 400 samples at sigma 6: the mean should sit within ~3 SE of zero
        assert abs(mean) < 1.0


class TestQuantize:
    def test_idempotent(self):
        for v in (-21.07, 0.0, 13.372, -88.8881):
            assert quantize_dbm(quantize_dbm(v)) == quantize_dbm(v)

    def test_close_to_input(self):
        for v in (-21.07, 3.14159, -64.001):
            assert abs(quantize_dbm(v) - v) <= SENSE_QUANTUM_DB / 2

    def test_grid_multiples_fixed(self):
        v = 12345.0 * SENSE_QUANTUM_DB
        assert quantize_dbm(v) == v

    @given(st.floats(-120, 30), st.floats(-120, 30))
    def test_differences_telescope(self, a, b):
        qa, qb = quantize_dbm(a), quantize_dbm(b)
        # on-grid differences are exact multiples of the quantum
        diff = qb - qa
        assert diff == round(diff / SENSE_QUANTUM_DB) * SENSE_QUANTUM_DB


class TestRssMap:
    def test_blocked_cells_hold_nan(self):
        plan = FloorPlan(6, 4, (Wall((3, 0), (3, 4)),), clearance_m=1.0)
        m = build_rss_map(plan, (0.53, 0.31), PropagationParams())
        assert np.isnan(m.grid[1, 3])
        assert np.isfinite(m.grid[1, 0])

    def test_rss_at_cell_matches_grid(self, tiny_map):
        _, m = tiny_map
        assert m.rss_at_cell((2, 1)) == float(m.grid[1, 2])

    def test_rss_at_cell_rejects_blocked(self):
        plan = FloorPlan(6, 4, (Wall((3, 0), (3, 4)),), clearance_m=1.0)
        m = build_rss_map(plan, (0.53, 0.31), PropagationParams())
        with pytest.raises(DomainError):
            m.rss_at_cell((3, 1))

    def test_grid_is_readonly(self, tiny_map):
        _, m = tiny_map
        with pytest.raises(ValueError):
            m.grid[0, 0] = 0.0

    def test_items_row_major_and_complete(self, tiny_map):
        plan, m = tiny_map
        cells = [p for p, _ in m.items()]
        assert cells == list(plan.free_cells())

    def test_min_max(self, tiny_map):
        _, m = tiny_map
        values = [v for _, v in m.items()]
        assert m.min_dbm == min(values)
        assert m.max_dbm == max(values)

    def test_peak_at_transmitter_cell(self, tiny_map):
        plan, m = tiny_map
        best = max(m.items(), key=lambda item: item[1])[0]
        assert best == Position(4, 3)  # tx sits at (4.31, 3.17)

    def test_matches_pointwise_rss(self, tiny_map):
        plan, m = tiny_map
        p = PropagationParams()
        for pos, value in m.items():
            assert value == rss_at(m.tx_position, plan.cell_center(pos), plan, p)

    def test_tx_outside_grid_rejected(self):
        with pytest.raises(DomainError):
            build_rss_map(FloorPlan(4, 4), (5.0, 1.0), PropagationParams())

    def test_tx_on_cell_center_is_clamped_peak(self):
        plan = FloorPlan(4, 4)
        p = PropagationParams()
        m = build_rss_map(plan, (1.5, 1.5), p)
        expected = p.tx_power_dbm - free_space_path_loss(MIN_DISTANCE_M, p.frequency_hz)
        assert m.rss_at_cell((1, 1)) == pytest.approx(expected, abs=1e-12)
