import math
from collections import defaultdict

import pytest

from src.config import EARTH_RADIUS_M
from src.discretization import (
    compressed_size,
    data_volume,
    discretize,
    observation_profit,
    processing_time,
    reprice,
    slot_offsets,
)
from src.orbit_geometry import VisibleTimeWindow, angular_velocity_rad_s, compute_vtws
from tests.conftest import make_pointing, make_satellite, make_scenario


@pytest.mark.parametrize(
    "length, tau, step, expected",
    [
        (25.0, 5.0, 10.0, [0.0, 10.0, 20.0]),
        (20.0, 5.0, 10.0, [0.0, 10.0]),
        (5.0, 5.0, 10.0, [0.0]),
        (4.0, 5.0, 10.0, []),
        (35.0, 5.0, 10.0, [0.0, 10.0, 20.0, 30.0]),
        (35.0, 3.0, 10.0, [0.0, 10.0, 20.0, 30.0]),
    ],
)
def test_slot_offsets(length, tau, step, expected):
    assert slot_offsets(length, tau, step) == expected


def test_data_volume_nadir_frame():
    sat = make_satellite()
    omega = angular_velocity_rad_s(600_000.0)
    bits = data_volume(make_pointing(gsd=0.5, swath=5000.0), 2.0, sat, omega)
    along = 5000.0 + 2.0 * EARTH_RADIUS_M * omega
    assert bits == pytest.approx(5000.0 * along / 0.25 * 11)


def test_data_volume_reference_frame():
    # 5 km swath, 1 s at nadir, 0.5 m/px, 11-bit pixels, 600 km orbit
    sat = make_satellite()
    omega = math.sqrt(3.986004418e14 / (6_371_000.0 + 600_000.0) ** 3)
    assert omega == pytest.approx(1.0848e-3, rel=2e-4)
    bits = data_volume(make_pointing(gsd=0.5, swath=5000.0), 1.0, sat, angular_velocity_rad_s(600_000.0))
    expected = 5000.0 * (5000.0 + 1.0 * 6_371_000.0 * omega) / 0.5**2 * 11
    assert bits == pytest.approx(expected, rel=1e-9)
    assert bits == pytest.approx(2.62e9, rel=2e-3)


def test_data_volume_square_frame_without_ground_track():
    bits = data_volume(make_pointing(gsd=0.5, swath=5000.0), 0.0, make_satellite(), 1e-3)
    assert bits == pytest.approx(5000.0**2 / 0.25 * 11, rel=1e-9)


def test_data_volume_shrinks_with_coarser_gsd():
    sat = make_satellite()
    omega = angular_velocity_rad_s(600_000.0)
    fine = data_volume(make_pointing(gsd=0.5, swath=5000.0), 2.0, sat, omega)
    coarse = data_volume(make_pointing(gsd=1.0, swath=5000.0), 2.0, sat, omega)
    assert coarse == pytest.approx(fine / 4)


def test_processing_time():
    sat = make_satellite()
    assert processing_time(1.44e10, sat) == pytest.approx(1.44e10 * 100 / (8 * 1.8e9))


def test_processing_time_reference_frame():
    assert processing_time(2.62e9, make_satellite()) == pytest.approx(2.62e9 * 100 / (8 * 1.8e9), rel=1e-9)
    assert processing_time(2.62e9, make_satellite()) == pytest.approx(18.19444444444, rel=1e-9)
    assert processing_time(0.0, make_satellite()) == 0.0


def test_processing_time_halves_with_twice_the_cores():
    base = processing_time(1e9, make_satellite())
    assert processing_time(1e9, make_satellite(n_cores=16)) == pytest.approx(base / 2, rel=1e-12)


def test_compressed_size():
    assert compressed_size(1e6, 10.0) == 1e5
    assert compressed_size(1e6, 1.0) == 1e6
    with pytest.raises(ValueError):
        compressed_size(1e6, 0.5)


@pytest.mark.parametrize(
    "gsd, delta_t, delta_max, expected",
    [(0.5, 1, 1, 1.0), (1.0, 2, 4, 0.25), (0.5, 3, 3, 1.0), (2.0, 1, 1, 0.25)],
)
def test_observation_profit(gsd, delta_t, delta_max, expected):
    assert observation_profit(gsd, 0.5, delta_t, delta_max) == pytest.approx(expected)


def test_observation_profit_off_nadir_half_stale():
    assert observation_profit(0.729, 0.5, 2, 4) == pytest.approx(0.25 / 0.729, rel=1e-9)
    assert observation_profit(0.729, 0.5, 2, 4) == pytest.approx(0.3429, abs=1e-4)


@pytest.mark.parametrize("length", [3.0, 12.9, 13.0, 35.0, 101.5])
def test_slot_count_matches_floor_formula(length):
    assert len(slot_offsets(length, 3.0, 10.0)) == math.floor((length - 3.0) / 10.0) + 1


# ---------------------------------------------------------------------------
# discretize / reprice
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def scenario():
    return make_scenario(n_targets=30, seed=5, n_planes=1, sats_per_plane=2)


@pytest.fixture(scope="module")
def otws(scenario):
    return discretize(compute_vtws(scenario), scenario)


def test_otws_fit_their_windows(scenario, otws):
    targets = scenario.target_map()
    assert otws
    for otw in otws:
        assert otw.vtw_start_s - 1e-9 <= otw.start_s
        assert otw.end_s <= otw.vtw_end_s + 1e-9
        assert otw.obs_duration_s == pytest.approx(targets[otw.target_id].obs_duration_s)
        offset = (otw.start_s - otw.vtw_start_s) / scenario.horizon.otw_step_s
        assert offset == pytest.approx(round(offset))


def test_otws_stay_inside_one_stp(scenario, otws):
    horizon = scenario.horizon
    for otw in otws:
        start, end = horizon.stp_bounds(otw.stp_index)
        assert start - 1e-9 <= otw.start_s and otw.end_s <= end + 1e-9


def test_window_indices_count_up_per_orbit(otws):
    groups = defaultdict(list)
    for otw in otws:
        groups[(otw.satellite_id, otw.target_id, otw.orbit_index)].append(otw)
    for group in groups.values():
        group.sort(key=lambda w: w.start_s)
        assert [w.window_index for w in group] == list(range(len(group)))


def test_keys_unique(otws):
    assert len({otw.key for otw in otws}) == len(otws)


def test_default_profit_is_quality_ratio(otws):
    for otw in otws:
        assert 0.0 < otw.profit <= 1.0
        assert otw.profit == pytest.approx(0.5 / otw.pointing.gsd_m_per_px)


def test_processing_matches_data_volume(otws):
    sat = make_satellite()
    for otw in otws[:20]:
        assert otw.proc_time_s == pytest.approx(processing_time(otw.data_bits, sat))


def test_short_window_yields_nothing(scenario):
    target = scenario.targets[0]
    vtw = VisibleTimeWindow(0, target.id, 0, 100.0, 100.0 + 0.5 * target.obs_duration_s)
    assert discretize([vtw], scenario) == []


def test_reprice_scales_with_staleness(scenario, otws):
    target_ids = {otw.target_id for otw in otws}
    full = reprice(otws, scenario, {t: 4 for t in target_ids}, 4)
    half = reprice(otws, scenario, {t: 2 for t in target_ids}, 4)
    for a, b, original in zip(full, half, otws):
        assert b.profit == pytest.approx(a.profit / 2)
        assert a.profit == pytest.approx(original.profit)
        assert b.start_s == original.start_s and b.pointing == original.pointing


def test_reprice_missing_target_defaults_to_one(scenario, otws):
    repriced = reprice(otws[:5], scenario, {}, 5)
    for otw, original in zip(repriced, otws[:5]):
        assert otw.profit == pytest.approx(original.profit / 5)
        assert not math.isnan(otw.profit)
