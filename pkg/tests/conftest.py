import math

import pytest

from src.discretization import ObservationTimeWindow
from src.models import GroundStation, Horizon, SatelliteSpec, Target
from src.orbit_geometry import PointingSolution, orbital_period_s
from src.scenario import generate_instance, reference_constellation, reference_satellite


def make_satellite(satellite_id=0, **overrides) -> SatelliteSpec:
    return reference_satellite(satellite_id, **overrides)


def make_target(target_id=0, lat_deg=10.0, lon_deg=20.0, obs_duration_s=2.0, **overrides) -> Target:
    defaults = dict(
        id=target_id, lat_rad=math.radians(lat_deg), lon_rad=math.radians(lon_deg), obs_duration_s=obs_duration_s,
    )
    defaults.update(overrides)
    return Target(**defaults)


def make_station(station_id="gs", lat_deg=0.0, lon_deg=0.0, min_elevation_deg=5.0) -> GroundStation:
    return GroundStation(
        id=station_id, lat_rad=math.radians(lat_deg), lon_rad=math.radians(lon_deg),
        min_elevation_rad=math.radians(min_elevation_deg),
    )


def make_pointing(roll_deg=0.0, pitch_deg=0.0, gsd=0.5, swath=5000.0, slant=600_000.0) -> PointingSolution:
    roll, pitch = math.radians(roll_deg), math.radians(pitch_deg)
    return PointingSolution(
        roll_rad=roll, pitch_rad=pitch, yaw_rad=0.0,
        off_nadir_rad=math.acos(math.cos(roll) * math.cos(pitch)),
        slant_range_m=slant, gsd_m_per_px=gsd, swath_m=swath,
    )


def make_otw(
    satellite_id=0, target_id=0, start_s=100.0, duration_s=2.0, roll_deg=0.0, pitch_deg=0.0,
    proc_time_s=1.0, profit=0.5, stp_index=0, orbit_index=0, window_index=0,
    vtw_start_s=None, vtw_end_s=None, gsd=0.5, data_bits=1e6,
) -> ObservationTimeWindow:
    return ObservationTimeWindow(
        satellite_id=satellite_id, target_id=target_id, orbit_index=orbit_index, window_index=window_index,
        start_s=start_s, end_s=start_s + duration_s,
        pointing=make_pointing(roll_deg, pitch_deg, gsd=gsd),
        data_bits=data_bits, proc_time_s=proc_time_s, profit=profit, stp_index=stp_index,
        vtw_start_s=start_s if vtw_start_s is None else vtw_start_s,
        vtw_end_s=start_s + duration_s if vtw_end_s is None else vtw_end_s,
    )


def make_scenario(n_targets=5, seed=7, n_planes=1, sats_per_plane=1, n_stp=2, periods=2, stations=None, **sat_overrides):
    """Small scenario: ``periods`` orbital periods split into ``n_stp`` STPs."""
    constellation = reference_constellation(n_planes=n_planes, sats_per_plane=sats_per_plane)
    horizon = Horizon(
        sth_duration_s=periods * orbital_period_s(constellation.altitude_m), n_stp=n_stp, otw_step_s=10.0,
    )
    if stations is None:
        stations = [make_station("equator", 0.0, 0.0), make_station("north", 60.0, 20.0)]
    return generate_instance(
        constellation, n_targets, horizon, seed, stations=stations,
        satellite_template=make_satellite(0, **sat_overrides),
    )


@pytest.fixture
def satellite():
    return make_satellite()


@pytest.fixture
def small_scenario():
    return make_scenario()
