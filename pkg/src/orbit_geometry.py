"""Orbit Geometry

Circular two-body propagation of a Walker constellation over a spherical,
rotating Earth, plus the satellite–target and satellite–station geometry
built on it:

- attitude (roll / pitch / yaw) needed to point at a target, with GSD and swath
- visible time windows (VTWs) per satellite–target pair
- contact windows per satellite–station pair

Window detection scans the horizon at a fixed step with numpy, prefiltering
sample/target pairs by Earth-central angle, and refines window edges by
bisection.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from src.config import (
    BISECTION_TOLERANCE_S,
    EARTH_MU_M3_S2,
    EARTH_RADIUS_M,
    EARTH_ROTATION_RAD_S,
    GEOMETRY_SCAN_STEP_S,
    GEOMETRY_TARGET_CHUNK,
)
from src.models import ConstellationConfig, GroundStation, SatelliteSpec, Scenario, Target, Topology, stp_index_at

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitState:
    satellite_id: int
    time_s: float
    position_ecef_m: tuple[float, float, float]
    velocity_ecef_m_s: tuple[float, float, float]


@dataclass(frozen=True)
class PointingSolution:
    """Attitude and imaging geometry for one satellite–target instant."""

    roll_rad: float
    pitch_rad: float
    yaw_rad: float
    off_nadir_rad: float
    slant_range_m: float
    gsd_m_per_px: float
    swath_m: float

    @property
    def angles(self) -> tuple[float, float, float]:
        return (self.roll_rad, self.pitch_rad, self.yaw_rad)


@dataclass(frozen=True)
class VisibleTimeWindow:
    satellite_id: int
    target_id: int
    orbit_index: int
    start_s: float
    end_s: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class ContactWindow:
    satellite_id: int
    station_id: str
    start_s: float
    end_s: float
    representative_distance_m: float


# ---------------------------------------------------------------------------
# Orbit basics
# ---------------------------------------------------------------------------


def orbital_period_s(altitude_m: float) -> float:
    a = EARTH_RADIUS_M + altitude_m
    return 2.0 * math.pi * math.sqrt(a**3 / EARTH_MU_M3_S2)


def angular_velocity_rad_s(altitude_m: float) -> float:
    a = EARTH_RADIUS_M + altitude_m
    return math.sqrt(EARTH_MU_M3_S2 / a**3)


def max_off_nadir_rad(satellite: SatelliteSpec) -> float:
    """Largest off-nadir angle reachable inside the roll/pitch envelope.

    With roll applied before pitch, cos(off-nadir) = cos(roll) * cos(pitch).
    """
    roll = min(satellite.max_roll_rad, math.pi / 2)
    pitch = min(satellite.max_pitch_rad, math.pi / 2)
    return math.acos(math.cos(roll) * math.cos(pitch))


def ground_angle_rad(off_nadir_rad: float, altitude_m: float) -> float:
    """Earth-central angle between sub-satellite point and the look point.

    Clamped to the horizon when the look direction misses the Earth.
    """
    a = EARTH_RADIUS_M + altitude_m
    s = a / EARTH_RADIUS_M * math.sin(off_nadir_rad)
    if s >= 1.0:
        return math.acos(EARTH_RADIUS_M / a)
    return math.asin(s) - off_nadir_rad


def max_observable_latitude_rad(constellation: ConstellationConfig, satellite: SatelliteSpec) -> float:
    """Upper bound on |latitude| of any target the constellation can image."""
    inclination = constellation.inclination_rad
    if inclination > math.pi / 2:
        inclination = math.pi - inclination
    margin = ground_angle_rad(max_off_nadir_rad(satellite), constellation.altitude_m)
    return min(math.pi / 2, inclination + margin)


def geodetic_to_ecef(lat_rad: float, lon_rad: float) -> np.ndarray:
    return EARTH_RADIUS_M * np.array(
        [math.cos(lat_rad) * math.cos(lon_rad), math.cos(lat_rad) * math.sin(lon_rad), math.sin(lat_rad)]
    )


def ecef_to_geodetic(position: np.ndarray) -> tuple[float, float]:
    """Spherical latitude/longitude of an ECEF vector (lon wrapped to [-pi, pi))."""
    x, y, z = (float(c) for c in position)
    lat = math.atan2(z, math.hypot(x, y))
    lon = math.atan2(y, x)
    if lon >= math.pi:
        lon -= 2.0 * math.pi
    return lat, lon


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------


def walker_slot(constellation: ConstellationConfig, index: int) -> tuple[float, float]:
    """Return ``(raan_rad, initial_argument_of_latitude_rad)`` for satellite ``index``.

    Satellites are numbered plane by plane. Delta spreads the planes over 2*pi,
    Star over pi; the phasing factor offsets adjacent planes by 2*pi*F/(P*S).
    """
    plane, slot = divmod(index, constellation.sats_per_plane)
    spread = 2.0 * math.pi if constellation.topology == Topology.WalkerDelta else math.pi
    raan = plane * spread / constellation.n_planes
    total = constellation.n_planes * constellation.sats_per_plane
    u0 = 2.0 * math.pi * slot / constellation.sats_per_plane
    u0 += 2.0 * math.pi * constellation.phasing_factor * plane / total
    return raan, u0 % (2.0 * math.pi)


def _inertial_states(
    constellation: ConstellationConfig, index: int, times: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    raan, u0 = walker_slot(constellation, index)
    a = EARTH_RADIUS_M + constellation.altitude_m
    n = angular_velocity_rad_s(constellation.altitude_m)
    inc = constellation.inclination_rad

    p_hat = np.array([math.cos(raan), math.sin(raan), 0.0])
    q_hat = np.array([-math.cos(inc) * math.sin(raan), math.cos(inc) * math.cos(raan), math.sin(inc)])

    u = u0 + n * times
    cos_u = np.cos(u)[:, None]
    sin_u = np.sin(u)[:, None]
    pos = a * (cos_u * p_hat + sin_u * q_hat)
    vel = a * n * (-sin_u * p_hat + cos_u * q_hat)
    return pos, vel


def _to_ecef(pos_i: np.ndarray, vel_i: np.ndarray, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    theta = EARTH_ROTATION_RAD_S * times
    c = np.cos(theta)
    s = np.sin(theta)
    pos = np.empty_like(pos_i)
    pos[:, 0] = c * pos_i[:, 0] + s * pos_i[:, 1]
    pos[:, 1] = -s * pos_i[:, 0] + c * pos_i[:, 1]
    pos[:, 2] = pos_i[:, 2]
    vel = np.empty_like(vel_i)
    vel[:, 0] = c * vel_i[:, 0] + s * vel_i[:, 1] + EARTH_ROTATION_RAD_S * pos[:, 1]
    vel[:, 1] = -s * vel_i[:, 0] + c * vel_i[:, 1] - EARTH_ROTATION_RAD_S * pos[:, 0]
    vel[:, 2] = vel_i[:, 2]
    return pos, vel


def satellite_states(
    constellation: ConstellationConfig, index: int, times: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """ECEF positions and velocities, shape ``(len(times), 3)`` each."""
    times = np.asarray(times, dtype=float)
    pos_i, vel_i = _inertial_states(constellation, index, times)
    return _to_ecef(pos_i, vel_i, times)


def inertial_position(constellation: ConstellationConfig, index: int, time_s: float) -> np.ndarray:
    pos, _ = _inertial_states(constellation, index, np.array([time_s]))
    return pos[0]


def propagate(scenario: Scenario, time_s: float) -> list[OrbitState]:
    """One ECEF state per satellite at ``time_s``."""
    times = np.array([float(time_s)])
    states = []
    for index, sat in enumerate(scenario.satellites):
        pos, vel = satellite_states(scenario.constellation, index, times)
        states.append(
            OrbitState(
                satellite_id=sat.id,
                time_s=float(time_s),
                position_ecef_m=tuple(float(v) for v in pos[0]),
                velocity_ecef_m_s=tuple(float(v) for v in vel[0]),
            )
        )
    return states


def satellite_state(scenario: Scenario, satellite_id: int, time_s: float) -> OrbitState:
    index = next(i for i, s in enumerate(scenario.satellites) if s.id == satellite_id)
    pos, vel = satellite_states(scenario.constellation, index, np.array([float(time_s)]))
    return OrbitState(
        satellite_id=satellite_id,
        time_s=float(time_s),
        position_ecef_m=tuple(float(v) for v in pos[0]),
        velocity_ecef_m_s=tuple(float(v) for v in vel[0]),
    )


# ---------------------------------------------------------------------------
# Pointing
# ---------------------------------------------------------------------------


def _look_geometry(pos: np.ndarray, vel: np.ndarray, tgt: np.ndarray) -> dict[str, np.ndarray]:
    """Vectorised look geometry for paired rows of ``pos``/``vel``/``tgt`` (all ``(k, 3)``).

    Body frame: z toward nadir, x along-track, y = z cross x.
    """
    r_norm = np.linalg.norm(pos, axis=1)
    z_hat = -pos / r_norm[:, None]
    v_perp = vel - np.sum(vel * z_hat, axis=1)[:, None] * z_hat
    x_hat = v_perp / np.linalg.norm(v_perp, axis=1)[:, None]
    y_hat = np.cross(z_hat, x_hat)

    los = tgt - pos
    lx = np.sum(los * x_hat, axis=1)
    ly = np.sum(los * y_hat, axis=1)
    lz = np.sum(los * z_hat, axis=1)
    slant = np.linalg.norm(los, axis=1)

    roll = np.arctan2(ly, lz)
    pitch = np.arctan2(lx, np.hypot(ly, lz))
    off_nadir = np.arccos(np.clip(lz / slant, -1.0, 1.0))
    # target sees the satellite above its local horizon
    up = tgt / np.linalg.norm(tgt, axis=1)[:, None]
    above = np.sum(-los * up, axis=1) > 0.0
    return {
        "roll": roll,
        "pitch": pitch,
        "off_nadir": off_nadir,
        "slant": slant,
        "altitude": r_norm - EARTH_RADIUS_M,
        "above": above & (lz > 0.0),
    }


def _within_limits(geom: dict[str, np.ndarray], satellite: SatelliteSpec) -> np.ndarray:
    # yaw is held at 0, which is always inside (0, max_yaw]
    return (
        geom["above"]
        & (np.abs(geom["roll"]) <= satellite.max_roll_rad)
        & (np.abs(geom["pitch"]) <= satellite.max_pitch_rad)
    )


def gsd_at(slant_range_m: float, altitude_m: float, off_nadir_rad: float, gsd_nadir: float) -> float:
    """GSD degraded by range and obliquity: gsd_nadir * (slant/h) / cos(off-nadir)."""
    gsd = gsd_nadir * (slant_range_m / altitude_m) / math.cos(off_nadir_rad)
    return max(gsd, gsd_nadir)


def pointing(state: OrbitState, target: Target, satellite: SatelliteSpec) -> PointingSolution | None:
    """Attitude to image ``target`` from ``state``, or None if outside limits or below the horizon."""
    pos = np.array([state.position_ecef_m])
    vel = np.array([state.velocity_ecef_m_s])
    tgt = geodetic_to_ecef(target.lat_rad, target.lon_rad)[None, :]
    geom = _look_geometry(pos, vel, tgt)
    if not bool(_within_limits(geom, satellite)[0]):
        return None
    altitude = float(geom["altitude"][0])
    off_nadir = float(geom["off_nadir"][0])
    slant = float(geom["slant"][0])
    gsd = gsd_at(slant, altitude, off_nadir, satellite.gsd_nadir_m_per_px)
    return PointingSolution(
        roll_rad=float(geom["roll"][0]),
        pitch_rad=float(geom["pitch"][0]),
        yaw_rad=0.0,
        off_nadir_rad=off_nadir,
        slant_range_m=slant,
        gsd_m_per_px=gsd,
        swath_m=satellite.swath_nadir_m * gsd / satellite.gsd_nadir_m_per_px,
    )


def pointing_batch(
    scenario: Scenario, satellite_id: int, times_s: np.ndarray, targets: list[Target]
) -> list[PointingSolution]:
    """Pointing for paired ``(times_s[i], targets[i])``, without the limit check.

    Used for instants already known to lie inside a visible window.
    """
    if len(targets) == 0:
        return []
    index = next(i for i, s in enumerate(scenario.satellites) if s.id == satellite_id)
    sat = scenario.satellites[index]
    pos, vel = satellite_states(scenario.constellation, index, np.asarray(times_s, dtype=float))
    tgt = np.array([geodetic_to_ecef(t.lat_rad, t.lon_rad) for t in targets])
    geom = _look_geometry(pos, vel, tgt)
    solutions = []
    for i in range(len(targets)):
        gsd = gsd_at(
            float(geom["slant"][i]), float(geom["altitude"][i]), float(geom["off_nadir"][i]), sat.gsd_nadir_m_per_px
        )
        solutions.append(
            PointingSolution(
                roll_rad=float(geom["roll"][i]),
                pitch_rad=float(geom["pitch"][i]),
                yaw_rad=0.0,
                off_nadir_rad=float(geom["off_nadir"][i]),
                slant_range_m=float(geom["slant"][i]),
                gsd_m_per_px=gsd,
                swath_m=sat.swath_nadir_m * gsd / sat.gsd_nadir_m_per_px,
            )
        )
    return solutions


# ---------------------------------------------------------------------------
# Window scanning helpers
# ---------------------------------------------------------------------------


def scan_times(sth_duration_s: float, step_s: float = GEOMETRY_SCAN_STEP_S) -> np.ndarray:
    """Sample instants from 0 to the STH inclusive."""
    n = int(math.floor(sth_duration_s / step_s))
    times = np.arange(n + 1, dtype=float) * step_s
    if times[-1] < sth_duration_s:
        times = np.append(times, sth_duration_s)
    return times


def _runs(indices: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of consecutive integers in a sorted index array."""
    if indices.size == 0:
        return []
    breaks = np.nonzero(np.diff(indices) > 1)[0]
    starts = np.concatenate(([indices[0]], indices[breaks + 1]))
    ends = np.concatenate((indices[breaks], [indices[-1]]))
    return [(int(s), int(e)) for s, e in zip(starts, ends)]


def _bisect_edge(predicate, inside_s: float, outside_s: float, tol: float = BISECTION_TOLERANCE_S) -> float:
    """Shrink [inside, outside] around the visibility edge; returns the inside bound."""
    while abs(outside_s - inside_s) > tol:
        mid = 0.5 * (inside_s + outside_s)
        if predicate(mid):
            inside_s = mid
        else:
            outside_s = mid
    return inside_s


def _refine_runs(runs, times, predicate) -> list[tuple[float, float]]:
    windows = []
    last = len(times) - 1
    for i0, i1 in runs:
        start = float(times[i0]) if i0 == 0 else _bisect_edge(predicate, float(times[i0]), float(times[i0 - 1]))
        end = float(times[i1]) if i1 == last else _bisect_edge(predicate, float(times[i1]), float(times[i1 + 1]))
        if end > start:
            windows.append((start, end))
    return windows


def split_at_stp_boundaries(
    start_s: float, end_s: float, stp_duration_s: float, n_stp: int
) -> list[tuple[float, float]]:
    """Cut ``[start, end]`` so that no piece straddles an STP boundary."""
    pieces = []
    cursor = start_s
    k = stp_index_at(start_s, stp_duration_s, n_stp)
    while cursor < end_s and k < n_stp:
        boundary = end_s if k == n_stp - 1 else min(end_s, (k + 1) * stp_duration_s)
        if boundary > cursor:
            pieces.append((cursor, boundary))
            cursor = boundary
        k += 1
    return pieces


# ---------------------------------------------------------------------------
# Visible time windows
# ---------------------------------------------------------------------------


def compute_vtws(scenario: Scenario, step_s: float = GEOMETRY_SCAN_STEP_S) -> list[VisibleTimeWindow]:
    """All VTWs of the scenario, clipped to STP boundaries and sorted by (satellite, target, start).

    Windows (or STP pieces of windows) shorter than the target's observation
    duration cannot host an OTW and are dropped.
    """
    horizon = scenario.horizon
    constellation = scenario.constellation
    period = orbital_period_s(constellation.altitude_m)
    times = scan_times(horizon.sth_duration_s, step_s)
    targets = scenario.targets
    tgt_ecef = np.array([geodetic_to_ecef(t.lat_rad, t.lon_rad) for t in targets]).reshape(-1, 3)
    tgt_unit = tgt_ecef / EARTH_RADIUS_M

    windows: list[VisibleTimeWindow] = []
    for index, sat in enumerate(scenario.satellites):
        pos, vel = satellite_states(constellation, index, times)
        pos_unit = pos / np.linalg.norm(pos, axis=1)[:, None]
        max_ground = ground_angle_rad(max_off_nadir_rad(sat), constellation.altitude_m)
        cos_gate = math.cos(min(math.pi, max_ground + math.radians(1.0)))

        for lo in range(0, len(targets), GEOMETRY_TARGET_CHUNK):
            hi = min(lo + GEOMETRY_TARGET_CHUNK, len(targets))
            cos_central = pos_unit @ tgt_unit[lo:hi].T
            ti, kj = np.nonzero(cos_central >= cos_gate)
            if ti.size == 0:
                continue
            geom = _look_geometry(pos[ti], vel[ti], tgt_ecef[lo + kj])
            ok = _within_limits(geom, sat)
            ti, kj = ti[ok], kj[ok]

            for k in np.unique(kj):
                target = targets[lo + int(k)]
                feasible_idx = np.sort(ti[kj == k])

                def visible(t: float, _target=target) -> bool:
                    return _visible_at(constellation, index, sat, _target, t)

                for start, end in _refine_runs(_runs(feasible_idx), times, visible):
                    for p_start, p_end in split_at_stp_boundaries(
                        start, end, horizon.stp_duration_s, horizon.n_stp
                    ):
                        if p_end - p_start < target.obs_duration_s:
                            continue
                        windows.append(
                            VisibleTimeWindow(
                                satellite_id=sat.id,
                                target_id=target.id,
                                orbit_index=int(p_start // period),
                                start_s=p_start,
                                end_s=p_end,
                            )
                        )
        logger.debug(f"Satellite {sat.id}: {sum(1 for w in windows if w.satellite_id == sat.id)} VTWs")

    windows.sort(key=lambda w: (w.satellite_id, w.target_id, w.start_s))
    logger.info(f"Computed {len(windows)} VTWs for {len(scenario.satellites)} satellites x {len(targets)} targets")
    return windows


def _visible_at(
    constellation: ConstellationConfig, index: int, sat: SatelliteSpec, target: Target, time_s: float
) -> bool:
    pos, vel = satellite_states(constellation, index, np.array([time_s]))
    tgt = geodetic_to_ecef(target.lat_rad, target.lon_rad)[None, :]
    return bool(_within_limits(_look_geometry(pos, vel, tgt), sat)[0])


# ---------------------------------------------------------------------------
# Contact windows
# ---------------------------------------------------------------------------


def _elevation(pos: np.ndarray, station_ecef: np.ndarray) -> np.ndarray:
    up = station_ecef / np.linalg.norm(station_ecef)
    rel = pos - station_ecef
    return np.arcsin(np.clip((rel @ up) / np.linalg.norm(rel, axis=1), -1.0, 1.0))


def compute_contact_windows(
    scenario: Scenario, step_s: float = GEOMETRY_SCAN_STEP_S
) -> list[ContactWindow]:
    """Satellite–station contact windows sorted by (satellite, start, station)."""
    constellation = scenario.constellation
    times = scan_times(scenario.horizon.sth_duration_s, step_s)
    contacts: list[ContactWindow] = []

    for index, sat in enumerate(scenario.satellites):
        pos, _ = satellite_states(constellation, index, times)
        for station in scenario.stations:
            g = geodetic_to_ecef(station.lat_rad, station.lon_rad)
            above = np.nonzero(_elevation(pos, g) >= station.min_elevation_rad)[0]

            def in_view(t: float, _g=g, _station=station) -> bool:
                p, _v = satellite_states(constellation, index, np.array([t]))
                return bool(_elevation(p, _g)[0] >= _station.min_elevation_rad)

            for start, end in _refine_runs(_runs(above), times, in_view):
                mid, _ = satellite_states(constellation, index, np.array([0.5 * (start + end)]))
                contacts.append(
                    ContactWindow(
                        satellite_id=sat.id,
                        station_id=station.id,
                        start_s=start,
                        end_s=end,
                        representative_distance_m=float(np.linalg.norm(mid[0] - g)),
                    )
                )

    contacts.sort(key=lambda c: (c.satellite_id, c.start_s, c.station_id))
    logger.info(f"Computed {len(contacts)} contact windows over {len(scenario.stations)} stations")
    return contacts


def station_visible(scenario: Scenario, satellite_id: int, station: GroundStation, time_s: float) -> bool:
    state = satellite_state(scenario, satellite_id, time_s)
    g = geodetic_to_ecef(station.lat_rad, station.lon_rad)
    return bool(_elevation(np.array([state.position_ecef_m]), g)[0] >= station.min_elevation_rad)
