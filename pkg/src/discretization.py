"""Discretization

Turns each visible time window into candidate observation time windows (OTWs)
at a fixed step and attaches the per-OTW quantities the scheduler needs:
attitude and GSD at the OTW start, raw data volume, onboard processing time
and observation profit.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from src.config import EARTH_RADIUS_M
from src.models import SatelliteSpec, Scenario
from src.orbit_geometry import PointingSolution, VisibleTimeWindow, angular_velocity_rad_s, pointing_batch

logger = logging.getLogger(__name__)

OtwKey = tuple[int, int, int, int]  # (satellite, target, orbit, window)

_SLOT_EPS = 1e-9


@dataclass(frozen=True)
class ObservationTimeWindow:
    satellite_id: int
    target_id: int
    orbit_index: int
    window_index: int
    start_s: float
    end_s: float
    pointing: PointingSolution
    data_bits: float
    proc_time_s: float
    profit: float
    stp_index: int
    vtw_start_s: float
    vtw_end_s: float

    @property
    def key(self) -> OtwKey:
        return (self.satellite_id, self.target_id, self.orbit_index, self.window_index)

    @property
    def obs_duration_s(self) -> float:
        return self.end_s - self.start_s


# ---------------------------------------------------------------------------
# Per-OTW quantities
# ---------------------------------------------------------------------------


def data_volume(
    pointing: PointingSolution, tau_obs_s: float, satellite: SatelliteSpec, omega_rad_s: float
) -> float:
    """Raw frame size in bits: swath x (swath + ground track) / GSD^2 x bit depth."""
    swath = pointing.swath_m
    along = swath + tau_obs_s * EARTH_RADIUS_M * omega_rad_s
    return swath * along / pointing.gsd_m_per_px**2 * satellite.pixel_depth_bits


def processing_time(data_bits: float, satellite: SatelliteSpec) -> float:
    return data_bits * satellite.cycles_per_bit / (satellite.n_cores * satellite.cpu_freq_hz)


def compressed_size(data_bits: float, sigma: float) -> float:
    if sigma < 1:
        raise ValueError(f"compression factor must be >= 1, got {sigma}")
    return data_bits / sigma


def observation_profit(gsd: float, gsd_nadir: float, delta_t: int, delta_max: int) -> float:
    """Quality ratio times staleness ratio, in [0, 1]."""
    return (gsd_nadir / gsd) * (delta_t / delta_max)


def slot_offsets(window_length_s: float, tau_obs_s: float, step_s: float) -> list[float]:
    """Offsets 0, step, 2*step, ... while offset + tau fits inside the window."""
    if window_length_s + _SLOT_EPS < tau_obs_s:
        return []
    count = int(math.floor((window_length_s - tau_obs_s) / step_s + _SLOT_EPS)) + 1
    return [k * step_s for k in range(count)]


# ---------------------------------------------------------------------------
# Discretize
# ---------------------------------------------------------------------------


def discretize(
    vtws: list[VisibleTimeWindow],
    scenario: Scenario,
    delta_by_target: Mapping[int, int] | None = None,
    delta_max: int = 1,
) -> list[ObservationTimeWindow]:
    """Discretize VTWs into OTWs ordered by (satellite, target, orbit, window).

    Targets missing from ``delta_by_target`` use delta = 1. Window indices
    count OTWs within each (satellite, target, orbit) group across VTW pieces.
    """
    delta_by_target = delta_by_target or {}
    delta_max = max(1, delta_max)
    targets = scenario.target_map()
    satellites = scenario.satellite_map()
    horizon = scenario.horizon
    omega = angular_velocity_rad_s(scenario.constellation.altitude_m)

    pending: dict[int, list[tuple[VisibleTimeWindow, float]]] = defaultdict(list)
    for vtw in sorted(vtws, key=lambda w: (w.satellite_id, w.target_id, w.orbit_index, w.start_s)):
        tau = targets[vtw.target_id].obs_duration_s
        for offset in slot_offsets(vtw.end_s - vtw.start_s, tau, horizon.otw_step_s):
            pending[vtw.satellite_id].append((vtw, vtw.start_s + offset))

    otws: list[ObservationTimeWindow] = []
    for sat_id in sorted(pending):
        sat = satellites[sat_id]
        slots = pending[sat_id]
        pointings = pointing_batch(
            scenario,
            sat_id,
            np.array([start for _, start in slots]),
            [targets[vtw.target_id] for vtw, _ in slots],
        )
        counters: dict[tuple[int, int], int] = defaultdict(int)
        for (vtw, start), sol in zip(slots, pointings):
            target = targets[vtw.target_id]
            group = (vtw.target_id, vtw.orbit_index)
            w = counters[group]
            counters[group] += 1
            bits = data_volume(sol, target.obs_duration_s, sat, omega)
            otws.append(
                ObservationTimeWindow(
                    satellite_id=sat_id,
                    target_id=vtw.target_id,
                    orbit_index=vtw.orbit_index,
                    window_index=w,
                    start_s=start,
                    end_s=start + target.obs_duration_s,
                    pointing=sol,
                    data_bits=bits,
                    proc_time_s=processing_time(bits, sat),
                    profit=observation_profit(
                        sol.gsd_m_per_px,
                        sat.gsd_nadir_m_per_px,
                        delta_by_target.get(vtw.target_id, 1),
                        delta_max,
                    ),
                    stp_index=horizon.stp_of(start),
                    vtw_start_s=vtw.start_s,
                    vtw_end_s=vtw.end_s,
                )
            )

    logger.debug(f"Discretized {len(vtws)} VTWs into {len(otws)} OTWs")
    return otws


def reprice(
    otws: list[ObservationTimeWindow],
    scenario: Scenario,
    delta_by_target: Mapping[int, int],
    delta_max: int,
) -> list[ObservationTimeWindow]:
    """Recompute profits for fresh delta values; geometry is unchanged."""
    delta_max = max(1, delta_max)
    gsd_nadir = {s.id: s.gsd_nadir_m_per_px for s in scenario.satellites}
    return [
        replace(
            otw,
            profit=observation_profit(
                otw.pointing.gsd_m_per_px,
                gsd_nadir[otw.satellite_id],
                delta_by_target.get(otw.target_id, 1),
                delta_max,
            ),
        )
        for otw in otws
    ]
