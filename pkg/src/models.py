"""Pydantic models for the problem instance and its persisted files.

All models use Pydantic v2 conventions and are frozen: a Scenario is built
once (generated or loaded) and then shared read-only by geometry, scheduling
and simulation code. Field validators enforce the instance invariants; the
scenario module turns validation failures into ``ScenarioError``.
"""

from __future__ import annotations

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config import SCENARIO_SCHEMA_VERSION, STP_BOUNDARY_EPS, STP_SPLIT_TOLERANCE_S


class Topology(str, Enum):
    WalkerDelta = "WalkerDelta"
    WalkerStar = "WalkerStar"


# ---------------------------------------------------------------------------
# Space segment
# ---------------------------------------------------------------------------

class ConstellationConfig(BaseModel):
    """Walker constellation layout: planes, slots per plane, orbit shape."""

    model_config = ConfigDict(frozen=True)

    n_planes: int = Field(ge=1)
    sats_per_plane: int = Field(ge=1)
    altitude_m: float = Field(gt=0)
    inclination_rad: float = Field(ge=0, le=math.pi)
    topology: Topology = Topology.WalkerDelta
    phasing_factor: int = 0

    @property
    def n_satellites(self) -> int:
        return self.n_planes * self.sats_per_plane


class SatelliteSpec(BaseModel):
    """Attitude limits, payload, onboard CPU, energy rates and downlink of one AEOS."""

    model_config = ConfigDict(frozen=True)

    id: int
    max_roll_rad: float = Field(gt=0, le=math.pi)
    max_pitch_rad: float = Field(gt=0, le=math.pi)
    max_yaw_rad: float = Field(gt=0, le=math.pi)
    n_cores: int = Field(gt=0)
    cpu_freq_hz: float = Field(gt=0)
    gsd_nadir_m_per_px: float = Field(gt=0)
    swath_nadir_m: float = Field(gt=0)
    pixel_depth_bits: float = Field(gt=0)
    e_obs_per_s: float = Field(gt=0)
    e_proc_per_s: float = Field(gt=0)
    e_tran_per_s: float = Field(gt=0)
    e_max: float = Field(gt=0)
    compression_factor: float = Field(ge=1)
    cycles_per_bit: float = Field(gt=0)
    downlink_rate_bps: float = Field(gt=0)


# ---------------------------------------------------------------------------
# Ground segment and targets
# ---------------------------------------------------------------------------

def _check_coordinates(lat_rad: float, lon_rad: float) -> None:
    if abs(lat_rad) > math.pi / 2:
        raise ValueError(f"lat_rad {lat_rad} outside [-pi/2, pi/2]")
    if not (-math.pi <= lon_rad < math.pi):
        raise ValueError(f"lon_rad {lon_rad} outside [-pi, pi)")


class Target(BaseModel):
    """A ground point to be monitored, with its required observation time."""

    model_config = ConfigDict(frozen=True)

    id: int
    lat_rad: float
    lon_rad: float
    obs_duration_s: float = Field(gt=0)

    @model_validator(mode="after")
    def _coordinates(self) -> Target:
        _check_coordinates(self.lat_rad, self.lon_rad)
        return self


class GroundStation(BaseModel):
    """A downlink site; contact exists above ``min_elevation_rad``."""

    model_config = ConfigDict(frozen=True)

    id: str
    lat_rad: float
    lon_rad: float
    min_elevation_rad: float = Field(ge=0, lt=math.pi / 2)

    @model_validator(mode="after")
    def _coordinates(self) -> GroundStation:
        _check_coordinates(self.lat_rad, self.lon_rad)
        return self


# ---------------------------------------------------------------------------
# Horizon
# ---------------------------------------------------------------------------

class Horizon(BaseModel):
    """Scheduling time horizon split into equal short-term periods."""

    model_config = ConfigDict(frozen=True)

    sth_duration_s: float = Field(gt=0)
    n_stp: int = Field(ge=1)
    otw_step_s: float = Field(gt=0)

    @model_validator(mode="after")
    def _stp_length(self) -> Horizon:
        if self.sth_duration_s / self.n_stp < STP_SPLIT_TOLERANCE_S:
            raise ValueError(
                f"sth_duration_s {self.sth_duration_s} cannot hold {self.n_stp} STPs "
                f"of at least {STP_SPLIT_TOLERANCE_S:g} s"
            )
        return self

    @property
    def stp_duration_s(self) -> float:
        return self.sth_duration_s / self.n_stp

    def stp_bounds(self, stp_index: int) -> tuple[float, float]:
        """Return ``(start_s, end_s)`` of an STP; the last one ends exactly at the STH."""
        start = stp_index * self.stp_duration_s
        end = self.sth_duration_s if stp_index == self.n_stp - 1 else (stp_index + 1) * self.stp_duration_s
        return start, end

    def stp_of(self, time_s: float) -> int:
        """Index of the STP containing ``time_s`` (the STH end belongs to the last STP)."""
        return stp_index_at(time_s, self.stp_duration_s, self.n_stp)


def stp_index_at(time_s: float, stp_duration_s: float, n_stp: int) -> int:
    """STP index of ``time_s``; an instant on a boundary belongs to the later STP.

    Boundaries match within ``STP_BOUNDARY_EPS`` of an STP length.
    """
    index = math.floor(time_s / stp_duration_s + STP_BOUNDARY_EPS)
    return min(max(index, 0), n_stp - 1)


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------

class Scenario(BaseModel):
    """Full problem instance. Serialised as versioned JSON."""

    model_config = ConfigDict(frozen=True)

    schema_version: int = SCENARIO_SCHEMA_VERSION
    constellation: ConstellationConfig
    satellites: list[SatelliteSpec]
    targets: list[Target]
    stations: list[GroundStation]
    horizon: Horizon
    rng_seed: int

    @field_validator("schema_version")
    @classmethod
    def _known_schema(cls, v: int) -> int:
        if v != SCENARIO_SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {v} (expected {SCENARIO_SCHEMA_VERSION})")
        return v

    @model_validator(mode="after")
    def _consistency(self) -> Scenario:
        expected = self.constellation.n_satellites
        if len(self.satellites) != expected:
            raise ValueError(
                f"satellites: {len(self.satellites)} given, constellation needs {expected}"
            )
        for name, ids in (
            ("satellites", [s.id for s in self.satellites]),
            ("targets", [t.id for t in self.targets]),
            ("stations", [g.id for g in self.stations]),
        ):
            seen: set = set()
            for item_id in ids:
                if item_id in seen:
                    raise ValueError(f"{name}: duplicate id {item_id!r}")
                seen.add(item_id)
        return self

    def satellite(self, satellite_id: int) -> SatelliteSpec:
        for sat in self.satellites:
            if sat.id == satellite_id:
                return sat
        raise KeyError(satellite_id)

    def target_map(self) -> dict[int, Target]:
        return {t.id: t for t in self.targets}

    def satellite_map(self) -> dict[int, SatelliteSpec]:
        return {s.id: s for s in self.satellites}
