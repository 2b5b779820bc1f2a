"""Scenario construction and persistence.

Builds the reference constellation / satellite / horizon from ``src.config``,
synthesises target sets uniformly over the constellation's observable band,
and reads / writes scenario and station files.
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src import config
from src.models import ConstellationConfig, GroundStation, Horizon, SatelliteSpec, Scenario, Target, Topology
from src.orbit_geometry import max_observable_latitude_rad, orbital_period_s

logger = logging.getLogger(__name__)

BUNDLED_STATIONS = Path(__file__).parent / "data" / "ground_stations.json"


# ---------------------------------------------------------------------------
# Custom exceptions
# ---------------------------------------------------------------------------


class ScenarioError(Exception):
    """Raised for invalid configuration, unreadable files or violated instance invariants."""

    def __init__(self, field: str, detail: str) -> None:
        self.field = field
        self.detail = detail
        super().__init__(f"{field}: {detail}")


def _from_validation_error(exc: ValidationError, context: str = "") -> ScenarioError:
    first = exc.errors()[0]
    loc = ".".join(str(p) for p in first.get("loc", ())) or "<document>"
    field = f"{context}.{loc}" if context and loc != "<document>" else (context or loc)
    return ScenarioError(field=field, detail=first.get("msg", str(exc)))


# ---------------------------------------------------------------------------
# Reference set-up
# ---------------------------------------------------------------------------


def reference_constellation(**overrides) -> ConstellationConfig:
    fields = dict(
        n_planes=config.N_PLANES,
        sats_per_plane=config.SATS_PER_PLANE,
        altitude_m=config.ALTITUDE_M,
        inclination_rad=config.INCLINATION_RAD,
        topology=Topology(config.TOPOLOGY),
        phasing_factor=config.PHASING_FACTOR,
    )
    fields.update(overrides)
    try:
        return ConstellationConfig(**fields)
    except ValidationError as exc:
        raise _from_validation_error(exc, "constellation") from exc


def reference_satellite(satellite_id: int = 0, **overrides) -> SatelliteSpec:
    fields = dict(
        id=satellite_id,
        max_roll_rad=config.MAX_ROLL_RAD,
        max_pitch_rad=config.MAX_PITCH_RAD,
        max_yaw_rad=config.MAX_YAW_RAD,
        n_cores=config.N_CORES,
        cpu_freq_hz=config.CPU_FREQ_HZ,
        gsd_nadir_m_per_px=config.GSD_NADIR_M_PER_PX,
        swath_nadir_m=config.SWATH_NADIR_M,
        pixel_depth_bits=config.PIXEL_DEPTH_BITS,
        e_obs_per_s=config.E_OBS_PER_S,
        e_proc_per_s=config.E_PROC_PER_S,
        e_tran_per_s=config.E_TRAN_PER_S,
        e_max=config.E_MAX,
        compression_factor=config.COMPRESSION_FACTOR,
        cycles_per_bit=config.CYCLES_PER_BIT,
        downlink_rate_bps=config.DOWNLINK_RATE_BPS,
    )
    fields.update(overrides)
    try:
        return SatelliteSpec(**fields)
    except ValidationError as exc:
        raise _from_validation_error(exc, "satellite") from exc


def reference_horizon(altitude_m: float = config.ALTITUDE_M, **overrides) -> Horizon:
    """STH of ``STH_ORBITAL_PERIODS`` circular periods split into ``N_STP`` STPs."""
    fields = dict(
        sth_duration_s=config.STH_ORBITAL_PERIODS * orbital_period_s(altitude_m),
        n_stp=config.N_STP,
        otw_step_s=config.OTW_STEP_S,
    )
    fields.update(overrides)
    try:
        return Horizon(**fields)
    except ValidationError as exc:
        raise _from_validation_error(exc, "horizon") from exc


# ---------------------------------------------------------------------------
# Ground stations
# ---------------------------------------------------------------------------


def load_stations(path: str | Path | None = None) -> list[GroundStation]:
    """Read a station file (degrees, see ``src/data/ground_stations.json``)."""
    path = Path(path) if path is not None else BUNDLED_STATIONS
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError("stations", f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    entries = raw["stations"] if isinstance(raw, dict) else raw
    stations = []
    for i, entry in enumerate(entries):
        try:
            lon = math.radians(float(entry["lon_deg"]))
            if lon >= math.pi:
                lon -= 2.0 * math.pi
            stations.append(
                GroundStation(
                    id=str(entry["id"]),
                    lat_rad=math.radians(float(entry["lat_deg"])),
                    lon_rad=lon,
                    min_elevation_rad=math.radians(
                        float(entry.get("min_elevation_deg", math.degrees(config.DEFAULT_MIN_ELEVATION_RAD)))
                    ),
                )
            )
        except KeyError as exc:
            raise ScenarioError(f"stations[{i}]", f"missing key {exc.args[0]!r}") from exc
        except ValidationError as exc:
            raise _from_validation_error(exc, f"stations[{i}]") from exc
    ids = [s.id for s in stations]
    if len(set(ids)) != len(ids):
        raise ScenarioError("stations", "duplicate station id")
    return stations


# ---------------------------------------------------------------------------
# Instance generation
# ---------------------------------------------------------------------------


def generate_instance(
    constellation: ConstellationConfig | dict,
    n_targets: int,
    horizon: Horizon | dict,
    seed: int,
    stations: list[GroundStation] | None = None,
    satellite_template: SatelliteSpec | None = None,
) -> Scenario:
    """Synthesise a scenario with ``n_targets`` targets.

    Targets are uniform by area over the band the constellation can image
    (|lat| up to inclination plus the largest off-nadir ground angle) and
    uniform in longitude; observation durations are Uniform(1, 5) s. The
    result is a pure function of the arguments.
    """
    try:
        if isinstance(constellation, dict):
            constellation = ConstellationConfig(**constellation)
        if isinstance(horizon, dict):
            horizon = Horizon(**horizon)
    except ValidationError as exc:
        raise _from_validation_error(exc) from exc
    if n_targets < 1:
        raise ScenarioError("n_targets", f"must be >= 1, got {n_targets}")

    template = satellite_template or reference_satellite()
    satellites = [
        template.model_copy(update={"id": i}) for i in range(constellation.n_satellites)
    ]
    stations = list(stations) if stations is not None else load_stations()

    rng = np.random.default_rng(seed)
    lat_max = max_observable_latitude_rad(constellation, template)
    sin_lat = rng.uniform(-math.sin(lat_max), math.sin(lat_max), size=n_targets)
    lons = rng.uniform(-math.pi, math.pi, size=n_targets)
    durations = rng.uniform(*config.OBS_DURATION_RANGE_S, size=n_targets)

    targets = [
        Target(
            id=i,
            lat_rad=float(np.arcsin(sin_lat[i])),
            lon_rad=float(lons[i]) if lons[i] < math.pi else -math.pi,
            obs_duration_s=float(durations[i]),
        )
        for i in range(n_targets)
    ]

    try:
        scenario = Scenario(
            constellation=constellation,
            satellites=satellites,
            targets=targets,
            stations=stations,
            horizon=horizon,
            rng_seed=seed,
        )
    except ValidationError as exc:
        raise _from_validation_error(exc) from exc

    logger.info(
        f"Generated scenario: {len(satellites)} satellites, {n_targets} targets, "
        f"{len(stations)} stations, |lat| <= {math.degrees(lat_max):.2f} deg, seed={seed}"
    )
    return scenario


def reference_scenario(n_targets: int, seed: int, stations: list[GroundStation] | None = None) -> Scenario:
    """Scenario with the reference constellation, satellites and horizon."""
    constellation = reference_constellation()
    return generate_instance(
        constellation, n_targets, reference_horizon(constellation.altitude_m), seed, stations=stations
    )


def reseed(scenario: Scenario, seed: int) -> Scenario:
    """Same set-up as ``scenario`` with a fresh target draw for ``seed``."""
    return generate_instance(
        scenario.constellation,
        len(scenario.targets),
        scenario.horizon,
        seed,
        stations=scenario.stations,
        satellite_template=scenario.satellites[0],
    )


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(scenario.model_dump_json(indent=2))
    logger.info(f"Scenario written to {path}")


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file; nothing partial is returned on failure."""
    text = Path(path).read_text()
    try:
        return Scenario.model_validate_json(text)
    except ValidationError as exc:
        raise _from_validation_error(exc) from exc
