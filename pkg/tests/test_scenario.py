import json
import math

import pytest

from src.orbit_geometry import max_observable_latitude_rad
from src.scenario import (
    ScenarioError,
    generate_instance,
    load_scenario,
    load_stations,
    reference_constellation,
    reference_horizon,
    reference_scenario,
    reference_satellite,
    reseed,
    save_scenario,
)
from tests.conftest import make_scenario


class TestGenerateInstance:
    def test_same_seed_same_instance(self):
        assert reference_scenario(40, seed=3) == reference_scenario(40, seed=3)

    def test_different_seed_moves_targets(self):
        a, b = reference_scenario(40, seed=3), reference_scenario(40, seed=4)
        assert [t.lat_rad for t in a.targets] != [t.lat_rad for t in b.targets]

    def test_counts_and_ids(self):
        scenario = reference_scenario(25, seed=1)
        assert len(scenario.satellites) == 8
        assert [s.id for s in scenario.satellites] == list(range(8))
        assert [t.id for t in scenario.targets] == list(range(25))
        assert scenario.rng_seed == 1

    def test_targets_inside_observable_band(self):
        scenario = reference_scenario(500, seed=11)
        lat_max = max_observable_latitude_rad(scenario.constellation, scenario.satellites[0])
        assert all(abs(t.lat_rad) <= lat_max + 1e-12 for t in scenario.targets)
        assert all(-math.pi <= t.lon_rad < math.pi for t in scenario.targets)
        assert all(1.0 <= t.obs_duration_s <= 5.0 for t in scenario.targets)

    def test_reference_horizon(self):
        scenario = reference_scenario(5, seed=0)
        assert scenario.horizon.n_stp == 10
        assert scenario.horizon.otw_step_s == 10.0
        assert scenario.horizon.sth_duration_s == pytest.approx(10 * 5792.3, abs=20.0)

    def test_zero_targets_rejected(self):
        with pytest.raises(ScenarioError) as exc:
            generate_instance(reference_constellation(), 0, reference_horizon(), seed=1, stations=[])
        assert exc.value.field == "n_targets"

    def test_dict_inputs_accepted(self):
        constellation = reference_constellation().model_dump()
        horizon = reference_horizon().model_dump()
        scenario = generate_instance(constellation, 3, horizon, seed=2, stations=[])
        assert scenario.constellation == reference_constellation()

    def test_reseed_keeps_setup(self):
        base = make_scenario(n_targets=6, seed=1)
        other = reseed(base, 2)
        assert other.constellation == base.constellation
        assert other.horizon == base.horizon
        assert other.stations == base.stations
        assert len(other.targets) == 6
        assert other.rng_seed == 2
        assert other.targets != base.targets


class TestInvalidConfiguration:
    def test_constellation_field(self):
        with pytest.raises(ScenarioError) as exc:
            reference_constellation(n_planes=0)
        assert exc.value.field.startswith("constellation")

    def test_satellite_field(self):
        with pytest.raises(ScenarioError) as exc:
            reference_satellite(0, e_max=-1.0)
        assert exc.value.field == "satellite.e_max"

    def test_horizon_too_short_for_stps(self):
        with pytest.raises(ScenarioError):
            reference_horizon(n_stp=1000, sth_duration_s=10.0)

    def test_horizon_stp_length_tolerance(self):
        assert reference_horizon(n_stp=10, sth_duration_s=10.0).stp_duration_s == 1.0
        with pytest.raises(ScenarioError) as exc:
            reference_horizon(n_stp=10, sth_duration_s=9.5)
        assert exc.value.field.startswith("horizon")


class TestPersistence:
    def test_round_trip(self, tmp_path):
        scenario = make_scenario(n_targets=8)
        path = tmp_path / "nested" / "scenario.json"
        save_scenario(scenario, path)
        assert load_scenario(path) == scenario

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{ not json")
        with pytest.raises(ScenarioError):
            load_scenario(path)

    def test_duplicate_target_ids(self, tmp_path):
        raw = json.loads(make_scenario(n_targets=3).model_dump_json())
        raw["targets"][1]["id"] = raw["targets"][0]["id"]
        path = tmp_path / "dup.json"
        path.write_text(json.dumps(raw))
        with pytest.raises(ScenarioError) as exc:
            load_scenario(path)
        assert "duplicate" in exc.value.detail

    def test_unknown_schema_version(self, tmp_path):
        raw = json.loads(make_scenario(n_targets=3).model_dump_json())
        raw["schema_version"] = 99
        path = tmp_path / "future.json"
        path.write_text(json.dumps(raw))
        with pytest.raises(ScenarioError) as exc:
            load_scenario(path)
        assert exc.value.field == "schema_version"

    def test_satellite_count_must_match_constellation(self, tmp_path):
        raw = json.loads(make_scenario(n_targets=3).model_dump_json())
        raw["satellites"] = []
        path = tmp_path / "nosats.json"
        path.write_text(json.dumps(raw))
        with pytest.raises(ScenarioError):
            load_scenario(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_scenario(tmp_path / "absent.json")


class TestStations:
    def test_bundled_network(self):
        stations = load_stations()
        assert len(stations) == 12
        assert len({s.id for s in stations}) == 12
        assert all(math.radians(5.0) - 1e-12 <= s.min_elevation_rad < math.pi / 2 for s in stations)

    def test_custom_file_and_default_elevation(self, tmp_path):
        path = tmp_path / "gs.json"
        path.write_text(json.dumps([{"id": "a", "lat_deg": 10, "lon_deg": 190}]))
        (station,) = load_stations(path)
        assert station.lon_rad == pytest.approx(math.radians(-170.0))
        assert station.min_elevation_rad == pytest.approx(math.radians(5.0))

    def test_missing_key(self, tmp_path):
        path = tmp_path / "gs.json"
        path.write_text(json.dumps({"stations": [{"id": "a", "lat_deg": 10}]}))
        with pytest.raises(ScenarioError) as exc:
            load_stations(path)
        assert exc.value.field == "stations[0]"

    def test_duplicate_ids(self, tmp_path):
        path = tmp_path / "gs.json"
        entry = {"id": "a", "lat_deg": 10, "lon_deg": 0}
        path.write_text(json.dumps([entry, entry]))
        with pytest.raises(ScenarioError):
            load_stations(path)
