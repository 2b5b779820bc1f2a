import numpy as np
import pytest

from src.config import SPEED_OF_LIGHT_M_S
from src.orbit_geometry import ContactWindow
from src.scenario import reference_scenario
from src.scheduler import construct, local_search, schedule_rows, validate_schedule, validate_schedule_table
from src.simulation import (
    Algorithm,
    DownlinkItem,
    DownlinkQueue,
    PlanningContext,
    compare,
    run,
    schedule_stp,
    simulate,
)
from tests.conftest import make_satellite, make_scenario

RATE = 1e6


def contact(start, end, distance=1_000_000.0, station="gs"):
    return ContactWindow(0, station, start, end, distance)


def item(ready_s, bits=1e6, target_id=0, capture_s=None):
    return DownlinkItem(
        satellite_id=0, target_id=target_id, capture_s=ready_s - 1.0 if capture_s is None else capture_s,
        ready_s=ready_s, bits=bits,
    )


def make_queue(contacts):
    return DownlinkQueue(make_satellite(0, downlink_rate_bps=RATE), contacts)


# ---------------------------------------------------------------------------
# Downlink queue
# ---------------------------------------------------------------------------


class TestDownlinkQueue:
    def test_uninterrupted_transfer(self):
        queue = make_queue([contact(100.0, 1000.0)])
        queue.enqueue(item(150.0))
        (delivery,) = queue.advance(2000.0)
        assert delivery.tx_start_s == 150.0
        assert delivery.tx_end_s == pytest.approx(151.0)
        assert delivery.arrival_s == pytest.approx(151.0 + 1_000_000.0 / SPEED_OF_LIGHT_M_S)
        assert delivery.store_time_s == 0.0

    def test_waits_for_contact(self):
        queue = make_queue([contact(100.0, 1000.0)])
        queue.enqueue(item(50.0))
        (delivery,) = queue.advance(2000.0)
        assert delivery.tx_start_s == 100.0
        assert delivery.store_time_s == 50.0

    def test_resumes_in_next_contact(self):
        queue = make_queue([contact(100.0, 100.5), contact(200.0, 300.0, distance=2_000_000.0, station="b")])
        queue.enqueue(item(0.0))
        (delivery,) = queue.advance(1000.0)
        assert delivery.tx_start_s == 100.0
        assert delivery.tx_end_s == pytest.approx(200.5)
        assert delivery.station_id == "b"
        assert delivery.arrival_s == pytest.approx(200.5 + 2_000_000.0 / SPEED_OF_LIGHT_M_S)

    def test_fifo_by_ready_time(self):
        queue = make_queue([contact(0.0, 100.0)])
        queue.enqueue(item(10.0, target_id=1))
        queue.enqueue(item(5.0, target_id=2))
        first, second = queue.advance(100.0)
        assert (first.target_id, second.target_id) == (2, 1)
        assert first.tx_end_s == pytest.approx(6.0)
        assert second.tx_start_s == 10.0

    def test_one_frame_on_link_at_a_time(self):
        queue = make_queue([contact(0.0, 100.0)])
        queue.enqueue(item(5.0, bits=3e6, target_id=1))
        queue.enqueue(item(6.0, target_id=2))
        first, second = queue.advance(100.0)
        assert second.tx_start_s == pytest.approx(first.tx_end_s)

    def test_stops_at_until_and_keeps_remainder(self):
        queue = make_queue([contact(0.0, 100.0)])
        queue.enqueue(item(50.0, bits=1e8))
        assert queue.advance(60.0) == []
        assert queue.pending[0].remaining_bits == pytest.approx(9e7)
        assert queue.advance(500.0) == []
        assert queue.pending[0].remaining_bits == pytest.approx(5e7)
        assert len(queue) == 1

    def test_no_contacts(self):
        queue = make_queue([])
        queue.enqueue(item(1.0))
        assert queue.advance(1e6) == []
        assert len(queue) == 1


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def scenario():
    return make_scenario(n_targets=12, seed=3, n_planes=1, sats_per_plane=2, n_stp=3, periods=3)


@pytest.fixture(scope="module")
def context(scenario):
    return PlanningContext(scenario)


@pytest.fixture(scope="module")
def runs(scenario, context):
    return {alg: simulate(scenario, alg, context) for alg in Algorithm}


def test_every_schedule_is_feasible(runs, scenario, context):
    for report, trace in runs.values():
        assert len(trace.schedules) == scenario.horizon.n_stp
        for schedule in trace.schedules:
            assert validate_schedule(schedule) == []
        assert validate_schedule_table(schedule_rows(trace.schedules), scenario, context.vtws) == []


def test_report_totals(runs, scenario):
    for algorithm, (report, trace) in runs.items():
        assert report.algorithm == algorithm.label
        assert report.total_profit == pytest.approx(sum(report.stp_profits))
        assert len(report.stp_profits) == scenario.horizon.n_stp
        assert report.n_captures == len(trace.captures) == sum(t.n_captures for t in report.targets)
        missed = sum(1 for t in report.targets if t.n_captures == 0)
        assert report.missed_target_count == missed
        assert report.missed_target_pct == pytest.approx(100.0 * missed / len(scenario.targets))
        assert len(report.gsd_values) == report.n_captures


def test_frames_are_conserved(runs):
    for _, trace in runs.values():
        assert len(trace.captures) == len(trace.deliveries) + len(trace.queued)


def test_delivery_timestamps_are_ordered(runs):
    for _, trace in runs.values():
        for d in trace.deliveries:
            assert d.capture_s <= d.ready_s <= d.tx_start_s <= d.tx_end_s < d.arrival_s


def test_delta_follows_schedule_history(runs, scenario):
    for report, trace in runs.values():
        for target in scenario.targets:
            delta = 1
            for schedule in trace.schedules:
                delta = 1 if schedule.is_scheduled(target.id) else delta + 1
            assert trace.timelines[target.id].delta == delta
            assert report.targets[target.id].final_delta == delta


def test_local_search_never_loses_first_stp(runs):
    heuristic, _ = runs[Algorithm.Heuristic]
    improved, _ = runs[Algorithm.HeuristicLs]
    assert improved.stp_profits[0] >= heuristic.stp_profits[0] - 1e-12


def test_schedule_stp_matches_direct_calls(context, scenario):
    inputs = context.stp_inputs(0, {t.id: 1 for t in scenario.targets})
    greedy = schedule_stp(inputs, Algorithm.Heuristic)
    assert greedy.keys() == construct(inputs).keys()
    assert schedule_stp(inputs, Algorithm.HeuristicLs).keys() == local_search(construct(inputs), inputs).keys()


def test_run_is_deterministic(scenario, context, runs):
    again = run(scenario, Algorithm.HeuristicLs, context)
    assert again.model_dump() == runs[Algorithm.HeuristicLs][0].model_dump()


def test_empty_target_list():
    scenario = make_scenario(n_targets=1).model_copy(update={"targets": []})
    report, trace = simulate(scenario, Algorithm.HeuristicLs)
    assert report.total_profit == 0.0
    assert report.missed_target_pct == 0.0
    assert report.n_captures == 0
    assert report.mean_aoi_s is None
    assert trace.deliveries == []


def test_compare_pairs_each_run_with_fifo(scenario):
    comparison = compare(scenario, seeds=[scenario.rng_seed, scenario.rng_seed + 1])
    assert len(comparison.rows) == 6
    assert [r.algorithm for r in comparison.rows[:3]] == ["FIFO", "Heuristic", "Heuristic+LS"]
    assert {r.seed for r in comparison.rows} == {scenario.rng_seed, scenario.rng_seed + 1}
    assert len(comparison.deltas) == 4
    assert all(d.algorithm != "FIFO" for d in comparison.deltas)


def test_compare_without_fifo_has_no_deltas(scenario):
    comparison = compare(scenario, seeds=[scenario.rng_seed], algorithms=[Algorithm.Heuristic])
    assert len(comparison.rows) == 1
    assert comparison.deltas == []


def test_compare_needs_a_seed(scenario):
    with pytest.raises(ValueError):
        compare(scenario, seeds=[])


@pytest.mark.slow
def test_feasibility_across_instances():
    for seed in range(50):
        scenario = make_scenario(n_targets=50 + 2 * seed, seed=seed, n_planes=2, sats_per_plane=1, n_stp=3, periods=3)
        context = PlanningContext(scenario)
        for algorithm in Algorithm:
            _, trace = simulate(scenario, algorithm, context)
            rows = schedule_rows(trace.schedules)
            assert validate_schedule_table(rows, scenario, context.vtws) == []
        for k in range(scenario.horizon.n_stp):
            inputs = context.stp_inputs(k, {t.id: 1 + (t.id + k) % 3 for t in scenario.targets})
            greedy = construct(inputs)
            assert local_search(greedy, inputs).total_profit >= greedy.total_profit


@pytest.mark.slow
def test_staleness_aware_scheduling_beats_fifo_on_oversubscribed_instance():
    scenario = make_scenario(n_targets=300, seed=1, n_planes=2, sats_per_plane=2, n_stp=5, periods=5)
    context = PlanningContext(scenario)
    fifo = run(scenario, Algorithm.Fifo, context)
    improved = run(scenario, Algorithm.HeuristicLs, context)
    assert improved.missed_target_pct <= fifo.missed_target_pct


@pytest.mark.slow
def test_heuristic_beats_fifo_on_reference_constellation():
    seeds = [1, 2, 3, 4, 5]
    comparison = compare(
        reference_scenario(200, seed=1), seeds, algorithms=[Algorithm.Fifo, Algorithm.Heuristic]
    )
    by_key = {(r.seed, r.algorithm): r for r in comparison.reports}
    for seed in seeds:
        fifo, ours = by_key[(seed, "FIFO")], by_key[(seed, "Heuristic")]
        assert ours.total_profit > fifo.total_profit
        assert ours.missed_target_pct <= fifo.missed_target_pct

    def pooled(algorithm, attr):
        values = [getattr(by_key[(s, algorithm)], attr) for s in seeds]
        return float(np.mean([v for v in values if v is not None]))

    assert pooled("Heuristic", "mean_gsd") <= pooled("FIFO", "mean_gsd")
    assert pooled("Heuristic", "aoi_variance_s2") <= pooled("FIFO", "aoi_variance_s2")
