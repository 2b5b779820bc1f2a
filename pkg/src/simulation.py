"""
Simulation

Drives the STH planning loop and the store-and-forward execution model:
1. Per STP: price OTWs with the current delta values, schedule them
2. Execute: every scheduled observation is captured and queued for downlink
3. Downlink: each satellite drains its FIFO queue over its contact windows
4. Roll delta over and, after the last STP, aggregate the run report

compare() runs every algorithm on the same instances and pairs them with FIFO.
"""

import bisect
import logging
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

from src.config import GEOMETRY_SCAN_STEP_S
from src.discretization import ObservationTimeWindow, compressed_size, discretize, reprice
from src.models import SatelliteSpec, Scenario
from src.orbit_geometry import ContactWindow, VisibleTimeWindow, compute_contact_windows, compute_vtws, orbital_period_s
from src.priority import ConflictGraph, build_conflict_graph
from src.reporting import (
    Comparison,
    RunReport,
    TargetMetrics,
    comparison_delta,
    comparison_row,
    mean_or_none,
    percentile_or_none,
    variance_or_none,
)
from src.resource_models import comm_time
from src.scenario import generate_instance
from src.scheduler import Schedule, StpInputs, construct, fifo_schedule, local_search, validate_schedule
from src.timing_metrics import (
    TargetTimeline,
    UndefinedMetricError,
    advance_stp,
    average_aoi,
    average_paoi,
    delta_max,
    new_timelines,
    record_arrival,
    record_capture,
)

logger = logging.getLogger(__name__)


class Algorithm(str, Enum):
    Fifo = "fifo"
    Heuristic = "heuristic"
    HeuristicLs = "heuristic-ls"

    @property
    def label(self) -> str:
        return {"fifo": "FIFO", "heuristic": "Heuristic", "heuristic-ls": "Heuristic+LS"}[self.value]


# ---------------------------------------------------------------------------
# Planning context
# ---------------------------------------------------------------------------


class PlanningContext:
    """Geometry-only planning data for one scenario, computed once and shared by all algorithms.

    Profits are not cached: ``stp_inputs`` re-prices the STP's OTWs with the
    delta values passed in.
    """

    def __init__(self, scenario: Scenario, scan_step_s: float = GEOMETRY_SCAN_STEP_S):
        self.scenario = scenario
        self.scan_step_s = scan_step_s
        self._graphs: dict[int, ConflictGraph] = {}

    @cached_property
    def vtws(self) -> list[VisibleTimeWindow]:
        return compute_vtws(self.scenario, self.scan_step_s)

    @cached_property
    def contacts(self) -> list[ContactWindow]:
        return compute_contact_windows(self.scenario, self.scan_step_s)

    @cached_property
    def otws(self) -> list[ObservationTimeWindow]:
        return discretize(self.vtws, self.scenario)

    @cached_property
    def _otws_by_stp(self) -> dict[int, list[ObservationTimeWindow]]:
        grouped: dict[int, list[ObservationTimeWindow]] = defaultdict(list)
        for otw in self.otws:
            grouped[otw.stp_index].append(otw)
        return dict(grouped)

    def otws_for_stp(self, stp_index: int) -> list[ObservationTimeWindow]:
        return self._otws_by_stp.get(stp_index, [])

    def contacts_for(self, satellite_id: int) -> list[ContactWindow]:
        return [c for c in self.contacts if c.satellite_id == satellite_id]

    def conflict_graph(self, stp_index: int) -> ConflictGraph:
        if stp_index not in self._graphs:
            self._graphs[stp_index] = build_conflict_graph(
                self.otws_for_stp(stp_index), stp_index, self.scenario.satellite_map()
            )
        return self._graphs[stp_index]

    def stp_inputs(self, stp_index: int, deltas: Mapping[int, int]) -> StpInputs:
        start, end = self.scenario.horizon.stp_bounds(stp_index)
        dmax = max([1, *deltas.values()])
        return StpInputs(
            stp_index=stp_index,
            stp_start_s=start,
            stp_end_s=end,
            satellites=self.scenario.satellite_map(),
            otws=reprice(self.otws_for_stp(stp_index), self.scenario, deltas, dmax),
            conflict_graph=self.conflict_graph(stp_index),
            deltas=dict(deltas),
        )


def schedule_stp(inputs: StpInputs, algorithm: Algorithm) -> Schedule:
    if algorithm is Algorithm.Fifo:
        return fifo_schedule(inputs)
    schedule = construct(inputs)
    if algorithm is Algorithm.HeuristicLs:
        schedule = local_search(schedule, inputs)
    return schedule


# ---------------------------------------------------------------------------
# Store-and-forward downlink
# ---------------------------------------------------------------------------


@dataclass
class DownlinkItem:
    satellite_id: int
    target_id: int
    capture_s: float
    ready_s: float
    bits: float
    remaining_bits: float = field(init=False)
    tx_start_s: float | None = None

    def __post_init__(self) -> None:
        self.remaining_bits = self.bits


@dataclass(frozen=True)
class Delivery:
    satellite_id: int
    target_id: int
    station_id: str
    capture_s: float
    ready_s: float
    tx_start_s: float
    tx_end_s: float
    arrival_s: float
    bits: float

    @property
    def store_time_s(self) -> float:
        return self.tx_start_s - self.ready_s


class DownlinkQueue:
    """One satellite's onboard buffer, drained FIFO by ready time over its contacts.

    One frame is on the link at a time. A transmission cut by a contact's end
    resumes with the remaining bits at the next contact.
    """

    def __init__(self, satellite: SatelliteSpec, contacts: Iterable[ContactWindow]):
        self.satellite_id = satellite.id
        self.rate_bps = satellite.downlink_rate_bps
        self._contacts = sorted(contacts, key=lambda c: (c.start_s, c.station_id))
        self._pending: list[DownlinkItem] = []
        self._clock = 0.0
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._pending)

    @property
    def pending(self) -> list[DownlinkItem]:
        return list(self._pending)

    def enqueue(self, item: DownlinkItem) -> None:
        bisect.insort(self._pending, item, key=lambda i: (i.ready_s, i.capture_s, i.target_id))

    def _contact_after(self, t: float) -> ContactWindow | None:
        while self._cursor < len(self._contacts) and self._contacts[self._cursor].end_s <= t:
            self._cursor += 1
        for contact in self._contacts[self._cursor:]:
            if contact.end_s > t:
                return contact
        return None

    def advance(self, until_s: float) -> list[Delivery]:
        """Transmit whatever fits before ``until_s``; returns completed frames."""
        deliveries: list[Delivery] = []
        while self._pending:
            item = self._pending[0]
            t = max(self._clock, item.ready_s)
            if t >= until_s:
                break
            contact = self._contact_after(t)
            if contact is None:
                break
            start = max(t, contact.start_s)
            if start >= until_s:
                break
            stop = min(contact.end_s, until_s)
            if item.tx_start_s is None:
                item.tx_start_s = start
            needed = item.remaining_bits / self.rate_bps
            if start + needed <= stop:
                finish = start + needed
                self._pending.pop(0)
                item.remaining_bits = 0.0
                self._clock = finish
                deliveries.append(
                    Delivery(
                        satellite_id=self.satellite_id,
                        target_id=item.target_id,
                        station_id=contact.station_id,
                        capture_s=item.capture_s,
                        ready_s=item.ready_s,
                        tx_start_s=item.tx_start_s,
                        tx_end_s=finish,
                        arrival_s=finish + comm_time(0.0, self.rate_bps, contact.representative_distance_m),
                        bits=item.bits,
                    )
                )
            else:
                item.remaining_bits -= (stop - start) * self.rate_bps
                self._clock = stop
        return deliveries


# ---------------------------------------------------------------------------
# Run
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Capture:
    stp_index: int
    satellite_id: int
    target_id: int
    capture_s: float
    gsd_m_per_px: float
    profit: float


@dataclass
class RunTrace:
    """Event log of one run, kept for inspection and tests."""

    schedules: list[Schedule] = field(default_factory=list)
    captures: list[Capture] = field(default_factory=list)
    deliveries: list[Delivery] = field(default_factory=list)
    queued: list[DownlinkItem] = field(default_factory=list)
    timelines: dict[int, TargetTimeline] = field(default_factory=dict)


def _build_report(
    scenario: Scenario,
    algorithm: Algorithm,
    trace: RunTrace,
    stp_profits: list[float],
    wall_time_s: float,
) -> RunReport:
    sth = scenario.horizon.sth_duration_s
    period = orbital_period_s(scenario.constellation.altitude_m)

    rows: list[TargetMetrics] = []
    for target in scenario.targets:
        timeline = trace.timelines[target.id]
        try:
            aoi = average_aoi(timeline, sth)
            paoi = average_paoi(timeline, sth)
        except UndefinedMetricError:
            aoi = paoi = None
        rows.append(
            TargetMetrics(
                target_id=target.id,
                n_captures=timeline.n_captures,
                n_delivered=len(timeline.completed(sth)),
                avg_aoi_s=aoi,
                avg_paoi_s=paoi,
                avg_aoi_periods=None if aoi is None else aoi / period,
                avg_paoi_periods=None if paoi is None else paoi / period,
                final_delta=timeline.delta,
            )
        )

    n_targets = len(scenario.targets)
    missed = sum(1 for r in rows if r.n_captures == 0)
    aois = [r.avg_aoi_s for r in rows if r.avg_aoi_s is not None]
    gsds = [c.gsd_m_per_px for c in trace.captures]
    return RunReport(
        algorithm=algorithm.label,
        seed=scenario.rng_seed,
        n_targets=n_targets,
        n_satellites=len(scenario.satellites),
        sth_s=sth,
        orbital_period_s=period,
        total_profit=math.fsum(stp_profits),
        stp_profits=stp_profits,
        missed_target_count=missed,
        missed_target_pct=100.0 * missed / n_targets if n_targets else 0.0,
        n_captures=len(trace.captures),
        n_delivered=sum(r.n_delivered for r in rows),
        gsd_values=gsds,
        mean_gsd=mean_or_none(gsds),
        mean_aoi_s=mean_or_none(aois),
        aoi_variance_s2=variance_or_none(aois),
        p99_aoi_periods=percentile_or_none((r.avg_aoi_periods for r in rows if r.avg_aoi_periods is not None), 99),
        mean_paoi_s=mean_or_none(r.avg_paoi_s for r in rows if r.avg_paoi_s is not None),
        p99_paoi_periods=percentile_or_none((r.avg_paoi_periods for r in rows if r.avg_paoi_periods is not None), 99),
        targets=rows,
        wall_time_s=wall_time_s,
    )


def simulate(
    scenario: Scenario,
    algorithm: Algorithm,
    context: PlanningContext | None = None,
) -> tuple[RunReport, RunTrace]:
    """Run the planning loop and return the report together with its event log."""
    started = time.perf_counter()
    algorithm = Algorithm(algorithm)
    context = context or PlanningContext(scenario)
    horizon = scenario.horizon
    sth = horizon.sth_duration_s
    satellites = scenario.satellite_map()

    trace = RunTrace(timelines=new_timelines(t.id for t in scenario.targets))
    queues = {sid: DownlinkQueue(sat, context.contacts_for(sid)) for sid, sat in satellites.items()}
    stp_profits: list[float] = []

    for k in range(horizon.n_stp):
        deltas = {tid: tl.delta for tid, tl in trace.timelines.items()}
        inputs = context.stp_inputs(k, deltas)
        schedule = schedule_stp(inputs, algorithm)

        violations = validate_schedule(schedule)
        if violations:
            logger.warning(f"STP {k}: {algorithm.label} schedule has {len(violations)} violations: {violations[0]}")

        for otw in sorted(schedule.observations(), key=lambda w: (w.start_s, w.satellite_id)):
            sat = satellites[otw.satellite_id]
            record_capture(trace.timelines[otw.target_id], otw.start_s, sth)
            trace.captures.append(
                Capture(k, otw.satellite_id, otw.target_id, otw.start_s, otw.pointing.gsd_m_per_px, otw.profit)
            )
            queues[otw.satellite_id].enqueue(
                DownlinkItem(
                    satellite_id=otw.satellite_id,
                    target_id=otw.target_id,
                    capture_s=otw.start_s,
                    ready_s=otw.end_s + otw.proc_time_s,
                    bits=compressed_size(otw.data_bits, sat.compression_factor),
                )
            )

        _, stp_end = horizon.stp_bounds(k)
        for sid in sorted(queues):
            for delivery in queues[sid].advance(stp_end):
                record_arrival(trace.timelines[delivery.target_id], delivery.capture_s, delivery.arrival_s)
                trace.deliveries.append(delivery)

        advance_stp(trace.timelines, schedule.scheduled_targets, k)
        trace.schedules.append(schedule)
        stp_profits.append(schedule.total_profit)
        logger.info(
            f"STP {k + 1}/{horizon.n_stp} [{algorithm.label}]: {len(schedule)} observations "
            f"from {len(inputs.otws)} OTWs, profit={schedule.total_profit:.4f}, "
            f"delta_max={delta_max(trace.timelines)}"
        )

    trace.queued = [item for sid in sorted(queues) for item in queues[sid].pending]
    report = _build_report(scenario, algorithm, trace, stp_profits, time.perf_counter() - started)
    logger.info(
        f"Run [{algorithm.label}] seed={scenario.rng_seed}: profit={report.total_profit:.4f}, "
        f"missed={report.missed_target_pct:.1f}%, captures={report.n_captures}, "
        f"delivered={report.n_delivered}, wall={report.wall_time_s:.1f}s"
    )
    return report, trace


def run(scenario: Scenario, algorithm: Algorithm, context: PlanningContext | None = None) -> RunReport:
    report, _ = simulate(scenario, algorithm, context)
    return report


# ---------------------------------------------------------------------------
# Compare
# ---------------------------------------------------------------------------


def _instance(scenario: Scenario, n_targets: int, seed: int) -> Scenario:
    if seed == scenario.rng_seed and n_targets == len(scenario.targets):
        return scenario
    return generate_instance(
        scenario.constellation,
        n_targets,
        scenario.horizon,
        seed,
        stations=scenario.stations,
        satellite_template=scenario.satellites[0],
    )


def compare(
    scenario: Scenario,
    seeds: Iterable[int],
    target_counts: Iterable[int] | None = None,
    algorithms: Iterable[Algorithm] = tuple(Algorithm),
) -> Comparison:
    """Run every algorithm on each (target count, seed) instance.

    A seed other than the scenario's own (or a different target count) draws a
    fresh target set on the same constellation, horizon and stations. Rows are
    ordered by (count, seed, algorithm) and every non-FIFO run is paired with
    the FIFO run on the same instance.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("compare needs at least one seed")
    counts = list(target_counts) if target_counts else [len(scenario.targets)]
    algorithms = [Algorithm(a) for a in algorithms]

    reports: list[RunReport] = []
    deltas = []
    for count in counts:
        for seed in seeds:
            instance = _instance(scenario, count, seed)
            context = PlanningContext(instance)
            by_algorithm = {alg: run(instance, alg, context) for alg in algorithms}
            reports.extend(by_algorithm.values())
            baseline = by_algorithm.get(Algorithm.Fifo)
            if baseline is not None:
                deltas.extend(
                    comparison_delta(report, baseline)
                    for alg, report in by_algorithm.items()
                    if alg is not Algorithm.Fifo
                )

    logger.info(f"Compared {len(algorithms)} algorithms over {len(counts)} sizes x {len(seeds)} seeds")
    return Comparison(rows=[comparison_row(r) for r in reports], deltas=deltas, reports=reports)
