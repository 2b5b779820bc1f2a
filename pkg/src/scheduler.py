"""
Scheduler

Builds one schedule per STP:
1. check_insertion: can an OTW join a satellite's sequence (timing, energy, uniqueness)
2. construct: greedy walk over the priority order
3. local_search: single insertion/removal pass over unscheduled targets
4. fifo_schedule: baseline in ascending VTW order

validate_schedule / validate_schedule_table re-check finished schedules from
scratch and return human-readable violations.
"""

import bisect
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from src.config import NADIR_ATTITUDE, PROFIT_IMPROVEMENT_EPS
from src.discretization import ObservationTimeWindow, OtwKey
from src.models import SatelliteSpec, Scenario
from src.orbit_geometry import VisibleTimeWindow, compute_vtws
from src.priority import ConflictGraph, PriorityOrder, build_priority_order
from src.resource_models import (
    Attitude,
    EnergyKind,
    EnergyLedger,
    charge_energy,
    maneuver_time,
)

logger = logging.getLogger(__name__)

_ENERGY_TOL = 1e-9
_VALIDATION_TOL = 1e-6


# ---------------------------------------------------------------------------
# Insertion outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Feasible:
    insert_position: int
    transition_costs: tuple[float, float]  # (into the OTW, out of it to the successor) seconds
    energy_delta: float


@dataclass(frozen=True)
class TemporalViolation:
    conflicting_entries: tuple[OtwKey, ...]
    initial_pose: bool = False


@dataclass(frozen=True)
class EnergyViolation:
    deficit: float


@dataclass(frozen=True)
class DuplicateTarget:
    target_id: int
    scheduled: OtwKey


InsertionResult = Feasible | TemporalViolation | EnergyViolation | DuplicateTarget


# ---------------------------------------------------------------------------
# Schedule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScheduledObservation:
    otw: ObservationTimeWindow
    predecessor: OtwKey | None
    successor: OtwKey | None


def replay_ledger(
    sequence: Iterable[ObservationTimeWindow], satellite: SatelliteSpec, stp_index: int
) -> EnergyLedger:
    """Charge a start-ordered sequence from the nadir pose; raises ``OverBudgetError``."""
    ledger = EnergyLedger(satellite_id=satellite.id, stp_index=stp_index, budget=satellite.e_max)
    attitude: Attitude = NADIR_ATTITUDE
    for otw in sequence:
        ledger = charge_energy(ledger, EnergyKind.Tran, maneuver_time(attitude, otw.pointing.angles), satellite)
        ledger = charge_energy(ledger, EnergyKind.Obs, otw.obs_duration_s, satellite)
        ledger = charge_energy(ledger, EnergyKind.Proc, otw.proc_time_s, satellite)
        attitude = otw.pointing.angles
    return ledger


def _sort_key(otw: ObservationTimeWindow) -> tuple:
    return (otw.start_s, otw.key)


class Schedule:
    """Per-satellite, start-ordered observation sequences for one STP."""

    def __init__(
        self,
        stp_index: int,
        stp_start_s: float,
        stp_end_s: float,
        satellites: Mapping[int, SatelliteSpec],
    ):
        self.stp_index = stp_index
        self.stp_start_s = stp_start_s
        self.stp_end_s = stp_end_s
        self.satellites = dict(satellites)
        self._sequences: dict[int, list[ObservationTimeWindow]] = {sid: [] for sid in self.satellites}
        self._by_target: dict[int, ObservationTimeWindow] = {}
        self._ledgers: dict[int, EnergyLedger] = {
            sid: EnergyLedger(satellite_id=sid, stp_index=stp_index, budget=sat.e_max)
            for sid, sat in self.satellites.items()
        }

    def __len__(self) -> int:
        return len(self._by_target)

    def __repr__(self) -> str:
        return f"Schedule(stp={self.stp_index}, observations={len(self)}, profit={self.total_profit:.6g})"

    # -- queries ------------------------------------------------------------

    @property
    def total_profit(self) -> float:
        return math.fsum(otw.profit for otw in self._by_target.values())

    @property
    def scheduled_targets(self) -> set[int]:
        return set(self._by_target)

    def keys(self) -> set[OtwKey]:
        return {otw.key for otw in self._by_target.values()}

    def is_scheduled(self, target_id: int) -> bool:
        return target_id in self._by_target

    def observation_for(self, target_id: int) -> ObservationTimeWindow | None:
        return self._by_target.get(target_id)

    def sequence(self, satellite_id: int) -> list[ObservationTimeWindow]:
        return list(self._sequences[satellite_id])

    def ledger(self, satellite_id: int) -> EnergyLedger:
        return self._ledgers[satellite_id]

    def observations(self) -> list[ObservationTimeWindow]:
        """Every scheduled OTW ordered by (satellite, start)."""
        return [otw for sid in sorted(self._sequences) for otw in self._sequences[sid]]

    def entries(self, satellite_id: int) -> list[ScheduledObservation]:
        seq = self._sequences[satellite_id]
        return [
            ScheduledObservation(
                otw=otw,
                predecessor=seq[i - 1].key if i > 0 else None,
                successor=seq[i + 1].key if i + 1 < len(seq) else None,
            )
            for i, otw in enumerate(seq)
        ]

    # -- mutation -----------------------------------------------------------

    def copy(self) -> "Schedule":
        clone = Schedule(self.stp_index, self.stp_start_s, self.stp_end_s, self.satellites)
        clone._sequences = {sid: list(seq) for sid, seq in self._sequences.items()}
        clone._by_target = dict(self._by_target)
        clone._ledgers = dict(self._ledgers)
        return clone

    def insert(self, otw: ObservationTimeWindow) -> None:
        """Commit an OTW; callers check feasibility first."""
        if otw.target_id in self._by_target:
            raise ValueError(f"Target {otw.target_id} already scheduled in STP {self.stp_index}")
        seq = self._sequences[otw.satellite_id]
        candidate = list(seq)
        bisect.insort(candidate, otw, key=_sort_key)
        ledger = replay_ledger(candidate, self.satellites[otw.satellite_id], self.stp_index)
        self._sequences[otw.satellite_id] = candidate
        self._ledgers[otw.satellite_id] = ledger
        self._by_target[otw.target_id] = otw

    def remove(self, key: OtwKey) -> ObservationTimeWindow:
        sat_id, target_id = key[0], key[1]
        otw = self._by_target.get(target_id)
        if otw is None or otw.key != key:
            raise KeyError(key)
        seq = [w for w in self._sequences[sat_id] if w.key != key]
        self._sequences[sat_id] = seq
        self._ledgers[sat_id] = replay_ledger(seq, self.satellites[sat_id], self.stp_index)
        del self._by_target[target_id]
        return otw


# ---------------------------------------------------------------------------
# Feasibility
# ---------------------------------------------------------------------------


def _follows(prev: ObservationTimeWindow, nxt: ObservationTimeWindow, transition_s: float) -> bool:
    return prev.end_s + max(transition_s, prev.proc_time_s) <= nxt.start_s


def check_insertion(schedule: Schedule, otw: ObservationTimeWindow) -> InsertionResult:
    """Test inserting ``otw`` into its satellite's sequence.

    The slot is fixed by start time. The predecessor (or the nadir pose at the
    STP start) and the successor must leave room for the maneuver and the
    processing time, the added energy must fit E_max and the target must not
    be scheduled yet.
    """
    if otw.stp_index != schedule.stp_index:
        raise ValueError(f"OTW {otw.key} belongs to STP {otw.stp_index}, not {schedule.stp_index}")

    existing = schedule.observation_for(otw.target_id)
    if existing is not None:
        return DuplicateTarget(target_id=otw.target_id, scheduled=existing.key)

    seq = schedule._sequences[otw.satellite_id]
    pos = bisect.bisect_left(seq, _sort_key(otw), key=_sort_key)
    pred = seq[pos - 1] if pos > 0 else None
    succ = seq[pos] if pos < len(seq) else None

    prev_angles = pred.pointing.angles if pred is not None else NADIR_ATTITUDE
    t_in = maneuver_time(prev_angles, otw.pointing.angles)
    t_out = maneuver_time(otw.pointing.angles, succ.pointing.angles) if succ is not None else 0.0

    blocking: list[OtwKey] = []
    initial_pose = False
    if pred is not None:
        if not _follows(pred, otw, t_in):
            blocking.append(pred.key)
    elif schedule.stp_start_s + t_in > otw.start_s:
        initial_pose = True
    if succ is not None and not _follows(otw, succ, t_out):
        blocking.append(succ.key)
    if blocking or initial_pose:
        return TemporalViolation(conflicting_entries=tuple(blocking), initial_pose=initial_pose)

    sat = schedule.satellites[otw.satellite_id]
    t_old = maneuver_time(prev_angles, succ.pointing.angles) if succ is not None else 0.0
    delta = (
        sat.e_obs_per_s * otw.obs_duration_s
        + sat.e_proc_per_s * otw.proc_time_s
        + sat.e_tran_per_s * (t_in + t_out - t_old)
    )
    ledger = schedule.ledger(otw.satellite_id)
    overshoot = ledger.total + delta - ledger.budget
    if overshoot > _ENERGY_TOL:
        return EnergyViolation(deficit=overshoot)
    return Feasible(insert_position=pos, transition_costs=(t_in, t_out), energy_delta=delta)


# ---------------------------------------------------------------------------
# STP inputs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StpInputs:
    """Everything one STP's scheduling pass needs; profits already priced."""

    stp_index: int
    stp_start_s: float
    stp_end_s: float
    satellites: Mapping[int, SatelliteSpec]
    otws: list[ObservationTimeWindow]
    conflict_graph: ConflictGraph
    deltas: Mapping[int, int]

    def empty_schedule(self) -> Schedule:
        return Schedule(self.stp_index, self.stp_start_s, self.stp_end_s, self.satellites)

    def priority_order(self) -> PriorityOrder:
        return build_priority_order(
            {otw.target_id for otw in self.otws}, self.otws, self.deltas, self.conflict_graph
        )


# ---------------------------------------------------------------------------
# Constructive heuristic
# ---------------------------------------------------------------------------


def construct(inputs: StpInputs, order: PriorityOrder | None = None) -> Schedule:
    """Commit each target's first feasible OTW, walking targets in priority order."""
    order = order or inputs.priority_order()
    schedule = inputs.empty_schedule()
    for target_id in order.targets:
        for otw in order.otws_by_target[target_id]:
            if isinstance(check_insertion(schedule, otw), Feasible):
                schedule.insert(otw)
                break

    logger.debug(
        f"STP {inputs.stp_index}: constructed {len(schedule)}/{len(order.targets)} targets, "
        f"profit={schedule.total_profit:.4f}"
    )
    return schedule


# ---------------------------------------------------------------------------
# Local search
# ---------------------------------------------------------------------------


def _repair_energy(trial: Schedule, candidate: ObservationTimeWindow, deficit: float) -> bool:
    """Drop the satellite's lowest-profit entries until ``candidate`` fits.

    A removal that does not shrink the deficit is undone. Returns whether the
    candidate became insertable; ``trial`` keeps the removals either way.
    """
    victims = sorted(trial.sequence(candidate.satellite_id), key=lambda w: (w.profit, w.start_s, w.key))
    for victim in victims:
        trial.remove(victim.key)
        result = check_insertion(trial, candidate)
        if isinstance(result, Feasible):
            return True
        if isinstance(result, EnergyViolation) and result.deficit < deficit:
            deficit = result.deficit
            continue
        trial.insert(victim)
    return False


def _try_candidate(
    schedule: Schedule, candidate: ObservationTimeWindow, graph: ConflictGraph
) -> Schedule | None:
    """Trial schedule with ``candidate`` inserted after removals, or None."""
    result = check_insertion(schedule, candidate)
    if isinstance(result, DuplicateTarget):
        return None

    trial = schedule.copy()
    if isinstance(result, TemporalViolation):
        scheduled = trial.keys()
        blocking = sorted(graph.neighbors(candidate.key) & scheduled)
        restricted_oc = math.fsum(trial.observation_for(key[1]).profit for key in blocking)
        if not blocking or restricted_oc >= candidate.profit:
            return None
        for key in blocking:
            trial.remove(key)
        result = check_insertion(trial, candidate)
        if isinstance(result, TemporalViolation):
            return None

    if isinstance(result, EnergyViolation) and not _repair_energy(trial, candidate, result.deficit):
        return None

    trial.insert(candidate)
    return trial


def local_search(
    schedule: Schedule,
    inputs: StpInputs,
    unscheduled_targets: Iterable[int] | None = None,
) -> Schedule:
    """One insertion/removal pass over the unscheduled targets.

    Candidates are ordered like the constructive pass, with OC counted only
    against OTWs in the current schedule. A move is kept only if it strictly
    raises total profit, so the result never scores below ``schedule``.
    """
    current = schedule.copy()
    if unscheduled_targets is None:
        unscheduled_targets = {otw.target_id for otw in inputs.otws}
    pending = set(unscheduled_targets) - current.scheduled_targets
    if not pending:
        return current

    order = build_priority_order(
        pending, inputs.otws, inputs.deltas, inputs.conflict_graph, restrict_to=current.keys()
    )
    moves = 0
    for target_id in order.targets:
        for candidate in order.otws_by_target[target_id]:
            trial = _try_candidate(current, candidate, inputs.conflict_graph)
            if trial is not None and trial.total_profit > current.total_profit + PROFIT_IMPROVEMENT_EPS:
                current = trial
                moves += 1
                break

    logger.debug(
        f"STP {inputs.stp_index}: local search accepted {moves} moves, "
        f"profit {schedule.total_profit:.4f} -> {current.total_profit:.4f}"
    )
    return current


# ---------------------------------------------------------------------------
# FIFO baseline
# ---------------------------------------------------------------------------


def fifo_schedule(inputs: StpInputs) -> Schedule:
    """Visit VTWs by start time and take each target's first feasible OTW."""
    schedule = inputs.empty_schedule()
    by_vtw: dict[tuple[float, int, int], list[ObservationTimeWindow]] = defaultdict(list)
    for otw in inputs.otws:
        by_vtw[(otw.vtw_start_s, otw.satellite_id, otw.target_id)].append(otw)

    for (_, _, target_id), group in sorted(by_vtw.items(), key=lambda kv: kv[0]):
        if schedule.is_scheduled(target_id):
            continue
        for otw in sorted(group, key=_sort_key):
            if isinstance(check_insertion(schedule, otw), Feasible):
                schedule.insert(otw)
                break

    logger.debug(f"STP {inputs.stp_index}: FIFO scheduled {len(schedule)} targets")
    return schedule


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScheduleRow:
    """One row of the schedule table; angles in radians."""

    stp_index: int
    satellite_id: int
    target_id: int
    orbit_index: int
    window_index: int
    start_s: float
    end_s: float
    roll_rad: float
    pitch_rad: float
    yaw_rad: float
    gsd_m_per_px: float
    profit: float
    proc_time_s: float

    @property
    def key(self) -> OtwKey:
        return (self.satellite_id, self.target_id, self.orbit_index, self.window_index)

    @property
    def angles(self) -> Attitude:
        return (self.roll_rad, self.pitch_rad, self.yaw_rad)

    @classmethod
    def from_otw(cls, otw: ObservationTimeWindow, stp_index: int) -> "ScheduleRow":
        return cls(
            stp_index=stp_index,
            satellite_id=otw.satellite_id,
            target_id=otw.target_id,
            orbit_index=otw.orbit_index,
            window_index=otw.window_index,
            start_s=otw.start_s,
            end_s=otw.end_s,
            roll_rad=otw.pointing.roll_rad,
            pitch_rad=otw.pointing.pitch_rad,
            yaw_rad=otw.pointing.yaw_rad,
            gsd_m_per_px=otw.pointing.gsd_m_per_px,
            profit=otw.profit,
            proc_time_s=otw.proc_time_s,
        )


def schedule_rows(schedules: Iterable[Schedule]) -> list[ScheduleRow]:
    """Flatten schedules into table rows ordered by (stp, satellite, start)."""
    return [ScheduleRow.from_otw(otw, s.stp_index) for s in schedules for otw in s.observations()]


def _violations(
    rows: list[ScheduleRow],
    satellites: Mapping[int, SatelliteSpec],
    stp_bounds: Callable[[int], tuple[float, float]],
    window_of: Callable[[ScheduleRow], tuple[float, float] | None],
    obs_duration: Mapping[int, float] | None = None,
) -> list[str]:
    problems: list[str] = []
    tol = _VALIDATION_TOL

    seen: set[tuple[int, OtwKey]] = set()
    per_target: dict[tuple[int, int], int] = defaultdict(int)
    per_satellite: dict[tuple[int, int], list[ScheduleRow]] = defaultdict(list)
    for row in rows:
        tag = f"STP {row.stp_index} OTW {row.key}"
        if (row.stp_index, row.key) in seen:
            problems.append(f"{tag}: decision selected more than once")
            continue
        seen.add((row.stp_index, row.key))
        if row.satellite_id not in satellites:
            problems.append(f"{tag}: unknown satellite {row.satellite_id}")
            continue
        per_target[(row.stp_index, row.target_id)] += 1
        per_satellite[(row.stp_index, row.satellite_id)].append(row)

        stp_start, stp_end = stp_bounds(row.stp_index)
        if row.start_s < stp_start - tol or row.end_s > stp_end + tol:
            problems.append(f"{tag}: [{row.start_s:.3f}, {row.end_s:.3f}] outside STP [{stp_start:.3f}, {stp_end:.3f}]")
        window = window_of(row)
        if window is None:
            problems.append(f"{tag}: no visible window contains [{row.start_s:.3f}, {row.end_s:.3f}]")
        elif row.start_s < window[0] - tol or row.end_s > window[1] + tol:
            problems.append(f"{tag}: [{row.start_s:.3f}, {row.end_s:.3f}] outside window [{window[0]:.3f}, {window[1]:.3f}]")
        if obs_duration is not None and row.target_id in obs_duration:
            if abs((row.end_s - row.start_s) - obs_duration[row.target_id]) > tol:
                problems.append(f"{tag}: duration {row.end_s - row.start_s:.6g} s != required {obs_duration[row.target_id]:.6g} s")

    for (stp, target_id), count in sorted(per_target.items()):
        if count > 1:
            problems.append(f"STP {stp} target {target_id}: observed {count} times")

    for (stp, sat_id), group in sorted(per_satellite.items()):
        sat = satellites[sat_id]
        group.sort(key=lambda r: (r.start_s, r.key))
        stp_start, _ = stp_bounds(stp)
        energy = 0.0
        prev: ScheduleRow | None = None
        for row in group:
            prev_angles = prev.angles if prev is not None else NADIR_ATTITUDE
            transition = maneuver_time(prev_angles, row.angles)
            ready = stp_start + transition if prev is None else prev.end_s + max(transition, prev.proc_time_s)
            if ready > row.start_s + tol:
                after = "nadir pose" if prev is None else f"OTW {prev.key}"
                problems.append(f"STP {stp} OTW {row.key}: starts {row.start_s:.3f} before {after} allows {ready:.3f}")
            energy += (
                sat.e_tran_per_s * transition
                + sat.e_obs_per_s * (row.end_s - row.start_s)
                + sat.e_proc_per_s * row.proc_time_s
            )
            prev = row
        if energy > sat.e_max + tol:
            problems.append(f"STP {stp} satellite {sat_id}: energy {energy:.6g} exceeds budget {sat.e_max:.6g}")

    return problems


def validate_schedule(schedule: Schedule) -> list[str]:
    """Re-check an in-memory schedule against window, timing, energy and uniqueness rules."""
    otws = {otw.key: otw for otw in schedule.observations()}
    rows = [ScheduleRow.from_otw(otw, schedule.stp_index) for otw in otws.values()]
    return _violations(
        rows,
        schedule.satellites,
        lambda _: (schedule.stp_start_s, schedule.stp_end_s),
        lambda row: (otws[row.key].vtw_start_s, otws[row.key].vtw_end_s),
    )


def validate_schedule_table(
    rows: list[ScheduleRow],
    scenario: Scenario,
    vtws: list[VisibleTimeWindow] | None = None,
) -> list[str]:
    """Re-check schedule table rows against a scenario, recomputing its visible windows."""
    if vtws is None:
        vtws = compute_vtws(scenario)
    windows: dict[tuple[int, int], list[VisibleTimeWindow]] = defaultdict(list)
    for vtw in vtws:
        windows[(vtw.satellite_id, vtw.target_id)].append(vtw)

    def window_of(row: ScheduleRow) -> tuple[float, float] | None:
        for vtw in windows.get((row.satellite_id, row.target_id), []):
            if vtw.start_s - _VALIDATION_TOL <= row.start_s and row.end_s <= vtw.end_s + _VALIDATION_TOL:
                return (vtw.start_s, vtw.end_s)
        return None

    targets = scenario.target_map()
    problems = [f"row for unknown target {r.target_id}" for r in rows if r.target_id not in targets]
    horizon = scenario.horizon
    bad_stp = [r for r in rows if not 0 <= r.stp_index < horizon.n_stp]
    problems += [f"row for target {r.target_id}: STP {r.stp_index} outside horizon" for r in bad_stp]
    known = [r for r in rows if r.target_id in targets and 0 <= r.stp_index < horizon.n_stp]
    problems += _violations(
        known,
        scenario.satellite_map(),
        horizon.stp_bounds,
        window_of,
        {tid: t.obs_duration_s for tid, t in targets.items()},
    )
    return problems
