"""Timing Metrics

Per-target capture/arrival history and the freshness metrics derived from it:
average Age of Information (AoI), average peak AoI (PAoI) and the staleness
counter delta (STPs since the target was last scheduled).

AoI at the ground starts at 0 at time 0, grows with slope 1 and drops at
each arrival that carries a fresher capture than anything received so far.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

_TIME_TOL = 1e-9


# ---------------------------------------------------------------------------
# Custom exceptions
# ---------------------------------------------------------------------------


class TimelineError(Exception):
    """Raised for inconsistent capture/arrival bookkeeping."""


class UndefinedMetricError(Exception):
    """Raised when a freshness metric is requested for a target never updated."""

    def __init__(self, target_id: int) -> None:
        self.target_id = target_id
        super().__init__(f"Target {target_id} has no completed update")


# ---------------------------------------------------------------------------
# Timeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameEvent:
    capture_s: float
    arrival_s: float | None = None

    @property
    def network_time_s(self) -> float | None:
        return None if self.arrival_s is None else self.arrival_s - self.capture_s


@dataclass
class TargetTimeline:
    target_id: int
    events: list[FrameEvent] = field(default_factory=list)
    delta: int = 1
    last_scheduled_stp: int | None = None

    @property
    def n_captures(self) -> int:
        return len(self.events)

    def completed(self, sth_s: float | None = None) -> list[FrameEvent]:
        """Events whose frame reached the ground (by ``sth_s`` if given), in capture order."""
        return [
            e for e in self.events
            if e.arrival_s is not None and (sth_s is None or e.arrival_s <= sth_s + _TIME_TOL)
        ]


def record_capture(timeline: TargetTimeline, capture_s: float, sth_s: float | None = None) -> None:
    if capture_s < 0 or (sth_s is not None and capture_s > sth_s + _TIME_TOL):
        raise TimelineError(f"Target {timeline.target_id}: capture at {capture_s} outside horizon")
    keys = [e.capture_s for e in timeline.events]
    timeline.events.insert(bisect.bisect_right(keys, capture_s), FrameEvent(capture_s))


def record_arrival(timeline: TargetTimeline, capture_s: float, arrival_s: float) -> None:
    """Complete the pending event captured at ``capture_s``."""
    if arrival_s < capture_s:
        raise TimelineError(
            f"Target {timeline.target_id}: arrival {arrival_s} precedes capture {capture_s}"
        )
    for i, event in enumerate(timeline.events):
        if event.arrival_s is None and math.isclose(event.capture_s, capture_s, abs_tol=_TIME_TOL):
            timeline.events[i] = replace(event, arrival_s=arrival_s)
            return
    raise TimelineError(f"Target {timeline.target_id}: no pending capture at {capture_s}")


# ---------------------------------------------------------------------------
# AoI / PAoI
# ---------------------------------------------------------------------------


def effective_updates(timeline: TargetTimeline, sth_s: float) -> list[FrameEvent]:
    """Arrivals (up to the STH) that improve freshness, in arrival order.

    A frame older than the newest one already received does not reset AoI.
    """
    delivered = sorted(timeline.completed(sth_s), key=lambda e: (e.arrival_s, e.capture_s))
    updates: list[FrameEvent] = []
    freshest = -math.inf
    for event in delivered:
        if event.capture_s > freshest:
            updates.append(event)
            freshest = event.capture_s
    return updates


def instantaneous_aoi(timeline: TargetTimeline, time_s: float, sth_s: float) -> float:
    """AoI at ``time_s``; arrivals at exactly ``time_s`` already count."""
    reference = 0.0
    for event in effective_updates(timeline, sth_s):
        if event.arrival_s <= time_s:
            reference = event.capture_s
        else:
            break
    return time_s - reference


def average_aoi(timeline: TargetTimeline, sth_s: float) -> float:
    """Time-average AoI over [0, STH] as a sum of sawtooth areas.

    Q_ini covers 0 up to the first arrival, each Q_i = Y_i*N_i + Y_i^2/2 and
    Q_last runs from the last capture's line to the STH.
    """
    updates = effective_updates(timeline, sth_s)
    if not updates:
        raise UndefinedMetricError(timeline.target_id)

    first = updates[0]
    q_ini = 0.5 * (first.arrival_s**2 - first.network_time_s**2)
    q_mid = 0.0
    for prev, cur in zip(updates, updates[1:]):
        y = cur.capture_s - prev.capture_s
        n = cur.network_time_s
        q_mid += y * n + 0.5 * y * y
    q_last = 0.5 * (sth_s - updates[-1].capture_s) ** 2
    return (q_ini + q_mid + q_last) / sth_s


def average_paoi(timeline: TargetTimeline, sth_s: float | None = None) -> float:
    """Mean of the AoI peaks just before each arrival (events in capture order)."""
    events = timeline.completed(sth_s)
    if not events:
        raise UndefinedMetricError(timeline.target_id)
    total = events[0].arrival_s
    for prev, cur in zip(events, events[1:]):
        total += cur.arrival_s - prev.capture_s
    return total / len(events)


# ---------------------------------------------------------------------------
# Staleness counter
# ---------------------------------------------------------------------------


def new_timelines(target_ids: Iterable[int]) -> dict[int, TargetTimeline]:
    """Fresh timelines; every target starts with delta = 1 at the first STP."""
    return {tid: TargetTimeline(target_id=tid) for tid in target_ids}


def advance_stp(
    timelines: Mapping[int, TargetTimeline],
    scheduled_target_ids: Iterable[int],
    stp_index: int | None = None,
) -> None:
    """Roll delta over to the next STP: reset scheduled targets, then age everyone by one."""
    for tid in scheduled_target_ids:
        timelines[tid].delta = 0
        if stp_index is not None:
            timelines[tid].last_scheduled_stp = stp_index
    for timeline in timelines.values():
        timeline.delta += 1


def delta_max(timelines: Mapping[int, TargetTimeline]) -> int:
    """Largest delta, never below 1."""
    return max([1, *(t.delta for t in timelines.values())])
