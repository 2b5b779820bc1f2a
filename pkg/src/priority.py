"""
Priority Indicators

Per-STP indicators used to order the constructive heuristic:
- assignment flexibility FL (OTW count per target)
- pairwise conflict graph between OTWs
- opportunity cost OC (summed profit of conflicting OTWs)
- the resulting priority order (delta desc, FL asc, then OC asc per target)
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Collection, Iterable, Mapping

from src.discretization import ObservationTimeWindow, OtwKey
from src.models import SatelliteSpec
from src.resource_models import maneuver_time, max_maneuver_time

logger = logging.getLogger(__name__)


@dataclass
class ConflictGraph:
    stp_index: int
    adjacency: dict[OtwKey, set[OtwKey]] = field(default_factory=dict)

    def neighbors(self, key: OtwKey) -> set[OtwKey]:
        return self.adjacency.get(key, set())

    def add_edge(self, a: OtwKey, b: OtwKey) -> None:
        if a == b:
            return
        self.adjacency.setdefault(a, set()).add(b)
        self.adjacency.setdefault(b, set()).add(a)

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.adjacency.values()) // 2


@dataclass(frozen=True)
class PriorityOrder:
    """Targets grouped by delta (descending), each group sorted by FL then id."""

    groups: list[tuple[int, list[int]]]
    otws_by_target: dict[int, list[ObservationTimeWindow]]

    @property
    def targets(self) -> list[int]:
        return [tid for _, members in self.groups for tid in members]


# ---------------------------------------------------------------------------
# Flexibility and conflicts
# ---------------------------------------------------------------------------


def flexibility(otws: Iterable[ObservationTimeWindow]) -> dict[int, int]:
    """FL_t: number of OTWs of each target in the STP, over all satellites and orbits."""
    counts: dict[int, int] = defaultdict(int)
    for otw in otws:
        counts[otw.target_id] += 1
    return dict(counts)


def _ordered_fits(first: ObservationTimeWindow, second: ObservationTimeWindow) -> bool:
    """Whether ``second`` can follow ``first`` on the same satellite."""
    gap_needed = max(maneuver_time(first.pointing.angles, second.pointing.angles), first.proc_time_s)
    return first.end_s + gap_needed <= second.start_s


def conflicts(a: ObservationTimeWindow, b: ObservationTimeWindow) -> bool:
    """Pairwise conflict ignoring energy: same target, or no feasible order on one satellite."""
    if a.key == b.key:
        return False
    if a.target_id == b.target_id:
        return True
    if a.satellite_id != b.satellite_id:
        return False
    return not (_ordered_fits(a, b) or _ordered_fits(b, a))


def build_conflict_graph(
    otws: list[ObservationTimeWindow],
    stp_index: int,
    satellites: Mapping[int, SatelliteSpec],
) -> ConflictGraph:
    """Conflict graph over one STP's OTWs.

    Same-satellite pairs are only tested while the later start lies within
    the longest possible maneuver (or processing time) after the earlier end.
    """
    graph = ConflictGraph(stp_index=stp_index)
    for otw in otws:
        graph.adjacency.setdefault(otw.key, set())

    by_target: dict[int, list[ObservationTimeWindow]] = defaultdict(list)
    by_satellite: dict[int, list[ObservationTimeWindow]] = defaultdict(list)
    for otw in otws:
        by_target[otw.target_id].append(otw)
        by_satellite[otw.satellite_id].append(otw)

    for group in by_target.values():
        for a, b in combinations(group, 2):
            graph.add_edge(a.key, b.key)

    for sat_id, group in by_satellite.items():
        group.sort(key=lambda w: (w.start_s, w.key))
        reach = max_maneuver_time(satellites[sat_id])
        for i, a in enumerate(group):
            horizon_s = a.end_s + max(reach, a.proc_time_s)
            for b in group[i + 1:]:
                if b.start_s >= horizon_s:
                    break
                if b.target_id != a.target_id and conflicts(a, b):
                    graph.add_edge(a.key, b.key)

    logger.debug(f"STP {stp_index}: conflict graph with {len(otws)} OTWs, {graph.n_edges} edges")
    return graph


# ---------------------------------------------------------------------------
# Opportunity cost and ordering
# ---------------------------------------------------------------------------


def opportunity_cost(
    key: OtwKey,
    graph: ConflictGraph,
    profits: Mapping[OtwKey, float],
    restrict_to: Collection[OtwKey] | None = None,
) -> float:
    """Summed profit of the OTWs conflicting with ``key``.

    With ``restrict_to`` only conflicting OTWs in that set (typically the keys
    of the current schedule) are counted.
    """
    neighbors = graph.neighbors(key)
    if restrict_to is not None:
        neighbors = neighbors.intersection(restrict_to)
    return float(sum(profits.get(k, 0.0) for k in neighbors))


def build_priority_order(
    target_ids: Iterable[int],
    otws: list[ObservationTimeWindow],
    deltas: Mapping[int, int],
    graph: ConflictGraph,
    restrict_to: Collection[OtwKey] | None = None,
) -> PriorityOrder:
    """Order targets by (delta desc, FL asc, id asc) and their OTWs by (OC, start, satellite).

    Targets without OTWs in ``otws`` are left out.
    """
    profits = {otw.key: otw.profit for otw in otws}
    fl = flexibility(otws)
    wanted = set(target_ids)
    restricted = set(restrict_to) if restrict_to is not None else None

    by_target: dict[int, list[ObservationTimeWindow]] = defaultdict(list)
    for otw in otws:
        if otw.target_id in wanted:
            by_target[otw.target_id].append(otw)

    otws_by_target: dict[int, list[ObservationTimeWindow]] = {}
    for tid, group in by_target.items():
        costs = {w.key: opportunity_cost(w.key, graph, profits, restricted) for w in group}
        otws_by_target[tid] = sorted(group, key=lambda w: (costs[w.key], w.start_s, w.satellite_id, w.key))

    grouped: dict[int, list[int]] = defaultdict(list)
    for tid in otws_by_target:
        grouped[deltas.get(tid, 1)].append(tid)
    groups = [
        (delta, sorted(members, key=lambda t: (fl[t], t)))
        for delta, members in sorted(grouped.items(), key=lambda kv: -kv[0])
    ]
    return PriorityOrder(groups=groups, otws_by_target=otws_by_target)
