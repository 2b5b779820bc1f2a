"""Resource models: attitude transitions, energy accounting, link delay."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from src.config import SPEED_OF_LIGHT_M_S
from src.models import SatelliteSpec

Attitude = tuple[float, float, float]  # (roll, pitch, yaw) radians

_BUDGET_TOLERANCE = 1e-9


# ---------------------------------------------------------------------------
# Custom exceptions
# ---------------------------------------------------------------------------


class OverBudgetError(Exception):
    """Raised when a charge would push a satellite past its per-STP energy budget."""

    def __init__(self, satellite_id: int, stp_index: int, deficit: float) -> None:
        self.satellite_id = satellite_id
        self.stp_index = stp_index
        self.deficit = deficit
        super().__init__(
            f"Satellite {satellite_id} over budget in STP {stp_index} by {deficit:.6g} units"
        )


# ---------------------------------------------------------------------------
# Attitude transition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransitionQuery:
    from_angles: Attitude
    to_angles: Attitude


def transition_angle(query: TransitionQuery) -> float:
    """Total transition angle in degrees: |d roll| + |d pitch| + |d yaw|."""
    total = sum(abs(b - a) for a, b in zip(query.from_angles, query.to_angles))
    return math.degrees(total)


def transition_time(alpha_deg: float) -> float:
    """Piecewise-linear attitude transition time (s) for a total angle in degrees.

    Branch bounds are inclusive on the upper side; the 10 degree seam keeps its
    small jump (11.66 -> 11.666...).
    """
    if alpha_deg <= 10.0:
        return 11.66
    if alpha_deg <= 30.0:
        return 5.0 + alpha_deg / 1.5
    if alpha_deg <= 60.0:
        return 10.0 + alpha_deg / 2.0
    if alpha_deg <= 90.0:
        return 16.0 + alpha_deg / 2.5
    return 22.0 + alpha_deg / 3.0


def maneuver_time(from_angles: Attitude, to_angles: Attitude) -> float:
    return transition_time(transition_angle(TransitionQuery(from_angles, to_angles)))


def max_maneuver_time(satellite: SatelliteSpec) -> float:
    """Upper bound on any transition between attitudes inside the satellite's envelope."""
    span = 2.0 * (satellite.max_roll_rad + satellite.max_pitch_rad + satellite.max_yaw_rad)
    return transition_time(math.degrees(span))


# ---------------------------------------------------------------------------
# Energy
# ---------------------------------------------------------------------------


class EnergyKind(str, Enum):
    Obs = "Obs"
    Proc = "Proc"
    Tran = "Tran"


@dataclass(frozen=True)
class EnergyLedger:
    """Energy spent by one satellite in one STP; value semantics."""

    satellite_id: int
    stp_index: int
    budget: float
    spent_obs: float = 0.0
    spent_proc: float = 0.0
    spent_tran: float = 0.0

    @property
    def total(self) -> float:
        return self.spent_obs + self.spent_proc + self.spent_tran

    @property
    def remaining(self) -> float:
        return self.budget - self.total


def _rate(kind: EnergyKind, satellite: SatelliteSpec) -> float:
    if kind is EnergyKind.Obs:
        return satellite.e_obs_per_s
    if kind is EnergyKind.Proc:
        return satellite.e_proc_per_s
    return satellite.e_tran_per_s


def charge_energy(
    ledger: EnergyLedger, kind: EnergyKind, duration_s: float, satellite: SatelliteSpec
) -> EnergyLedger:
    """Return a new ledger with ``rate(kind) * duration_s`` added.

    Raises ``OverBudgetError`` (and leaves ``ledger`` untouched) if the total
    would exceed the budget; landing exactly on the budget is accepted.
    """
    if duration_s < 0:
        raise ValueError(f"duration_s must be >= 0, got {duration_s}")
    amount = _rate(kind, satellite) * duration_s
    new_total = ledger.total + amount
    if new_total > ledger.budget + _BUDGET_TOLERANCE:
        raise OverBudgetError(ledger.satellite_id, ledger.stp_index, new_total - ledger.budget)
    if kind is EnergyKind.Obs:
        return replace(ledger, spent_obs=ledger.spent_obs + amount)
    if kind is EnergyKind.Proc:
        return replace(ledger, spent_proc=ledger.spent_proc + amount)
    return replace(ledger, spent_tran=ledger.spent_tran + amount)


# ---------------------------------------------------------------------------
# Communication
# ---------------------------------------------------------------------------


def comm_time(d_bits: float, rate_bps: float, distance_m: float) -> float:
    """Transmission plus propagation delay over one link."""
    if rate_bps <= 0:
        raise ValueError(f"rate_bps must be > 0, got {rate_bps}")
    return d_bits / rate_bps + distance_m / SPEED_OF_LIGHT_M_S
