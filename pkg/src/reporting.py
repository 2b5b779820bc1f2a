"""Run reports, comparison tables and their CSV / JSON exports.

Also owns the schedule table file format (written by ``run --schedule-out``,
read back by ``validate``) and the debug window exports.

Exported floats are rounded to ``REPORT_SIGNIFICANT_DIGITS`` significant
digits; CSV and JSON go through the same rounding so they carry identical
numbers. Wall time is kept on the in-memory report only.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Iterable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.config import REPORT_SCHEMA_VERSION, REPORT_SIGNIFICANT_DIGITS
from src.discretization import ObservationTimeWindow
from src.orbit_geometry import ContactWindow, VisibleTimeWindow
from src.scheduler import ScheduleRow

logger = logging.getLogger(__name__)

ExportFormat = Literal["csv", "json"]


# ---------------------------------------------------------------------------
# Custom exceptions
# ---------------------------------------------------------------------------


class ScheduleFileError(Exception):
    """Raised when a schedule table cannot be parsed."""

    def __init__(self, path: str | Path, line: int, detail: str) -> None:
        self.path = str(path)
        self.line = line
        self.detail = detail
        super().__init__(f"{path}:{line}: {detail}")


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


class TargetMetrics(BaseModel):
    """Per-target freshness row. AoI/PAoI are None for targets never updated."""

    model_config = ConfigDict(frozen=True)

    target_id: int
    n_captures: int
    n_delivered: int
    avg_aoi_s: float | None = None
    avg_paoi_s: float | None = None
    avg_aoi_periods: float | None = None
    avg_paoi_periods: float | None = None
    final_delta: int


class RunReport(BaseModel):
    """Outcome of one (scenario, algorithm) run over the whole STH."""

    model_config = ConfigDict(frozen=True)

    schema_version: int = REPORT_SCHEMA_VERSION
    algorithm: str
    seed: int
    n_targets: int
    n_satellites: int
    sth_s: float
    orbital_period_s: float
    total_profit: float = 0.0
    stp_profits: list[float] = Field(default_factory=list)
    missed_target_count: int = 0
    missed_target_pct: float = 0.0
    n_captures: int = 0
    n_delivered: int = 0
    gsd_values: list[float] = Field(default_factory=list)
    mean_gsd: float | None = None
    mean_aoi_s: float | None = None
    aoi_variance_s2: float | None = None
    p99_aoi_periods: float | None = None
    mean_paoi_s: float | None = None
    p99_paoi_periods: float | None = None
    targets: list[TargetMetrics] = Field(default_factory=list)
    wall_time_s: float = Field(default=0.0, exclude=True)


class ComparisonRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_targets: int
    seed: int
    algorithm: str
    total_profit: float
    missed_target_pct: float
    mean_gsd: float | None = None
    mean_aoi_s: float | None = None
    aoi_variance_s2: float | None = None
    p99_aoi_periods: float | None = None
    p99_paoi_periods: float | None = None


class ComparisonDelta(BaseModel):
    """One algorithm against FIFO on the same instance; ratios are algorithm / FIFO."""

    model_config = ConfigDict(frozen=True)

    n_targets: int
    seed: int
    algorithm: str
    profit_ratio: float | None = None
    missed_pct_delta: float
    mean_gsd_ratio: float | None = None
    aoi_variance_ratio: float | None = None


class Comparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    schema_version: int = REPORT_SCHEMA_VERSION
    rows: list[ComparisonRow] = Field(default_factory=list)
    deltas: list[ComparisonDelta] = Field(default_factory=list)
    reports: list[RunReport] = Field(default_factory=list)


# ---------------------------------------------------------------------------
# Aggregation helpers
# ---------------------------------------------------------------------------


def mean_or_none(values: Iterable[float]) -> float | None:
    values = list(values)
    return float(np.mean(values)) if values else None


def variance_or_none(values: Iterable[float]) -> float | None:
    values = list(values)
    return float(np.var(values)) if values else None


def percentile_or_none(values: Iterable[float], q: float) -> float | None:
    values = list(values)
    return float(np.percentile(values, q)) if values else None


def _ratio(num: float | None, den: float | None) -> float | None:
    if num is None or den is None or den == 0:
        return None
    return num / den


def comparison_row(report: RunReport) -> ComparisonRow:
    return ComparisonRow(
        n_targets=report.n_targets,
        seed=report.seed,
        algorithm=report.algorithm,
        total_profit=report.total_profit,
        missed_target_pct=report.missed_target_pct,
        mean_gsd=report.mean_gsd,
        mean_aoi_s=report.mean_aoi_s,
        aoi_variance_s2=report.aoi_variance_s2,
        p99_aoi_periods=report.p99_aoi_periods,
        p99_paoi_periods=report.p99_paoi_periods,
    )


def comparison_delta(report: RunReport, baseline: RunReport) -> ComparisonDelta:
    return ComparisonDelta(
        n_targets=report.n_targets,
        seed=report.seed,
        algorithm=report.algorithm,
        profit_ratio=_ratio(report.total_profit, baseline.total_profit),
        missed_pct_delta=report.missed_target_pct - baseline.missed_target_pct,
        mean_gsd_ratio=_ratio(report.mean_gsd, baseline.mean_gsd),
        aoi_variance_ratio=_ratio(report.aoi_variance_s2, baseline.aoi_variance_s2),
    )


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def sig(value: float | None, digits: int = REPORT_SIGNIFICANT_DIGITS) -> float | None:
    """Round to ``digits`` significant digits (None and non-finite values pass through)."""
    if value is None or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def _rounded(obj):
    if isinstance(obj, float):
        return sig(obj)
    if isinstance(obj, list):
        return [_rounded(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    return obj


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(sig(value))
    return str(value)


TARGET_COLUMNS = (
    "algorithm",
    "seed",
    "target_id",
    "n_captures",
    "n_delivered",
    "avg_aoi_s",
    "avg_paoi_s",
    "avg_aoi_periods",
    "avg_paoi_periods",
    "final_delta",
)

COMPARISON_COLUMNS = tuple(ComparisonRow.model_fields)


def _write_csv(path: Path, columns: Iterable[str], rows: Iterable[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        columns = list(columns)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(col)) for col in columns])


def export_report(report: RunReport, path: str | Path, fmt: ExportFormat = "csv") -> None:
    """Write a run report: per-target rows as CSV, or the whole report as JSON."""
    path = Path(path)
    if fmt == "json":
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(_rounded(report.model_dump(mode="json")), indent=2) + "\n")
    elif fmt == "csv":
        rows = (
            {"algorithm": report.algorithm, "seed": report.seed, **t.model_dump()}
            for t in report.targets
        )
        _write_csv(path, TARGET_COLUMNS, rows)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    logger.info(f"Report ({report.algorithm}, seed={report.seed}) written to {path}")


def export_comparison(comparison: Comparison, path: str | Path, fmt: ExportFormat = "csv") -> None:
    """Write a comparison: one CSV row per run, or rows plus deltas as JSON."""
    path = Path(path)
    if fmt == "json":
        payload = comparison.model_dump(mode="json", exclude={"reports"})
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(_rounded(payload), indent=2) + "\n")
    elif fmt == "csv":
        _write_csv(path, COMPARISON_COLUMNS, (row.model_dump() for row in comparison.rows))
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    logger.info(f"Comparison of {len(comparison.rows)} runs written to {path}")


def render_summary(comparison: Comparison) -> str:
    """Plain-text table of the comparison rows for the terminal."""
    header = f"{'targets':>7} {'seed':>6} {'algorithm':<13} {'profit':>10} {'missed%':>8} {'GSD':>8} {'AoI var':>12}"
    lines = [header, "-" * len(header)]
    for row in comparison.rows:
        gsd = f"{row.mean_gsd:.4f}" if row.mean_gsd is not None else "-"
        var = f"{row.aoi_variance_s2:.4g}" if row.aoi_variance_s2 is not None else "-"
        lines.append(
            f"{row.n_targets:>7} {row.seed:>6} {row.algorithm:<13} {row.total_profit:>10.4f} "
            f"{row.missed_target_pct:>8.2f} {gsd:>8} {var:>12}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Schedule table
# ---------------------------------------------------------------------------

SCHEDULE_COLUMNS = (
    "stp",
    "satellite",
    "target",
    "orbit",
    "window",
    "start",
    "end",
    "roll_deg",
    "pitch_deg",
    "yaw_deg",
    "gsd",
    "profit",
    "proc_time",
)


def write_schedule_table(rows: Iterable[ScheduleRow], path: str | Path) -> None:
    """Write schedule rows; times keep full precision so the table re-validates exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCHEDULE_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.stp_index,
                    r.satellite_id,
                    r.target_id,
                    r.orbit_index,
                    r.window_index,
                    repr(r.start_s),
                    repr(r.end_s),
                    repr(math.degrees(r.roll_rad)),
                    repr(math.degrees(r.pitch_rad)),
                    repr(math.degrees(r.yaw_rad)),
                    repr(r.gsd_m_per_px),
                    repr(r.profit),
                    repr(r.proc_time_s),
                ]
            )
            count += 1
    logger.info(f"Schedule table with {count} rows written to {path}")


def load_schedule_table(path: str | Path) -> list[ScheduleRow]:
    """Parse a schedule table; any malformed row raises ``ScheduleFileError``."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SCHEDULE_COLUMNS:
            raise ScheduleFileError(path, 1, f"expected header {','.join(SCHEDULE_COLUMNS)}")
        rows: list[ScheduleRow] = []
        for line_no, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(SCHEDULE_COLUMNS):
                raise ScheduleFileError(path, line_no, f"expected {len(SCHEDULE_COLUMNS)} fields, got {len(record)}")
            values = dict(zip(SCHEDULE_COLUMNS, (cell.strip() for cell in record)))
            try:
                rows.append(
                    ScheduleRow(
                        stp_index=int(values["stp"]),
                        satellite_id=int(values["satellite"]),
                        target_id=int(values["target"]),
                        orbit_index=int(values["orbit"]),
                        window_index=int(values["window"]),
                        start_s=float(values["start"]),
                        end_s=float(values["end"]),
                        roll_rad=math.radians(float(values["roll_deg"])),
                        pitch_rad=math.radians(float(values["pitch_deg"])),
                        yaw_rad=math.radians(float(values["yaw_deg"])),
                        gsd_m_per_px=float(values["gsd"]),
                        profit=float(values["profit"]),
                        proc_time_s=float(values["proc_time"]),
                    )
                )
            except ValueError as exc:
                raise ScheduleFileError(path, line_no, str(exc)) from exc
    return rows


# ---------------------------------------------------------------------------
# Debug exports
# ---------------------------------------------------------------------------


def export_windows(
    vtws: list[VisibleTimeWindow], contacts: list[ContactWindow], directory: str | Path
) -> tuple[Path, Path]:
    """Write ``vtws.csv`` and ``contacts.csv`` into ``directory``."""
    directory = Path(directory)
    vtw_path = directory / "vtws.csv"
    contact_path = directory / "contacts.csv"
    _write_csv(
        vtw_path,
        ("satellite", "target", "orbit", "start", "end"),
        (
            {"satellite": w.satellite_id, "target": w.target_id, "orbit": w.orbit_index, "start": w.start_s, "end": w.end_s}
            for w in vtws
        ),
    )
    _write_csv(
        contact_path,
        ("satellite", "station", "start", "end", "distance_m"),
        (
            {
                "satellite": c.satellite_id,
                "station": c.station_id,
                "start": c.start_s,
                "end": c.end_s,
                "distance_m": c.representative_distance_m,
            }
            for c in contacts
        ),
    )
    logger.info(f"Wrote {len(vtws)} VTWs and {len(contacts)} contact windows to {directory}")
    return vtw_path, contact_path


def export_otws(otws: list[ObservationTimeWindow], path: str | Path) -> None:
    columns = (
        "stp", "satellite", "target", "orbit", "window", "start", "end",
        "roll_deg", "pitch_deg", "off_nadir_deg", "gsd", "data_bits", "proc_time", "profit",
    )
    _write_csv(
        Path(path),
        columns,
        (
            {
                "stp": w.stp_index,
                "satellite": w.satellite_id,
                "target": w.target_id,
                "orbit": w.orbit_index,
                "window": w.window_index,
                "start": w.start_s,
                "end": w.end_s,
                "roll_deg": math.degrees(w.pointing.roll_rad),
                "pitch_deg": math.degrees(w.pointing.pitch_rad),
                "off_nadir_deg": math.degrees(w.pointing.off_nadir_rad),
                "gsd": w.pointing.gsd_m_per_px,
                "data_bits": w.data_bits,
                "proc_time": w.proc_time_s,
                "profit": w.profit,
            }
            for w in otws
        ),
    )
    logger.info(f"Wrote {len(otws)} OTWs to {path}")
