"""SQLite result store for scheduling runs.

Single-file database with three tables: one row per run, per-target
freshness metrics and per-STP profits. All methods are synchronous and use
parameterized queries.

Usage::

    with ResultStore("data/results.db") as store:
        run_id = store.insert_report(report)
        store.get_runs(algorithm="Heuristic")
"""

from __future__ import annotations

import os
import sqlite3
from datetime import datetime, timezone
from typing import Optional

from src.reporting import RunReport


class ResultStore:
    """Synchronous SQLite-backed store for run reports."""

    def __init__(self, db_path: str = "data/results.db") -> None:
        parent = os.path.dirname(db_path)
        if parent:
            os.makedirs(parent, exist_ok=True)

        self._conn = sqlite3.connect(db_path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute("PRAGMA foreign_keys=ON")
        self._create_tables()

    # ------------------------------------------------------------------
    # Context manager
    # ------------------------------------------------------------------

    def close(self) -> None:
        """Close the underlying database connection."""
        self._conn.close()

    def __enter__(self) -> "ResultStore":
        return self

    def __exit__(self, *args) -> None:  # noqa: ANN002
        self.close()

    # ------------------------------------------------------------------
    # Schema creation
    # ------------------------------------------------------------------

    def _create_tables(self) -> None:
        self._conn.executescript(
            """
            CREATE TABLE IF NOT EXISTS runs (
                id                  INTEGER PRIMARY KEY AUTOINCREMENT,
                recorded_at         TEXT NOT NULL,
                algorithm           TEXT NOT NULL,
                seed                INTEGER NOT NULL,
                n_targets           INTEGER NOT NULL,
                n_satellites        INTEGER NOT NULL,
                sth_s               REAL,
                total_profit        REAL,
                missed_target_count INTEGER,
                missed_target_pct   REAL,
                n_captures          INTEGER,
                n_delivered         INTEGER,
                mean_gsd            REAL,
                mean_aoi_s          REAL,
                aoi_variance_s2     REAL,
                p99_aoi_periods     REAL,
                mean_paoi_s         REAL,
                p99_paoi_periods    REAL,
                wall_time_s         REAL
            );

            CREATE TABLE IF NOT EXISTS target_metrics (
                run_id          INTEGER NOT NULL REFERENCES runs(id) ON DELETE CASCADE,
                target_id       INTEGER NOT NULL,
                n_captures      INTEGER,
                n_delivered     INTEGER,
                avg_aoi_s       REAL,
                avg_paoi_s      REAL,
                final_delta     INTEGER,
                PRIMARY KEY (run_id, target_id)
            );

            CREATE TABLE IF NOT EXISTS stp_profits (
                run_id          INTEGER NOT NULL REFERENCES runs(id) ON DELETE CASCADE,
                stp_index       INTEGER NOT NULL,
                profit          REAL,
                PRIMARY KEY (run_id, stp_index)
            );

            CREATE INDEX IF NOT EXISTS idx_runs_algorithm_seed
                ON runs(algorithm, seed);
            """
        )
        self._conn.commit()

    # ------------------------------------------------------------------
    # Runs
    # ------------------------------------------------------------------

    def insert_report(self, report: RunReport) -> int:
        """Store a report with its per-target and per-STP rows; returns the run id."""
        recorded_at = datetime.now(timezone.utc).isoformat()
        with self._conn:
            cur = self._conn.execute(
                """
                INSERT INTO runs
                    (recorded_at, algorithm, seed, n_targets, n_satellites, sth_s,
                     total_profit, missed_target_count, missed_target_pct,
                     n_captures, n_delivered, mean_gsd, mean_aoi_s, aoi_variance_s2,
                     p99_aoi_periods, mean_paoi_s, p99_paoi_periods, wall_time_s)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
                """,
                (
                    recorded_at,
                    report.algorithm,
                    report.seed,
                    report.n_targets,
                    report.n_satellites,
                    report.sth_s,
                    report.total_profit,
                    report.missed_target_count,
                    report.missed_target_pct,
                    report.n_captures,
                    report.n_delivered,
                    report.mean_gsd,
                    report.mean_aoi_s,
                    report.aoi_variance_s2,
                    report.p99_aoi_periods,
                    report.mean_paoi_s,
                    report.p99_paoi_periods,
                    report.wall_time_s,
                ),
            )
            run_id = cur.lastrowid
            self._conn.executemany(
                """
                INSERT INTO target_metrics
                    (run_id, target_id, n_captures, n_delivered, avg_aoi_s, avg_paoi_s, final_delta)
                VALUES (?, ?, ?, ?, ?, ?, ?)
                """,
                [
                    (run_id, t.target_id, t.n_captures, t.n_delivered, t.avg_aoi_s, t.avg_paoi_s, t.final_delta)
                    for t in report.targets
                ],
            )
            self._conn.executemany(
                "INSERT INTO stp_profits (run_id, stp_index, profit) VALUES (?, ?, ?)",
                [(run_id, k, p) for k, p in enumerate(report.stp_profits)],
            )
        return run_id

    def get_runs(self, algorithm: Optional[str] = None, seed: Optional[int] = None) -> list[dict]:
        """Return run rows (optionally filtered) ordered by id."""
        query = "SELECT * FROM runs"
        clauses, params = [], []
        if algorithm is not None:
            clauses.append("algorithm = ?")
            params.append(algorithm)
        if seed is not None:
            clauses.append("seed = ?")
            params.append(seed)
        if clauses:
            query += " WHERE " + " AND ".join(clauses)
        rows = self._conn.execute(query + " ORDER BY id ASC", params).fetchall()
        return [dict(r) for r in rows]

    def get_target_metrics(self, run_id: int) -> list[dict]:
        rows = self._conn.execute(
            "SELECT * FROM target_metrics WHERE run_id = ? ORDER BY target_id ASC", (run_id,)
        ).fetchall()
        return [dict(r) for r in rows]

    def get_stp_profits(self, run_id: int) -> list[float]:
        rows = self._conn.execute(
            "SELECT profit FROM stp_profits WHERE run_id = ? ORDER BY stp_index ASC", (run_id,)
        ).fetchall()
        return [r["profit"] for r in rows]
