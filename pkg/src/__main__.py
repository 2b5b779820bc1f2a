"""Entry point: python -m src {generate,run,compare,validate}."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from src import config
from src.datastore import ResultStore
from src.models import Scenario
from src.plotting import plot_comparison
from src.reporting import (
    ScheduleFileError,
    export_comparison,
    export_otws,
    export_report,
    export_windows,
    load_schedule_table,
    render_summary,
    write_schedule_table,
)
from src.scenario import ScenarioError, load_scenario, load_stations, reference_scenario, save_scenario
from src.scheduler import schedule_rows, validate_schedule_table
from src.simulation import Algorithm, PlanningContext, compare, simulate

logger = logging.getLogger("src")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4
EXIT_SCHEDULE_FILE = 5


class CliError(Exception):
    def __init__(self, category: str, detail: str, exit_code: int) -> None:
        self.category = category
        self.detail = detail
        self.exit_code = exit_code
        super().__init__(f"{category}: {detail}")


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _scenario_with_stations(scenario: Scenario, stations_path: str | None) -> Scenario:
    if stations_path is None:
        return scenario
    return scenario.model_copy(update={"stations": load_stations(stations_path)})


def _load(args: argparse.Namespace) -> Scenario:
    return _scenario_with_stations(load_scenario(args.scenario), args.stations)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args: argparse.Namespace) -> int:
    stations = load_stations(args.stations) if args.stations else None
    scenario = reference_scenario(args.targets, args.seed, stations=stations)
    save_scenario(scenario, args.out)
    print(
        f"scenario: {len(scenario.satellites)} satellites, {len(scenario.targets)} targets, "
        f"{len(scenario.stations)} stations, seed {scenario.rng_seed} -> {args.out}"
    )
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    scenario = _load(args)
    context = PlanningContext(scenario)
    report, trace = simulate(scenario, Algorithm(args.algorithm), context)

    print(
        f"{report.algorithm}: profit={report.total_profit:.4f} "
        f"missed={report.missed_target_count}/{report.n_targets} ({report.missed_target_pct:.2f}%) "
        f"captures={report.n_captures} delivered={report.n_delivered}"
    )
    if report.mean_aoi_s is not None:
        print(
            f"mean AoI={report.mean_aoi_s:.1f}s  mean PAoI={report.mean_paoi_s:.1f}s  "
            f"p99 AoI={report.p99_aoi_periods:.3f} periods  mean GSD={report.mean_gsd:.4f} m/px"
        )

    if args.out:
        export_report(report, args.out, args.format)
    if args.schedule_out:
        write_schedule_table(schedule_rows(trace.schedules), args.schedule_out)
    if args.debug_dir:
        export_windows(context.vtws, context.contacts, args.debug_dir)
        export_otws(context.otws, Path(args.debug_dir) / "otws.csv")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    if args.scenario:
        scenario = _load(args)
        counts = None
    else:
        stations = load_stations(args.stations) if args.stations else None
        scenario = reference_scenario(args.targets[0], args.seed[0], stations=stations)
        counts = args.targets

    comparison = compare(scenario, args.seed, counts)
    print(render_summary(comparison))
    for delta in comparison.deltas:
        ratio = f"{delta.profit_ratio:.3f}" if delta.profit_ratio is not None else "-"
        var = f"{delta.aoi_variance_ratio:.3f}" if delta.aoi_variance_ratio is not None else "-"
        print(
            f"  {delta.algorithm} vs FIFO (targets={delta.n_targets}, seed={delta.seed}): "
            f"profit x{ratio}, missed {delta.missed_pct_delta:+.2f} pp, AoI variance x{var}"
        )

    if args.out:
        export_comparison(comparison, args.out, args.format)
    if args.plots:
        plot_comparison(comparison, args.plots)
    if args.db:
        with ResultStore(args.db) as store:
            for report in comparison.reports:
                store.insert_report(report)
        logger.info(f"Stored {len(comparison.reports)} runs in {args.db}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    scenario = _load(args)
    rows = load_schedule_table(args.schedule)
    violations = validate_schedule_table(rows, scenario)
    if violations:
        for line in violations:
            print(line)
        raise CliError("infeasible", f"{len(violations)} violations in {args.schedule}", EXIT_INFEASIBLE)
    print(f"schedule valid: {len(rows)} observations")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default=None, help=f"Logging level (default {config.LOG_LEVEL})")
    common.add_argument("--stations", default=None, help="Ground station JSON file (default: bundled list)")

    parser = argparse.ArgumentParser(
        prog="aeos-sched",
        description="AEOS constellation scheduling for continuous monitoring",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="Synthesise a scenario file")
    p.add_argument("--targets", type=int, required=True, help="Number of targets")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="Scenario JSON path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", parents=[common], help="Run one algorithm over the STH")
    p.add_argument("--scenario", required=True)
    p.add_argument("--algorithm", choices=[a.value for a in Algorithm], default=Algorithm.HeuristicLs.value)
    p.add_argument("--out", default=None, help="Report path")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--schedule-out", default=None, help="Schedule table CSV path")
    p.add_argument("--debug-dir", default=None, help="Directory for VTW / contact / OTW tables")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", parents=[common], help="Compare all algorithms over seeds and sizes")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--scenario")
    source.add_argument("--targets", type=int, nargs="+", help="One or more target counts")
    p.add_argument("--seed", type=int, nargs="+", required=True)
    p.add_argument("--out", default=None, help="Comparison table path")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--plots", default=None, help="Directory for PNG figures")
    p.add_argument("--db", default=None, help=f"SQLite result store (e.g. {config.RESULTS_DB})")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", parents=[common], help="Check a schedule table against a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--schedule", required=True)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or config.LOG_LEVEL).upper(),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )

    try:
        return args.func(args)
    except CliError as exc:
        category, detail, code = exc.category, exc.detail, exc.exit_code
    except ScheduleFileError as exc:
        category, detail, code = "schedule_file", str(exc), EXIT_SCHEDULE_FILE
    except ScenarioError as exc:
        category, detail, code = "scenario", str(exc), EXIT_CONFIG
    except (ValidationError, ValueError) as exc:
        category, detail, code = "config", str(exc).splitlines()[0], EXIT_CONFIG
    except OSError as exc:
        category, detail, code = "io", str(exc), EXIT_IO

    print(f"error category={category} detail={detail}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
