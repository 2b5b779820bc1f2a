"""Stage 3: Acceptance — Heuristic vs FIFO on the Reference Constellation

Runs the reference set-up (4 planes x 2 satellites, 10 STPs over 10 orbital
periods, bundled ground stations) for several target counts and seeds and
checks the directional claims:

  - heuristic profit strictly above FIFO on every instance
  - heuristic missed-target share never above FIFO, strictly below at the
    largest count
  - mean capture GSD and per-target AoI variance not above FIFO

Expected: under 10 minutes at the default sizes.

Usage:
    python scripts/stage3_acceptance.py [--targets 200 300 400] [--seeds 1 2 3 4 5]
        [--out results/comparison.csv] [--plots results/plots] [--db data/results.db]
"""

import argparse
import logging
import sys
import time

import numpy as np

from src.datastore import ResultStore
from src.plotting import plot_comparison
from src.reporting import RunReport, export_comparison, render_summary
from src.scenario import reference_scenario
from src.simulation import compare

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s %(name)s %(levelname)s %(message)s",
)
logger = logging.getLogger("stage3")


def pooled(reports: list[RunReport], attr: str) -> float | None:
    values = [getattr(r, attr) for r in reports if getattr(r, attr) is not None]
    return float(np.mean(values)) if values else None


def check(label: str, ok: bool, failures: list[str]) -> None:
    print(f"    [{'ok' if ok else 'FAIL'}] {label}")
    if not ok:
        failures.append(label)


def check_lower(label: str, ours: float | None, fifo: float | None, failures: list[str]) -> None:
    if ours is None or fifo is None:
        check(f"{label} missing (heuristic={ours}, fifo={fifo})", False, failures)
        return
    gain = f" ({100 * (1 - ours / fifo):.1f}% lower)" if fifo else ""
    check(f"{label} {ours:.4g} <= {fifo:.4g}{gain}", ours <= fifo, failures)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--targets", type=int, nargs="+", default=[200, 300, 400])
    parser.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    parser.add_argument("--out", default=None, help="Comparison CSV path")
    parser.add_argument("--plots", default=None, help="Directory for PNG figures")
    parser.add_argument("--db", default=None, help="SQLite result store")
    args = parser.parse_args()

    print("=" * 60)
    print("STAGE 3: Acceptance — Heuristic vs FIFO")
    print("=" * 60)
    print()

    t0 = time.monotonic()
    base = reference_scenario(args.targets[0], args.seeds[0])
    comparison = compare(base, args.seeds, args.targets)
    elapsed = time.monotonic() - t0

    print()
    print(render_summary(comparison))
    print()

    by_key = {(r.n_targets, r.seed, r.algorithm): r for r in comparison.reports}
    failures: list[str] = []
    largest = max(args.targets)

    print("  Directional checks:")
    for count in args.targets:
        for seed in args.seeds:
            fifo = by_key[(count, seed, "FIFO")]
            ours = by_key[(count, seed, "Heuristic")]
            check(f"profit  targets={count} seed={seed}: {ours.total_profit:.3f} > {fifo.total_profit:.3f}",
                  ours.total_profit > fifo.total_profit, failures)
            check(f"missed  targets={count} seed={seed}: {ours.missed_target_pct:.2f}% <= {fifo.missed_target_pct:.2f}%",
                  ours.missed_target_pct <= fifo.missed_target_pct, failures)

    fifo_large = [by_key[(largest, s, "FIFO")] for s in args.seeds]
    ours_large = [by_key[(largest, s, "Heuristic")] for s in args.seeds]
    check(f"missed strictly lower at {largest} targets",
          pooled(ours_large, "missed_target_pct") < pooled(fifo_large, "missed_target_pct"), failures)

    fifo_all = [r for r in comparison.reports if r.algorithm == "FIFO"]
    ours_all = [r for r in comparison.reports if r.algorithm == "Heuristic"]
    gsd_fifo, gsd_ours = pooled(fifo_all, "mean_gsd"), pooled(ours_all, "mean_gsd")
    var_fifo, var_ours = pooled(fifo_all, "aoi_variance_s2"), pooled(ours_all, "aoi_variance_s2")
    check_lower("mean GSD", gsd_ours, gsd_fifo, failures)
    check_lower("AoI variance", var_ours, var_fifo, failures)
    print()

    if args.out:
        export_comparison(comparison, args.out)
    if args.plots:
        plot_comparison(comparison, args.plots)
    if args.db:
        with ResultStore(args.db) as store:
            for report in comparison.reports:
                store.insert_report(report)
        print(f"  Database saved to: {args.db}")

    print(f"  Runtime: {elapsed:.1f}s ({elapsed / 60:.1f} min)")
    print()
    if failures:
        print(f"STAGE 3 FAILED — {len(failures)} checks failed")
        return 1
    print("STAGE 3 PASSED")
    return 0


if __name__ == "__main__":
    sys.exit(main())
