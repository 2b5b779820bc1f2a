"""Stage 2: Feasibility Sweep — Desk-Scale Scenarios

Generates randomized two-satellite scenarios over three STPs and runs FIFO,
the constructive heuristic and heuristic + local search on each. Every
schedule is re-checked by the independent validator and local search is
checked never to lose profit.

Expected: zero violations, a few minutes of runtime.

Usage:
    python scripts/stage2_feasibility.py [--scenarios N] [--seed S]
"""

import argparse
import logging
import sys
import time

import numpy as np

from src.models import Horizon
from src.orbit_geometry import orbital_period_s
from src.scenario import generate_instance, load_stations, reference_constellation
from src.scheduler import construct, local_search, schedule_rows, validate_schedule_table
from src.simulation import Algorithm, PlanningContext, simulate

logging.basicConfig(
    level=logging.WARNING,
    format="%(asctime)s %(name)s %(levelname)s %(message)s",
)
logger = logging.getLogger("stage2")


def desk_scenario(rng: np.random.Generator, seed: int):
    constellation = reference_constellation(n_planes=2, sats_per_plane=1)
    horizon = Horizon(sth_duration_s=3 * orbital_period_s(constellation.altitude_m), n_stp=3, otw_step_s=10.0)
    n_targets = int(rng.integers(50, 151))
    return generate_instance(constellation, n_targets, horizon, seed, stations=load_stations())


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--scenarios", type=int, default=50, help="Number of randomized scenarios")
    parser.add_argument("--seed", type=int, default=0, help="Seed of the scenario sizes")
    args = parser.parse_args()

    print("=" * 60)
    print("STAGE 2: Feasibility Sweep — Desk-Scale Scenarios")
    print("=" * 60)
    print()

    rng = np.random.default_rng(args.seed)
    t0 = time.monotonic()
    violations = 0
    ls_losses = 0
    schedules = 0

    for i in range(args.scenarios):
        scenario = desk_scenario(rng, args.seed * 1000 + i)
        context = PlanningContext(scenario)
        for algorithm in Algorithm:
            _, trace = simulate(scenario, algorithm, context)
            problems = validate_schedule_table(schedule_rows(trace.schedules), scenario, context.vtws)
            schedules += len(trace.schedules)
            if problems:
                violations += len(problems)
                logger.error(f"scenario {i} [{algorithm.label}]: {problems[0]}")

        for k in range(scenario.horizon.n_stp):
            inputs = context.stp_inputs(k, {t.id: 1 for t in scenario.targets})
            greedy = construct(inputs)
            if local_search(greedy, inputs).total_profit < greedy.total_profit:
                ls_losses += 1

        print(f"  scenario {i + 1:3d}/{args.scenarios}: {len(scenario.targets):3d} targets, "
              f"{len(context.otws):5d} OTWs")

    elapsed = time.monotonic() - t0

    print()
    print("=" * 60)
    print("STAGE 2 RESULTS")
    print("=" * 60)
    print(f"    Schedules checked:    {schedules}")
    print(f"    Violations:           {violations}")
    print(f"    LS profit losses:     {ls_losses}")
    print(f"    Runtime:              {elapsed:.1f}s")
    print()

    if violations or ls_losses:
        print("STAGE 2 FAILED")
        return 1
    print("STAGE 2 PASSED")
    return 0


if __name__ == "__main__":
    sys.exit(main())
