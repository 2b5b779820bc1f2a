"""Stage 1: Smoke Test — Formulas, Oracles and Small Runs

Runs the fast test suite: resource formulas at every branch and seam, the
AoI/PAoI oracles, the brute-force optimality sandwich and the small
end-to-end runs. Slow acceptance-scale tests are skipped.

Usage:
    python scripts/stage1_smoke.py
"""

import subprocess
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    print("=" * 60)
    print("STAGE 1: Smoke Test — Formulas, Oracles and Small Runs")
    print("=" * 60)
    print()
    print('Running: pytest -m "not slow"')
    print()

    result = subprocess.run(
        [sys.executable, "-m", "pytest", "-m", "not slow", "-q", "--tb=short"],
        cwd=REPO_ROOT,
    )

    print()
    if result.returncode == 0:
        print("STAGE 1 PASSED")
        print("  - Transition, energy, data volume and link formulas hold")
        print("  - AoI/PAoI match the sawtooth and peak oracles")
        print("  - Greedy <= greedy+LS <= exhaustive optimum on tiny instances")
        print("  - Small scenarios run end to end and re-validate")
    else:
        print("STAGE 1 FAILED — fix issues before proceeding")

    return result.returncode


if __name__ == "__main__":
    sys.exit(main())
