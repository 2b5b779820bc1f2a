"""Comparison figures: profit / missed-target bars and GSD / AoI / PAoI boxplots."""

from __future__ import annotations

import logging
from collections import defaultdict
from pathlib import Path

import matplotlib as mpl

mpl.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src.reporting import Comparison, RunReport  # noqa: E402

logger = logging.getLogger(__name__)

ALGORITHM_ORDER = ("FIFO", "Heuristic", "Heuristic+LS")
ALGORITHM_COLORS = {"FIFO": "#8c8c8c", "Heuristic": "#1f77b4", "Heuristic+LS": "#d62728"}

STYLE = {
    "axes.labelsize": 10,
    "font.size": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
}


def _algorithms(reports: list[RunReport]) -> list[str]:
    present = {r.algorithm for r in reports}
    return [a for a in ALGORITHM_ORDER if a in present]


def plot_profit_and_missed(comparison: Comparison, path: str | Path) -> Path:
    """Mean total profit and missed-target % per target count, one bar per algorithm."""
    path = Path(path)
    by_key: dict[tuple[int, str], list] = defaultdict(list)
    for row in comparison.rows:
        by_key[(row.n_targets, row.algorithm)].append(row)
    counts = sorted({row.n_targets for row in comparison.rows})
    algorithms = _algorithms(comparison.reports) or sorted({r.algorithm for r in comparison.rows})

    with mpl.rc_context(STYLE):
        fig, (ax_profit, ax_missed) = plt.subplots(1, 2, figsize=(10, 4))
        x = np.arange(len(counts))
        width = 0.8 / max(len(algorithms), 1)
        for i, alg in enumerate(algorithms):
            profit = [np.mean([r.total_profit for r in by_key[(c, alg)]] or [0.0]) for c in counts]
            missed = [np.mean([r.missed_target_pct for r in by_key[(c, alg)]] or [0.0]) for c in counts]
            offset = x + (i - (len(algorithms) - 1) / 2) * width
            color = ALGORITHM_COLORS.get(alg)
            ax_profit.bar(offset, profit, width, label=alg, color=color)
            ax_missed.bar(offset, missed, width, label=alg, color=color)
        for ax, ylabel in ((ax_profit, "total profit"), (ax_missed, "missed targets [%]")):
            ax.set_xticks(x)
            ax.set_xticklabels([str(c) for c in counts])
            ax.set_xlabel("targets")
            ax.set_ylabel(ylabel)
        if algorithms:
            ax_profit.legend()
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path


def _boxplot(groups: dict[str, list[float]], ylabel: str, path: Path) -> Path:
    labels = [a for a in ALGORITHM_ORDER if a in groups] + sorted(set(groups) - set(ALGORITHM_ORDER))
    with mpl.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 4))
        data = [groups[a] if groups[a] else [np.nan] for a in labels]
        if data:
            ax.boxplot(data, showfliers=False)
        ax.set_xticks(range(1, len(labels) + 1))
        ax.set_xticklabels(labels)
        ax.set_ylabel(ylabel)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_distributions(comparison: Comparison, directory: str | Path) -> list[Path]:
    """Boxplots of captured-frame GSD, per-target average AoI and PAoI (in orbital periods)."""
    directory = Path(directory)
    gsd: dict[str, list[float]] = defaultdict(list)
    aoi: dict[str, list[float]] = defaultdict(list)
    paoi: dict[str, list[float]] = defaultdict(list)
    for report in comparison.reports:
        gsd[report.algorithm].extend(report.gsd_values)
        for t in report.targets:
            if t.avg_aoi_periods is not None:
                aoi[report.algorithm].append(t.avg_aoi_periods)
            if t.avg_paoi_periods is not None:
                paoi[report.algorithm].append(t.avg_paoi_periods)
    for alg in {r.algorithm for r in comparison.reports}:
        for groups in (gsd, aoi, paoi):
            groups.setdefault(alg, [])
    return [
        _boxplot(gsd, "GSD [m/px]", directory / "gsd_boxplot.png"),
        _boxplot(aoi, "average AoI [orbital periods]", directory / "aoi_boxplot.png"),
        _boxplot(paoi, "average PAoI [orbital periods]", directory / "paoi_boxplot.png"),
    ]


def plot_comparison(comparison: Comparison, directory: str | Path) -> list[Path]:
    """Write every comparison figure into ``directory`` as PNG."""
    directory = Path(directory)
    paths = [plot_profit_and_missed(comparison, directory / "profit_missed.png")]
    paths += plot_distributions(comparison, directory)
    logger.info(f"Wrote {len(paths)} figures to {directory}")
    return paths
