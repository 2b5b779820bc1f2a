from src.plotting import plot_comparison
from src.reporting import Comparison, RunReport, TargetMetrics, comparison_row


def _report(algorithm, n_targets, seed, profit, missed, gsds):
    targets = [
        TargetMetrics(target_id=0, n_captures=2, n_delivered=2, avg_aoi_s=4000.0, avg_paoi_s=6000.0,
                      avg_aoi_periods=0.69, avg_paoi_periods=1.03, final_delta=1),
        TargetMetrics(target_id=1, n_captures=0, n_delivered=0, final_delta=3),
    ]
    return RunReport(
        algorithm=algorithm, seed=seed, n_targets=n_targets, n_satellites=8, sth_s=57922.7,
        orbital_period_s=5792.27, total_profit=profit, missed_target_pct=missed, gsd_values=gsds, targets=targets,
    )


def test_plot_comparison_writes_every_figure(tmp_path):
    reports = [
        _report("FIFO", 200, 1, 10.0, 20.0, [0.6, 0.7]),
        _report("Heuristic", 200, 1, 14.0, 5.0, [0.55, 0.6]),
        _report("Heuristic+LS", 200, 1, 15.0, 5.0, [0.5]),
        _report("FIFO", 300, 1, 12.0, 30.0, []),
    ]
    comparison = Comparison(rows=[comparison_row(r) for r in reports], reports=reports)
    paths = plot_comparison(comparison, tmp_path / "plots")
    assert [p.name for p in paths] == ["profit_missed.png", "gsd_boxplot.png", "aoi_boxplot.png", "paoi_boxplot.png"]
    for path in paths:
        assert path.read_bytes()[:4] == b"\x89PNG"


def test_plot_comparison_without_reports(tmp_path):
    paths = plot_comparison(Comparison(), tmp_path)
    assert all(p.exists() for p in paths)
