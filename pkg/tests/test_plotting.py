import numpy as np

from pareto_bursts.plotting import plot_burst_sweep, plot_frontier_progress, plot_frontier_scaling

CRIT = ("neg_max_pop_deviation", "min_polsby_popper")


def test_progress_svg_is_reproducible(tmp_path):
    checkpoints = {10: np.array([[-0.1, 0.5], [0.0, 0.4]]), 100: np.array([[-0.05, 0.6], [0.0, 0.55]])}
    baseline = np.random.default_rng(0).uniform(size=(50, 2))
    a = plot_frontier_progress(checkpoints, tmp_path / "a.svg", CRIT, baseline)
    b = plot_frontier_progress(checkpoints, tmp_path / "b.svg", CRIT, baseline)
    assert a.read_bytes() == b.read_bytes()
    assert b"<svg" in a.read_bytes()


def test_other_figures(tmp_path):
    sweep = {5: [np.array([[0.0, 1.0]]), np.array([[-0.1, 1.2], [0.0, 0.9]])], 10: [np.array([[0.0, 1.0]])]}
    assert plot_burst_sweep(sweep, tmp_path / "s.png", CRIT).stat().st_size > 0
    rows = [(J, n, r, J * n // 10 + 1) for J in (1, 2) for n in (10, 100) for r in range(3)]
    assert plot_frontier_scaling(rows, tmp_path / "f.svg").stat().st_size > 0
