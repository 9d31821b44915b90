"""Exit criteria for the package, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line, collected again in
the terminal summary. Run alone with ``pytest tests/test_acceptance.py``.
"""

import csv
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from abstract_chains import PathWalk, UniformJump, table_scores, trap_scores
from pareto_bursts.cli import main
from pareto_bursts.engine import BurstConfig, FrontierArchive, MonotonicityMonitor, all_pairs_nondominated, pareto_short_bursts
from pareto_bursts.graph import AdjacencyGraph, Node, ProblemSpec, district_geometry, district_populations, grid_graph, is_contiguous
from pareto_bursts.oracle import enumerate_plans, frontier_size_experiment
from pareto_bursts.recom import ChainConfig, ChainState, RecomChain, iter_steps, make_rng, seed_plan
from pareto_bursts.scoring import BASE_CRITERIA, PlanScorer, deviation_from_pops, max_pop_deviation, min_polsby_popper, scalarize, score

from conftest import plan


def test_c1_oracle_frontier_recovery(report):
    spec = ProblemSpec(grid_graph(3, 3, list(range(1, 10))), 3, 0.6, BASE_CRITERIA)
    exact = enumerate_plans(spec).frontier.score_set()
    scorer = PlanScorer(spec.graph, BASE_CRITERIA)
    hits, slowest = 0, 0.0
    for seed in range(1, 6):
        t0 = time.perf_counter()
        chain = RecomChain(spec, ChainConfig(0.6))
        archive = pareto_short_bursts([seed_plan(spec, seed)], scorer, chain, BurstConfig(4, 2000, seed))
        slowest = max(slowest, time.perf_counter() - t0)
        hits += archive.score_set() == exact
    ok = hits >= 4 and slowest < 60
    report("C1 oracle frontier recovery", ok, f"{hits}/5 seeds exact, slowest run {slowest:.2f}s (< 60s)")
    assert ok


def test_c2_trap(report):
    t0 = time.perf_counter()
    stuck = total = 0
    for b in (3, 5):
        for seed in range(20):
            archive = pareto_short_bursts([0], trap_scores(b), PathWalk(b + 2), BurstConfig(b, 1000, seed))
            stuck += archive.states == [0]
            total += 1
    elapsed = time.perf_counter() - t0
    ok = stuck == total and elapsed < 5
    report("C2 irreducible-chain trap", ok, f"{stuck}/{total} runs stay at state 0, {elapsed:.2f}s (< 5s)")
    assert ok


def test_c3_frontier_monotonicity(report):
    runs = []
    spec3 = ProblemSpec(grid_graph(3, 3, list(range(1, 10))), 3, 0.6)
    spec10 = ProblemSpec(grid_graph(10, 10), 4, 0.05)
    spec6 = ProblemSpec(grid_graph(6, 6, list(range(1, 37))), 3, 0.3)
    rng = np.random.default_rng(0)
    table3 = rng.integers(0, 5, size=(200, 3))
    cases = [
        ("3x3", [seed_plan(spec3, 0)], PlanScorer(spec3.graph, BASE_CRITERIA), RecomChain(spec3, ChainConfig(0.6)), BurstConfig(4, 500, 0)),
        ("10x10", [seed_plan(spec10, 0)], PlanScorer(spec10.graph, BASE_CRITERIA), RecomChain(spec10, ChainConfig(0.05)), BurstConfig(10, 200, 0)),
        ("6x6", [seed_plan(spec6, 1)], PlanScorer(spec6.graph, BASE_CRITERIA), RecomChain(spec6, ChainConfig(0.3)), BurstConfig(5, 300, 1)),
        ("J=3 table", [0, 1, 2], table_scores(table3), UniformJump(200), BurstConfig(5, 500, 2)),
        ("trap", [0], trap_scores(3), PathWalk(5), BurstConfig(3, 300, 3)),
    ]
    violations = snapshots = 0
    for name, init, f, chain, cfg in cases:
        mon = MonotonicityMonitor()
        pareto_short_bursts(init, f, chain, cfg, callback=mon)
        violations += mon.violations
        snapshots += mon.snapshots
        runs.append(name)
    ok = violations == 0
    report("C3 frontier monotonicity", ok, f"{violations} violations over {snapshots} snapshots in {len(runs)} runs (suite-wide check also on)")
    assert ok


def test_c4_prune_correctness(report):
    rng = np.random.default_rng(2024)
    mismatches = 0
    largest = 0
    for k in range(500):
        n = int(round(10 ** rng.uniform(0, 4)))
        J = int(rng.integers(1, 6))
        if k % 3 == 0:
            pts = rng.integers(0, 6, size=(n, J)).astype(float)  # many ties
        else:
            pts = rng.standard_normal((n, J))
        largest = max(largest, n)
        archive = FrontierArchive(J)
        start = 0
        while start < n:
            chunk = int(rng.integers(1, 21))
            archive.update(((i, tuple(pts[i])) for i in range(start, min(n, start + chunk))), burst=start)
            start += chunk
        expected = {i for i, keep in enumerate(all_pairs_nondominated(pts)) if keep}
        mismatches += set(archive.states) != expected
    ok = mismatches == 0
    report("C4 prune correctness", ok, f"{mismatches} mismatches on 500 sets (largest n={largest}, J<=5)")
    assert ok


def test_c5_harmonic_and_growth(report):
    t0 = time.perf_counter()
    harmonic = float(sum(Fraction(1, k) for k in range(1, 1001)))
    mean, sd = frontier_size_experiment(1000, 2, 200, seed=0)
    se = sd / math.sqrt(200)
    within = abs(mean - harmonic) <= 3 * se
    means = [frontier_size_experiment(10_000, J, 50, seed=1)[0] for J in (1, 2, 3, 4)]
    growing = all(a < b for a, b in zip(means, means[1:]))
    elapsed = time.perf_counter() - t0
    ok = within and growing and elapsed < 120
    report(
        "C5 harmonic number / growth in J",
        ok,
        f"mean {mean:.4f} vs H_1000 {harmonic:.4f} (3 SE = {3 * se:.4f}); means J=1..4 at n=1e4 {[round(m, 2) for m in means]}; {elapsed:.1f}s",
    )
    assert ok


def test_c6_chain_validity(report):
    t0 = time.perf_counter()
    spec = ProblemSpec(grid_graph(10, 10), 4, 0.05)
    state = ChainState(seed_plan(spec, 0), make_rng(0))
    bad = 0
    visited = 0
    for s in iter_steps(state, spec, ChainConfig(0.05), 10_000):
        p = s.current
        visited += 1
        if not (is_contiguous(spec.graph, p) and len(set(p.assignment.tolist())) == 4 and max_pop_deviation(spec.graph, p) <= 0.05):
            bad += 1
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and visited == 10_000 and elapsed < 120
    report("C6 chain validity", ok, f"{visited - bad}/{visited} plans valid, {elapsed:.1f}s (< 120s)")
    assert ok


def test_c7_burst_size_insensitivity(report, tmp_path):
    graph = tmp_path / "grid10.json"
    main(["make-grid", "--rows", "10", "--cols", "10", "--out", str(graph)])
    out = tmp_path / "sweep"
    t0 = time.perf_counter()
    rc = main(
        ["experiment", "burst-size-sweep", "--graph", str(graph), "--districts", "4", "--b", "5,10,20", "--reps", "10", "--bursts", "200", "--seed", "1", "--figure-format", "none", "--out", str(out)]
    )
    elapsed = time.perf_counter() - t0
    with open(out / "summary.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    with open(out / "merged_summary.csv", newline="") as fh:
        hv = {int(r["b"]): float(r["hypervolume"]) for r in csv.DictReader(fh)}
    files = list(out.glob("b*/rep_*.json"))
    rel = max(abs(hv[a] - hv[b]) / max(hv[a], hv[b]) for a in hv for b in hv if a < b)
    ok = rc == 0 and len(files) == 30 and len(rows) == 30 and rel <= 0.10 and elapsed < 600
    report("C7 burst-size insensitivity", ok, f"merged hypervolumes {hv}, max pairwise rel. diff {rel:.4f} (<= 0.10), {elapsed:.0f}s")
    assert ok


def test_c8_determinism(report, tmp_path):
    graph = tmp_path / "grid6.json"
    main(["make-grid", "--rows", "6", "--cols", "6", "--out", str(graph)])
    common = ["--graph", str(graph), "--districts", "3", "--seed", "7"]
    commands = {
        "optimize": ["optimize", *common, "--bursts", "150", "--burst-size", "5"],
        "replications": ["optimize", *common, "--bursts", "40", "--replications", "3"],
        "baseline": ["baseline", *common, "--steps", "300"],
        "sweep": ["experiment", "burst-size-sweep", *common, "--b", "3,6", "--reps", "2", "--bursts", "20"],
        "scaling": ["experiment", "frontier-scaling", "--n", "50,500", "--J", "2,3", "--reps", "4", "--seed", "7"],
    }
    differing = []
    for name, argv in commands.items():
        outs = []
        for run in ("a", "b"):
            out = tmp_path / f"{name}_{run}"
            assert main(argv + ["--out", str(out)]) == 0
            outs.append(out)
        files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.suffix in (".json", ".csv") and p.name != "manifest.json")
        assert files
        for rel in files:
            if (outs[0] / rel).read_bytes() != (outs[1] / rel).read_bytes():
                differing.append(f"{name}/{rel}")
    ok = not differing
    report("C8 determinism", ok, f"{len(commands)} commands rerun, differing files: {differing or 'none'}")
    assert ok


def test_c9_scoring_values(report, grid2):
    def single(area, perim):
        return AdjacencyGraph((Node(0, 1, area, perim),), ())

    strip = grid_graph(1, 5)
    checks = {
        "unit square pi/4": abs(min_polsby_popper(single(1.0, 4.0), plan([1])) - math.pi / 4) <= 1e-12,
        "disk = 1": abs(min_polsby_popper(single(math.pi * 4.0, 2 * math.pi * 2.0), plan([1])) - 1.0) <= 1e-12,
        "1x4 vs square": abs(min_polsby_popper(strip, plan([1, 1, 1, 1, 2])) - 16 * math.pi / 100) <= 1e-12,
        "dev [10,10,10,10]": deviation_from_pops([10, 10, 10, 10]) == 0.0,
        "dev [12,8,10,10]": abs(deviation_from_pops([12, 8, 10, 10]) - 0.2) <= 1e-12,
        "dev [1,2,3]": abs(deviation_from_pops([1, 2, 3]) - 0.5) <= 1e-12,
        "score 2x2 split": np.allclose(score(grid2, plan([1, 1, 2, 2]), BASE_CRITERIA), (0.0, 8 * math.pi / 36), rtol=0, atol=1e-12),
        "scalarize vertex": abs(scalarize((-0.2, 0.5), (1, 0)) + 0.2) <= 1e-12,
        "scalarize midpoint": abs(scalarize((-0.2, 0.5), (0.5, 0.5)) - 0.15) <= 1e-12,
        "geometry m=1": district_geometry(grid2, plan([1, 1, 1, 1])) == [(4.0, 8.0)],
        "geometry split": district_geometry(grid2, plan([1, 1, 2, 2])) == [(2.0, 6.0)] * 2,
        "geometry singletons": district_geometry(grid2, plan([1, 2, 3, 4])) == [(1.0, 4.0)] * 4,
        "populations": district_populations(grid_graph(2, 2, [3, 1, 1, 1]), plan([1, 1, 2, 2])) == [4, 2],
    }
    failed = [k for k, v in checks.items() if not v]
    ok = not failed
    report("C9 scoring unit values", ok, f"{len(checks) - len(failed)}/{len(checks)} exact values; failed: {failed or 'none'}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
