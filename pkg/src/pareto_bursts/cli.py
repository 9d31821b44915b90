"""Command-line front end.

Subcommands::

    pareto-bursts optimize   --graph G --districts M --out DIR [...]
    pareto-bursts baseline   --graph G --districts M --steps N --out DIR [...]
    pareto-bursts experiment burst-size-sweep --graph G --districts M --out DIR [...]
    pareto-bursts experiment frontier-scaling --n 100,1000 --J 1,2,3 --out DIR [...]
    pareto-bursts make-grid  --rows R --cols C --out grid.json

Every run writes ``manifest.json`` next to its outputs. Errors are reported
as a single ``error: <kind>: <message>`` line on stderr with exit status 1.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .engine import (
    BurstConfig,
    FrontierArchive,
    MonotonicityMonitor,
    all_pairs_nondominated,
    baseline_chain_sample,
    hypervolume,
    merge_archives,
    pareto_short_bursts,
)
from .graph import (
    GraphError,
    Plan,
    PlanError,
    ProblemSpec,
    district_populations,
    grid_graph,
    is_contiguous,
    load_graph,
    load_plan,
    save_graph,
    save_plan,
)
from .oracle import frontier_sizes
from .recom import ChainConfig, ChainError, RecomChain, make_rng, seed_plan
from .scoring import BASE_CRITERIA, PlanScorer, ScoringError, deviation_from_pops, validate_score_spec
from .serialize import archive_to_json, file_digest, write_json, write_rows, write_score_csv

THREADS_ENV = "PARETO_BURSTS_THREADS"


class UsageError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _score_list(text: str) -> tuple[str, ...]:
    # split on commas outside weighted(...) parentheses
    out, depth, cur = [], 0, ""
    for ch in text:
        depth += ch == "("
        depth -= ch == ")"
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return tuple(s.strip() for s in out if s.strip())


# ---------------------------------------------------------------- setup


def _add_problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True, help="graph JSON file")
    p.add_argument("--districts", type=int, required=True, help="number of districts m")
    p.add_argument("--scores", type=_score_list, default=BASE_CRITERIA, help="comma-separated criterion ids")
    p.add_argument("--pop-tolerance", type=float, default=0.10, help="max population deviation allowed by the chain")
    p.add_argument("--max-attempts", type=int, default=1000, help="proposal retries per chain step")
    p.add_argument("--init", help="initial plan CSV (node_id,district); default is a generated seed plan")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed; replication r uses seed + r")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--figure-format", choices=("svg", "png", "none"), default="svg")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pareto-bursts", description="Pareto optimization of districting plans by short bursts")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="run Pareto short bursts")
    _add_problem_args(p)
    p.add_argument("--burst-size", type=int, default=10)
    p.add_argument("--bursts", type=int, default=100)
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--parallel", action="store_true", help=f"run replications in worker processes (cap: ${THREADS_ENV})")
    p.add_argument("--checkpoint-every", type=int, default=10, help="trace the archive every K bursts")
    p.add_argument("--baseline-steps", type=int, default=0, help="also sample the raw chain for the figure")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("baseline", help="score a raw chain run")
    _add_problem_args(p)
    p.add_argument("--steps", type=int, required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("experiment", help="parameter sweeps")
    exp = p.add_subparsers(dest="experiment", required=True)
    q = exp.add_parser("burst-size-sweep", help="replicated runs over a grid of burst sizes")
    _add_problem_args(q)
    q.add_argument("--b", type=_int_list, default=[5, 10, 20], help="burst sizes")
    q.add_argument("--reps", type=int, default=10)
    q.add_argument("--bursts", type=int, default=200)
    q.add_argument("--parallel", action="store_true")
    q.set_defaults(func=cmd_burst_sweep)
    q = exp.add_parser("frontier-scaling", help="frontier size of Gaussian samples")
    q.add_argument("--n", type=_int_list, default=[10, 100, 1000, 10000])
    q.add_argument("--J", type=_int_list, default=[1, 2, 3, 4, 5])
    q.add_argument("--reps", type=int, default=20)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True)
    q.add_argument("--figure-format", choices=("svg", "png", "none"), default="svg")
    q.set_defaults(func=cmd_frontier_scaling)

    p = sub.add_parser("make-grid", help="write a rook-adjacency grid graph JSON")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--pops", type=_int_list, help="row-major node populations (default all 1)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_grid)
    return parser


@dataclass
class Problem:
    spec: ProblemSpec
    scorer: PlanScorer
    chain_config: ChainConfig
    init: Plan | None
    inputs: dict
    config: dict = field(default_factory=dict)


def _load_problem(args) -> Problem:
    graph = load_graph(args.graph)
    scores = validate_score_spec(args.scores)
    spec = ProblemSpec(graph, args.districts, args.pop_tolerance, scores)
    chain_config = ChainConfig(args.pop_tolerance, args.max_attempts, args.seed)
    inputs = {"graph": file_digest(args.graph), "init": None}
    init = None
    if args.init:
        init = load_plan(args.init, graph, args.districts)
        inputs["init"] = file_digest(args.init)
        _check_init(spec, init)
    config = {
        "graph": str(args.graph),
        "districts": args.districts,
        "scores": list(scores),
        "J": len(scores),
        "pop_tolerance": args.pop_tolerance,
        "max_attempts": args.max_attempts,
        "init": str(args.init) if args.init else "seed_plan",
        "seed": args.seed,
    }
    return Problem(spec, PlanScorer(graph, scores), chain_config, init, inputs, config)


def _check_init(spec: ProblemSpec, plan: Plan) -> None:
    if not is_contiguous(spec.graph, plan):
        raise PlanError("initial plan has a non-contiguous district")
    dev = deviation_from_pops(district_populations(spec.graph, plan), spec.graph.total_pop)
    if dev > spec.pop_tolerance:
        raise PlanError(f"initial plan deviation {dev:.6g} exceeds --pop-tolerance {spec.pop_tolerance}")


def _workers(n_tasks: int, parallel: bool) -> int:
    if not parallel:
        return 1
    cap = os.environ.get(THREADS_ENV)
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n_tasks, limit))


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _figure_path(out: Path, stem: str, fmt: str) -> Path | None:
    return None if fmt == "none" else out / f"{stem}.{fmt}"


# ---------------------------------------------------------------- runs


@dataclass
class RunTask:
    spec: ProblemSpec
    scorer: PlanScorer
    chain_config: ChainConfig
    init: Plan | None
    burst_config: BurstConfig
    checkpoint_every: int = 10


@dataclass
class RunResult:
    archive: FrontierArchive
    trace: list
    checkpoints: dict
    steps: int
    rejections: int
    violations: int


def _plot_checkpoint(burst: int, final: int) -> bool:
    if burst == final:
        return True
    return burst >= 10 and 10 ** round(np.log10(burst)) == burst


def run_task(task: RunTask) -> RunResult:
    seed = task.burst_config.rng_seed
    init = task.init if task.init is not None else seed_plan(task.spec, seed, task.chain_config.max_attempts)
    chain = RecomChain(task.spec, task.chain_config)
    monitor = MonotonicityMonitor()
    trace: list = []
    checkpoints: dict = {}
    final = task.burst_config.max_bursts
    every = max(1, task.checkpoint_every)

    def record(burst: int, archive: FrontierArchive) -> None:
        monitor(burst, archive)
        if burst % every == 0 or burst == final:
            trace.extend((burst, e.scores) for e in archive.entries)
        if _plot_checkpoint(burst, final):
            checkpoints[burst] = archive.score_array()

    archive = pareto_short_bursts([init], task.scorer, chain, task.burst_config, make_rng(seed), callback=record)
    return RunResult(archive, trace, checkpoints, chain.steps, chain.rejections, monitor.violations)


def _write_archive(out: Path, archive: FrontierArchive, config: dict, plans_dir: Path | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "frontier.json", archive_to_json(archive, config))
    if plans_dir is not None:
        plans_dir.mkdir(exist_ok=True)
        for old in plans_dir.glob("entry_*.csv"):
            old.unlink()
        for i, e in enumerate(archive.entries):
            save_plan(e.state, plans_dir / f"entry_{i:03d}.csv")


def _merge_check(archives, merged: FrontierArchive) -> bool:
    """Merged archive equals the all-pairs filter of the union's distinct states."""
    union = {}
    for arch in archives:
        for e in arch.entries:
            union.setdefault(e.state, e.scores)
    if not union:
        return len(merged) == 0
    states = list(union)
    scores = np.array([union[s] for s in states])
    keep = all_pairs_nondominated(scores)
    return {s for s, k in zip(states, keep) if k} == set(merged.states)


def cmd_optimize(args) -> int:
    t0 = time.perf_counter()
    if args.replications < 1:
        raise UsageError("--replications must be >= 1")
    problem = _load_problem(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = dict(problem.config, burst_size=args.burst_size, bursts=args.bursts, replications=args.replications)
    tasks = [
        RunTask(
            problem.spec,
            problem.scorer,
            problem.chain_config,
            problem.init,
            BurstConfig(args.burst_size, args.bursts, args.seed + r),
            args.checkpoint_every,
        )
        for r in range(args.replications)
    ]
    results = _map(run_task, tasks, _workers(len(tasks), args.parallel))
    J = problem.scorer.J
    counters = {
        "bursts": args.bursts * len(results),
        "accepted_steps": sum(r.steps for r in results),
        "rejected_proposals": sum(r.rejections for r in results),
        "monotonicity_violations": sum(r.violations for r in results),
    }
    merge_ok = None
    if len(results) == 1:
        archive = results[0].archive
        _write_archive(out, archive, config, out / "plans")
        write_score_csv(out / "trace.csv", "burst", results[0].trace, J)
        checkpoints = results[0].checkpoints
    else:
        for r, res in enumerate(results):
            rdir = out / "replications" / f"rep_{r:02d}"
            _write_archive(rdir, res.archive, dict(config, seed=args.seed + r, replication=r))
            write_score_csv(rdir / "trace.csv", "burst", res.trace, J)
        archive = merge_archives([res.archive for res in results])
        merge_ok = _merge_check([res.archive for res in results], archive)
        if not merge_ok:
            raise RuntimeError("merged archive differs from the all-pairs filter of the union")
        _write_archive(out, archive, dict(config, seeds=[args.seed + r for r in range(len(results))]), out / "plans")
        checkpoints = {args.bursts: archive.score_array()}

    baseline = None
    if args.baseline_steps > 0:
        init = problem.init if problem.init is not None else seed_plan(problem.spec, args.seed, args.max_attempts)
        chain = RecomChain(problem.spec, problem.chain_config)
        trace = baseline_chain_sample(init, problem.scorer, chain, args.baseline_steps, make_rng(args.seed))
        write_score_csv(out / "baseline.csv", "step", enumerate(trace), J)
        baseline = np.array(trace)

    fig = _figure_path(out, "frontier", args.figure_format)
    if fig is not None and J == 2:
        from .plotting import plot_frontier_progress

        plot_frontier_progress(checkpoints, fig, problem.spec.score_spec, baseline)

    write_json(
        out / "manifest.json",
        {
            "version": __version__,
            "command": vars_for_manifest(args),
            "config": dict(config, checkpoint_every=args.checkpoint_every, baseline_steps=args.baseline_steps),
            "inputs": problem.inputs,
            "counters": counters,
            "merge_check": merge_ok,
            "runtime_seconds": round(time.perf_counter() - t0, 3),
        },
    )
    if counters["monotonicity_violations"]:
        raise RuntimeError(f"{counters['monotonicity_violations']} frontier monotonicity violations")
    print(f"frontier: {len(archive)} plans -> {out / 'frontier.json'}")
    return 0


def vars_for_manifest(args) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(args).items() if k != "func"}


def cmd_baseline(args) -> int:
    t0 = time.perf_counter()
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    problem = _load_problem(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    init = problem.init if problem.init is not None else seed_plan(problem.spec, args.seed, args.max_attempts)
    chain = RecomChain(problem.spec, problem.chain_config)
    trace = baseline_chain_sample(init, problem.scorer, chain, args.steps, make_rng(args.seed))
    write_score_csv(out / "baseline.csv", "step", enumerate(trace), problem.scorer.J)
    fig = _figure_path(out, "baseline", args.figure_format)
    if fig is not None and problem.scorer.J == 2:
        from .plotting import plot_frontier_progress

        plot_frontier_progress({}, fig, problem.spec.score_spec, np.array(trace))
    write_json(
        out / "manifest.json",
        {
            "version": __version__,
            "command": vars_for_manifest(args),
            "config": dict(problem.config, steps=args.steps),
            "inputs": problem.inputs,
            "counters": {"accepted_steps": chain.steps, "rejected_proposals": chain.rejections},
            "runtime_seconds": round(time.perf_counter() - t0, 3),
        },
    )
    print(f"baseline: {len(trace)} rows -> {out / 'baseline.csv'}")
    return 0


def cmd_burst_sweep(args) -> int:
    t0 = time.perf_counter()
    if args.reps < 1 or not args.b:
        raise UsageError("--reps must be >= 1 and --b non-empty")
    problem = _load_problem(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cells = [(b, r) for b in args.b for r in range(args.reps)]
    tasks = [
        RunTask(problem.spec, problem.scorer, problem.chain_config, problem.init, BurstConfig(b, args.bursts, args.seed + r), args.bursts or 1)
        for b, r in cells
    ]
    results = _map(run_task, tasks, _workers(len(tasks), args.parallel))
    by_cell = dict(zip(cells, results))
    J = problem.scorer.J

    for (b, r), res in by_cell.items():
        (out / f"b{b}").mkdir(exist_ok=True)
        cfg = dict(problem.config, burst_size=b, bursts=args.bursts, seed=args.seed + r, replication=r)
        write_json(out / f"b{b}" / f"rep_{r:02d}.json", archive_to_json(res.archive, cfg))
    merged = {}
    for b in args.b:
        merged[b] = merge_archives([by_cell[(b, r)].archive for r in range(args.reps)])
        write_json(out / f"b{b}" / "merged.json", archive_to_json(merged[b], dict(problem.config, burst_size=b, bursts=args.bursts)))

    summary = []
    merged_rows = []
    if J == 2:
        reference = np.min([res.archive.lower for res in results], axis=0)
        for (b, r), res in by_cell.items():
            summary.append((b, r, hypervolume(res.archive, reference)))
        merged_rows = [(b, hypervolume(merged[b], reference)) for b in args.b]
        write_rows(out / "summary.csv", ["b", "replication", "hypervolume"], summary)
        write_rows(out / "merged_summary.csv", ["b", "hypervolume"], merged_rows)
        fig = _figure_path(out, "burst_sweep", args.figure_format)
        if fig is not None:
            from .plotting import plot_burst_sweep

            plot_burst_sweep({b: [by_cell[(b, r)].archive.score_array() for r in range(args.reps)] for b in args.b}, fig, problem.spec.score_spec)
    else:
        write_rows(out / "summary.csv", ["b", "replication", "frontier_size"], [(b, r, len(res.archive)) for (b, r), res in by_cell.items()])

    write_json(
        out / "manifest.json",
        {
            "version": __version__,
            "command": vars_for_manifest(args),
            "config": dict(problem.config, b=args.b, reps=args.reps, bursts=args.bursts),
            "inputs": problem.inputs,
            "hypervolume_reference": None if J != 2 else [float(x) for x in reference],
            "counters": {
                "runs": len(results),
                "accepted_steps": sum(r.steps for r in results),
                "rejected_proposals": sum(r.rejections for r in results),
                "monotonicity_violations": sum(r.violations for r in results),
            },
            "runtime_seconds": round(time.perf_counter() - t0, 3),
        },
    )
    print(f"burst-size sweep: {len(results)} runs -> {out}")
    return 0


def cmd_frontier_scaling(args) -> int:
    t0 = time.perf_counter()
    if args.reps < 1 or not args.n or not args.J or min(args.n) < 1 or min(args.J) < 1:
        raise UsageError("--n, --J and --reps must be positive")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    summary = []
    for J in args.J:
        for n in args.n:
            sizes = frontier_sizes(n, J, args.reps, args.seed)
            rows.extend((J, n, r, s) for r, s in enumerate(sizes))
            arr = np.array(sizes, dtype=np.float64)
            summary.append((J, n, float(arr.mean()), float(arr.std(ddof=1)) if len(arr) > 1 else 0.0))
    write_rows(out / "frontier_scaling.csv", ["J", "n", "rep", "frontier_size"], rows)
    write_rows(out / "frontier_scaling_summary.csv", ["J", "n", "mean", "stddev"], summary)
    fig = _figure_path(out, "frontier_scaling", args.figure_format)
    if fig is not None:
        from .plotting import plot_frontier_scaling

        plot_frontier_scaling(rows, fig)
    write_json(
        out / "manifest.json",
        {
            "version": __version__,
            "command": vars_for_manifest(args),
            "config": {"n": args.n, "J": args.J, "reps": args.reps, "seed": args.seed, "normal_method": "numpy PCG64 ziggurat"},
            "runtime_seconds": round(time.perf_counter() - t0, 3),
        },
    )
    print(f"frontier scaling: {len(rows)} rows -> {out / 'frontier_scaling.csv'}")
    return 0


def cmd_make_grid(args) -> int:
    graph = grid_graph(args.rows, args.cols, args.pops)
    save_graph(graph, args.out)
    print(f"grid {args.rows}x{args.cols} -> {args.out}")
    return 0


_ERROR_KINDS = (
    (GraphError, "graph"),
    (PlanError, "plan"),
    (ScoringError, "scores"),
    (ChainError, "chain"),
    (UsageError, "usage"),
    (OSError, "io"),
    (ValueError, "value"),
    (RuntimeError, "runtime"),
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        for cls, kind in _ERROR_KINDS:
            if isinstance(exc, cls):
                msg = " ".join(str(exc).split())
                print(f"error: {kind}: {msg}", file=sys.stderr)
                return 1
        raise


if __name__ == "__main__":
    sys.exit(main())
