"""Exhaustive ground truth for small instances, and frontier-size scaling.

Plans are enumerated in canonical form: nodes are labelled in id order and
each node may only reuse an existing label or open the next one, so every
partition appears exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import FrontierArchive, nondominated_mask, prune
from .graph import Plan, ProblemSpec, is_contiguous
from .scoring import PlanScorer

MAX_ENUMERABLE_NODES = 20


class EnumerationTooLarge(ValueError):
    pass


@dataclass
class EnumerationResult:
    plans: list[Plan]
    scores: list[tuple]
    frontier: FrontierArchive

    @property
    def count(self) -> int:
        return len(self.plans)


def _partitions(spec: ProblemSpec):
    """Yield canonical assignment lists of contiguous, in-tolerance plans."""
    graph, m = spec.graph, spec.m
    n = graph.n
    total = graph.total_pop
    tol_abs = spec.pop_tolerance * total
    pops = graph.pop.tolist()
    nbrs = graph.neighbors

    def too_big(p):
        return m * p - total > tol_abs

    def too_small(p):
        return total - m * p > tol_abs

    labels = [0] * n
    label_pop = [0] * (m + 1)
    label_count = [0] * (m + 1)
    closed = [False] * (m + 1)

    def component(start, upto):
        lab = labels[start]
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in nbrs[v]:
                if w <= upto and w not in seen and labels[w] == lab:
                    seen.add(w)
                    stack.append(w)
        return seen

    def close_check(i):
        """After labelling node i, detect components with no unlabelled
        neighbour left. Returns the labels newly closed, or None if dead."""
        newly = []
        done = set()
        for start in [i] + [j for j in nbrs[i] if j < i]:
            if start in done:
                continue
            comp = component(start, i)
            done |= comp
            if any(w > i for v in comp for w in nbrs[v]):
                continue
            lab = labels[start]
            if len(comp) != label_count[lab] or closed[lab] or too_small(label_pop[lab]):
                return None
            newly.append(lab)
        return newly

    def rec(i, used):
        if i == n:
            if used == m:
                yield list(labels)
            return
        if m - used > n - i:
            return
        for lab in range(1, min(used + 1, m) + 1):
            if closed[lab] or too_big(label_pop[lab] + pops[i]):
                continue
            labels[i] = lab
            label_pop[lab] += pops[i]
            label_count[lab] += 1
            newly = close_check(i)
            if newly is not None:
                for c in newly:
                    closed[c] = True
                yield from rec(i + 1, max(used, lab))
                for c in newly:
                    closed[c] = False
            label_pop[lab] -= pops[i]
            label_count[lab] -= 1
        labels[i] = 0

    yield from rec(0, 0)


def enumerate_plans(spec: ProblemSpec) -> EnumerationResult:
    """Every valid plan of ``spec``, their scores, and the exact frontier."""
    graph = spec.graph
    if graph.n > MAX_ENUMERABLE_NODES:
        raise EnumerationTooLarge(
            f"refusing to enumerate {graph.n} nodes (limit {MAX_ENUMERABLE_NODES}): plan count grows combinatorially"
        )
    scorer = PlanScorer(graph, spec.score_spec)
    plans = []
    for assignment in _partitions(spec):
        plan = Plan(np.array(assignment), spec.m)
        # the pruning above is the fast path; re-check each survivor directly
        assert is_contiguous(graph, plan)
        plans.append(plan)
    scores = [scorer(p) for p in plans]
    frontier = prune(zip(plans, scores), J=len(spec.score_spec))
    return EnumerationResult(plans, scores, frontier)


def frontier_sizes(n: int, J: int, reps: int, seed: int = 0) -> list[int]:
    """Frontier size of ``n`` iid standard-normal J-vectors, for each of ``reps`` draws.

    Normal variates come from numpy's PCG64 generator (ziggurat method), so
    results are reproducible for a given seed.
    """
    if n < 1 or J < 1 or reps < 1:
        raise ValueError("n, J and reps must all be >= 1")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    return [int(nondominated_mask(rng.standard_normal((n, J))).sum()) for _ in range(reps)]


def frontier_size_experiment(n: int, J: int, reps: int, seed: int = 0) -> tuple[float, float]:
    """Mean and sample standard deviation of the frontier size over ``reps`` draws."""
    sizes = np.array(frontier_sizes(n, J, reps, seed), dtype=np.float64)
    std = float(sizes.std(ddof=1)) if reps > 1 else 0.0
    return float(sizes.mean()), std
