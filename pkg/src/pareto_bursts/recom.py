"""Spanning-tree recombination chain and initial-plan generation.

One step merges two adjacent districts, draws a random spanning tree of
the merged region (uniform random edge weights, then a minimum spanning
tree), and cuts a tree edge that leaves both halves within population
tolerance. Only accepted moves count as steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .graph import AdjacencyGraph, Plan, ProblemSpec


class ChainError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChainConfig:
    pop_tolerance: float = 0.10
    max_attempts: int = 1000
    rng_seed: int = 0

    def __post_init__(self):
        if self.pop_tolerance < 0:
            raise ValueError("pop_tolerance must be >= 0")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


@dataclass(frozen=True)
class ChainState:
    current: Plan
    rng: np.random.Generator
    # rejected proposals so far, for run reporting
    rejections: int = 0


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def _spanning_tree(k: int, ea: list[int], eb: list[int], rng: np.random.Generator):
    """Random-weight minimum spanning tree on local nodes 0..k-1.

    Returns ``(preorder, parent)`` of the tree rooted at 0. Every subtree is
    a contiguous run of ``preorder``.
    """
    order = np.argsort(rng.random(len(ea)), kind="stable").tolist()
    uf = list(range(k))
    adj: list[list[int]] = [[] for _ in range(k)]
    joined = 0
    for e in order:
        x, y = ea[e], eb[e]
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        while uf[y] != y:
            uf[y] = uf[uf[y]]
            y = uf[y]
        if x != y:
            uf[x] = y
            adj[ea[e]].append(eb[e])
            adj[eb[e]].append(ea[e])
            joined += 1
            if joined == k - 1:
                break
    parent = [-1] * k
    seen = [False] * k
    seen[0] = True
    preorder = []
    stack = [0]
    while stack:
        v = stack.pop()
        preorder.append(v)
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                stack.append(w)
    if len(preorder) != k:
        raise ChainError("region is not connected")
    return preorder, parent


def _subtree_sums(preorder, parent, pops):
    sums = list(pops)
    sizes = [1] * len(pops)
    for v in reversed(preorder):
        p = parent[v]
        if p >= 0:
            sums[p] += sums[v]
            sizes[p] += sizes[v]
    return sums, sizes


def _region_edges(graph: AdjacencyGraph, nodes: np.ndarray):
    """Edges induced on ``nodes`` (ascending), in local indices."""
    local = np.full(graph.n, -1, dtype=np.intp)
    local[nodes] = np.arange(len(nodes))
    la = local[graph.edge_a]
    lb = local[graph.edge_b]
    keep = (la >= 0) & (lb >= 0)
    return la[keep].tolist(), lb[keep].tolist()


def seed_plan(spec: ProblemSpec, seed: int = 0, max_attempts: int = 1000) -> Plan:
    """Build a contiguous plan within tolerance by recursive tree bipartition.

    The region with the largest population that still needs splitting is
    cut into one district plus a remainder. Among tree edges that keep the
    split feasible, one that best balances the new district toward N/m is
    taken (ties broken at random).
    """
    graph, m = spec.graph, spec.m
    if m == 1:
        return Plan(np.ones(graph.n, dtype=np.int64), 1)
    rng = make_rng(seed)
    total = graph.total_pop
    tol_abs = spec.pop_tolerance * total
    pops_all = graph.pop.tolist()

    regions = [(np.arange(graph.n), m)]
    finished = []
    while regions:
        idx = max(range(len(regions)), key=lambda i: (graph.pop[regions[i][0]].sum(), -i))
        nodes, k = regions.pop(idx)
        if k == 1:
            finished.append(nodes)
            continue
        ea, eb = _region_edges(graph, nodes)
        pops = [pops_all[v] for v in nodes.tolist()]
        region_pop = sum(pops)
        best = None
        for _ in range(max_attempts):
            preorder, parent = _spanning_tree(len(nodes), ea, eb, rng)
            sums, sizes = _subtree_sums(preorder, parent, pops)
            cands = []
            for v in range(1, len(nodes)):
                for one, side in ((sums[v], 0), (region_pop - sums[v], 1)):
                    rest = region_pop - one
                    # |m*one - N| <= tol*N and remainder averages within tolerance
                    if abs(m * one - total) <= tol_abs and abs(m * rest - (k - 1) * total) <= (k - 1) * tol_abs:
                        cands.append((abs(m * one - total), v, side))
            if cands:
                lowest = min(c[0] for c in cands)
                cands = [c for c in cands if c[0] == lowest]
                best = (preorder, sizes, cands[int(rng.integers(len(cands)))])
                break
        if best is None:
            raise ChainError(f"no feasible seed found after {max_attempts} tree draws")
        preorder, sizes, (_, v, side) = best
        pos = preorder.index(v)
        in_sub = np.zeros(len(nodes), dtype=bool)
        in_sub[preorder[pos:pos + sizes[v]]] = True
        one_mask = in_sub if side == 0 else ~in_sub
        regions.append((nodes[one_mask], 1))
        regions.append((nodes[~one_mask], k - 1))

    assignment = np.zeros(graph.n, dtype=np.int64)
    for lab, nodes in enumerate(sorted(finished, key=lambda r: int(r.min())), start=1):
        assignment[nodes] = lab
    return Plan(assignment, m)


def adjacent_district_pairs(graph: AdjacencyGraph, plan: Plan) -> list[tuple[int, int]]:
    a = plan.assignment
    la = a[graph.edge_a]
    lb = a[graph.edge_b]
    cut = la != lb
    lo = np.minimum(la[cut], lb[cut])
    hi = np.maximum(la[cut], lb[cut])
    keys = np.unique(lo * (plan.m + 1) + hi)
    return [(int(k // (plan.m + 1)), int(k % (plan.m + 1))) for k in keys]


def recom_step(state: ChainState, spec: ProblemSpec, config: ChainConfig) -> ChainState:
    """One accepted recombination move; rejected proposals are retried."""
    plan, rng = state.current, state.rng
    if plan.m < 2:
        raise ChainError("step requires m >= 2")
    graph = spec.graph
    total = graph.total_pop
    tol_abs = config.pop_tolerance * total
    m = plan.m
    a = plan.assignment
    pairs = adjacent_district_pairs(graph, plan)
    pops_all = graph.pop.tolist()

    for attempt in range(config.max_attempts):
        d1, d2 = pairs[int(rng.integers(len(pairs)))]
        nodes = np.flatnonzero((a == d1) | (a == d2))
        ea, eb = _region_edges(graph, nodes)
        pops = [pops_all[v] for v in nodes.tolist()]
        region_pop = sum(pops)
        preorder, parent = _spanning_tree(len(nodes), ea, eb, rng)
        sums, sizes = _subtree_sums(preorder, parent, pops)
        balanced = [
            v
            for v in range(1, len(nodes))
            if abs(m * sums[v] - total) <= tol_abs and abs(m * (region_pop - sums[v]) - total) <= tol_abs
        ]
        if not balanced:
            continue
        v = balanced[int(rng.integers(len(balanced)))]
        pos = preorder.index(v)
        in_sub = np.zeros(len(nodes), dtype=bool)
        in_sub[preorder[pos:pos + sizes[v]]] = True
        # the root (lowest node id of the union) is never in_sub; its side keeps the lower label
        new = a.copy()
        new[nodes[~in_sub]] = d1
        new[nodes[in_sub]] = d2
        return ChainState(Plan(new, m), rng, state.rejections + attempt)
    raise ChainError(f"step rejection exhausted after {config.max_attempts} attempts")


def iter_steps(state: ChainState, spec: ProblemSpec, config: ChainConfig, steps: int) -> Iterator[ChainState]:
    for _ in range(steps):
        state = recom_step(state, spec, config)
        yield state


def run_burst(state: ChainState, spec: ProblemSpec, config: ChainConfig, b: int) -> list[Plan]:
    """The ``b`` plans visited by ``b`` consecutive accepted steps from ``state``."""
    if b < 1:
        raise ValueError("burst size must be >= 1")
    return [s.current for s in iter_steps(state, spec, config, b)]


class RecomChain:
    """Adapter giving the engine its ``chain(plan, b, rng) -> plans`` interface.

    Tracks accepted steps and rejected proposals across calls.
    """

    def __init__(self, spec: ProblemSpec, config: ChainConfig):
        self.spec = spec
        self.config = config
        self.steps = 0
        self.rejections = 0

    def __call__(self, plan: Plan, b: int, rng: np.random.Generator) -> list[Plan]:
        if b < 1:
            raise ValueError("burst size must be >= 1")
        plans = []
        state = ChainState(plan, rng)
        for state in iter_steps(state, self.spec, self.config, b):
            plans.append(state.current)
        self.steps += b
        self.rejections += state.rejections
        return plans
