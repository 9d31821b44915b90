"""Adjacency graphs, districting plans, and their file formats.

A graph carries everything the scoring criteria need: node populations,
node areas, the length of each node's exterior boundary, and the length
of the boundary shared by each pair of adjacent nodes. District geometry
is derived from these quantities, never from polygons.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class GraphError(ValueError):
    """Raised for malformed or invalid graph input."""


class PlanError(ValueError):
    """Raised for malformed or invalid plan input."""


@dataclass(frozen=True)
class Node:
    id: int
    pop: int
    area: float
    boundary_perim: float


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    shared_perim: float


@dataclass(frozen=True, eq=False)
class AdjacencyGraph:
    """Validated, immutable adjacency graph.

    Edges are stored with ``a < b`` and sorted, so every array derived
    from them has a fixed order.
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    # numpy views, built once in __post_init__
    pop: np.ndarray = field(init=False, repr=False)
    area: np.ndarray = field(init=False, repr=False)
    boundary_perim: np.ndarray = field(init=False, repr=False)
    edge_a: np.ndarray = field(init=False, repr=False)
    edge_b: np.ndarray = field(init=False, repr=False)
    shared_perim: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes, key=lambda nd: nd.id))
        _validate(nodes, self.edges)
        edges = tuple(
            sorted(
                (Edge(min(e.a, e.b), max(e.a, e.b), float(e.shared_perim)) for e in self.edges),
                key=lambda e: (e.a, e.b),
            )
        )
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        arrays = {
            "pop": np.array([nd.pop for nd in nodes], dtype=np.int64),
            "area": np.array([nd.area for nd in nodes], dtype=np.float64),
            "boundary_perim": np.array([nd.boundary_perim for nd in nodes], dtype=np.float64),
            "edge_a": np.array([e.a for e in edges], dtype=np.intp),
            "edge_b": np.array([e.b for e in edges], dtype=np.intp),
            "shared_perim": np.array([e.shared_perim for e in edges], dtype=np.float64),
        }
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def total_pop(self) -> int:
        return int(self.pop.sum())

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for e in self.edges:
            adj[e.a].append(e.b)
            adj[e.b].append(e.a)
        return tuple(tuple(sorted(x)) for x in adj)

    def to_json(self) -> dict:
        return {
            "nodes": [
                {"id": nd.id, "pop": nd.pop, "area": nd.area, "boundary_perim": nd.boundary_perim}
                for nd in self.nodes
            ],
            "edges": [{"a": e.a, "b": e.b, "shared_perim": e.shared_perim} for e in self.edges],
        }


def _validate(nodes: Sequence[Node], edges: Iterable[Edge]) -> None:
    n = len(nodes)
    if n < 1:
        raise GraphError("graph has no nodes")
    seen = set()
    for nd in nodes:
        if nd.id in seen:
            raise GraphError(f"duplicate node id {nd.id}")
        seen.add(nd.id)
    if seen != set(range(n)):
        missing = sorted(set(range(n)) - seen)
        raise GraphError(f"node ids must be 0..{n - 1}; missing {missing[:5]}")
    for nd in nodes:
        if nd.pop < 0:
            raise GraphError(f"negative pop at node {nd.id}")
        if not nd.area > 0:
            raise GraphError(f"non-positive area at node {nd.id}")
        if nd.boundary_perim < 0:
            raise GraphError(f"negative boundary_perim at node {nd.id}")
    if sum(nd.pop for nd in nodes) <= 0:
        raise GraphError("total population must be positive")

    pairs = set()
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        if e.a == e.b:
            raise GraphError(f"self-loop at node {e.a}")
        for v in (e.a, e.b):
            if not 0 <= v < n:
                raise GraphError(f"edge ({e.a}, {e.b}) references unknown node {v}")
        key = (min(e.a, e.b), max(e.a, e.b))
        if key in pairs:
            raise GraphError(f"duplicate edge {key}")
        pairs.add(key)
        if e.shared_perim < 0:
            raise GraphError(f"negative shared_perim on edge {key}")
        parent[find(e.a)] = find(e.b)
    if len({find(v) for v in range(n)}) > 1:
        raise GraphError("graph disconnected")


def graph_from_json(data: dict) -> AdjacencyGraph:
    try:
        nodes = tuple(
            Node(
                id=int(d["id"]),
                pop=int(d["pop"]),
                area=float(d["area"]),
                boundary_perim=float(d["boundary_perim"]),
            )
            for d in data["nodes"]
        )
        edges = tuple(
            Edge(a=int(d["a"]), b=int(d["b"]), shared_perim=float(d["shared_perim"]))
            for d in data.get("edges", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph JSON: {exc!r}") from exc
    return AdjacencyGraph(nodes, edges)


def load_graph(path) -> AdjacencyGraph:
    """Read and validate a graph JSON file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GraphError(f"cannot parse {path}: {exc}") from exc
    return graph_from_json(data)


def save_graph(graph: AdjacencyGraph, path) -> None:
    Path(path).write_text(json.dumps(graph.to_json(), indent=1) + "\n", encoding="utf-8")


def grid_graph(rows: int, cols: int, pops: Sequence[int] | None = None) -> AdjacencyGraph:
    """Rook-adjacency grid of unit squares, nodes numbered row-major.

    Each exterior side of a cell contributes 1 to its boundary perimeter and
    every shared side has length 1.
    """
    if pops is None:
        pops = [1] * (rows * cols)
    if len(pops) != rows * cols:
        raise GraphError("pops length must equal rows * cols")
    nodes = []
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            exterior = (r == 0) + (r == rows - 1) + (c == 0) + (c == cols - 1)
            nodes.append(Node(i, int(pops[i]), 1.0, float(exterior)))
            if c + 1 < cols:
                edges.append(Edge(i, i + 1, 1.0))
            if r + 1 < rows:
                edges.append(Edge(i, i + cols, 1.0))
    return AdjacencyGraph(tuple(nodes), tuple(edges))


def path_graph(n: int, pops: Sequence[int] | None = None) -> AdjacencyGraph:
    """A 1 x n strip of unit squares."""
    return grid_graph(1, n, pops)


@dataclass(frozen=True, eq=False)
class Plan:
    """Assignment of every node to a district label in ``1..m``.

    Equality and hashing use the canonical form (districts renumbered in
    order of their smallest member node), so plans that differ only by a
    permutation of labels compare equal.
    """

    assignment: np.ndarray
    m: int

    def __post_init__(self):
        arr = np.array(self.assignment, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "assignment", arr)

    def __len__(self):
        return len(self.assignment)

    @cached_property
    def canonical(self) -> tuple[int, ...]:
        return canonical_labels(self.assignment)

    def __eq__(self, other):
        if not isinstance(other, Plan):
            return NotImplemented
        return self.m == other.m and self.canonical == other.canonical

    def __hash__(self):
        return hash((self.m, self.canonical))

    def __repr__(self):
        return f"Plan(m={self.m}, assignment={self.assignment.tolist()})"


def canonical_labels(assignment: Sequence[int]) -> tuple[int, ...]:
    relabel: dict[int, int] = {}
    out = []
    for lab in assignment:
        lab = int(lab)
        if lab not in relabel:
            relabel[lab] = len(relabel) + 1
        out.append(relabel[lab])
    return tuple(out)


@dataclass(frozen=True)
class ProblemSpec:
    graph: AdjacencyGraph
    m: int
    pop_tolerance: float = 0.10
    score_spec: tuple[str, ...] = ("neg_max_pop_deviation", "min_polsby_popper")

    def __post_init__(self):
        if not 1 <= self.m <= self.graph.n:
            raise ValueError(f"district count m={self.m} must be in 1..{self.graph.n}")
        if not 0 <= self.pop_tolerance < 1:
            raise ValueError("pop_tolerance must be in [0, 1)")

    def within_tolerance(self, district_pop) -> bool:
        """Whether a district population is within tolerance of N/m.

        Compared as ``|m * pop - N| <= tol * N`` to stay in integers on the
        left-hand side.
        """
        total = self.graph.total_pop
        return abs(self.m * int(district_pop) - total) <= self.pop_tolerance * total


def is_contiguous(graph: AdjacencyGraph, plan: Plan) -> bool:
    """True iff every district label 1..m induces a non-empty connected subgraph."""
    a = plan.assignment
    if len(a) != graph.n:
        raise PlanError(f"plan has {len(a)} entries, graph has {graph.n} nodes")
    if len(a) and (a.min() < 1 or a.max() > plan.m):
        logger.warning("plan labels outside 1..%d", plan.m)
        return False
    seen = np.zeros(graph.n, dtype=bool)
    nbrs = graph.neighbors
    components = 0
    for start in range(graph.n):
        if seen[start]:
            continue
        components += 1
        lab = a[start]
        seen[start] = True
        stack = [start]
        while stack:
            v = stack.pop()
            for w in nbrs[v]:
                if not seen[w] and a[w] == lab:
                    seen[w] = True
                    stack.append(w)
    # one component per label, every label present
    return components == plan.m and len(np.unique(a)) == plan.m


def district_populations(graph: AdjacencyGraph, plan: Plan) -> list[int]:
    pops = np.zeros(plan.m + 1, dtype=np.int64)
    np.add.at(pops, plan.assignment, graph.pop)
    return [int(p) for p in pops[1:]]


def district_geometry(graph: AdjacencyGraph, plan: Plan) -> list[tuple[float, float]]:
    """(area, perimeter) of each district, in label order.

    Perimeter is the exterior boundary of member nodes plus every shared
    boundary crossing the district's edge.
    """
    a = plan.assignment
    size = plan.m + 1
    areas = np.bincount(a, weights=graph.area, minlength=size)
    perims = np.bincount(a, weights=graph.boundary_perim, minlength=size)
    if len(graph.edges):
        la = a[graph.edge_a]
        lb = a[graph.edge_b]
        cut = la != lb
        cut_labels = np.concatenate([la[cut], lb[cut]])
        cut_lengths = np.concatenate([graph.shared_perim[cut], graph.shared_perim[cut]])
        perims = perims + np.bincount(cut_labels, weights=cut_lengths, minlength=size)
    return [(float(areas[i]), float(perims[i])) for i in range(1, size)]


def load_plan(path, graph: AdjacencyGraph, m: int | None = None) -> Plan:
    """Read a ``node_id,district`` CSV covering every node of ``graph``."""
    labels: dict[int, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"node_id", "district"}:
            raise PlanError(f"{path}: header must be node_id,district")
        for row in reader:
            try:
                node, lab = int(row["node_id"]), int(row["district"])
            except ValueError as exc:
                raise PlanError(f"{path}: bad row {row}") from exc
            if node in labels:
                raise PlanError(f"{path}: duplicate node_id {node}")
            labels[node] = lab
    if set(labels) != set(range(graph.n)):
        raise PlanError(f"{path}: node ids must cover 0..{graph.n - 1} exactly")
    assignment = [labels[i] for i in range(graph.n)]
    if m is None:
        m = max(assignment)
    if min(assignment) < 1 or max(assignment) > m or len(set(assignment)) != m:
        raise PlanError(f"{path}: districts must be exactly 1..{m}")
    return Plan(np.array(assignment), m)


def save_plan(plan: Plan, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "district"])
        for i, lab in enumerate(plan.assignment.tolist()):
            w.writerow([i, lab])
