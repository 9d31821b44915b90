"""Districting criteria and score vectors.

Every criterion is oriented so that larger is better. Criteria that are
naturally minimized (population deviation) are negated here, which lets
the dominance code stay orientation-free.
"""

from __future__ import annotations

import math
import re
from typing import Sequence

import numpy as np

from .graph import AdjacencyGraph, Plan, district_geometry, district_populations

ScoreVector = tuple[float, ...]

MIN_POLSBY_POPPER = "min_polsby_popper"
NEG_MAX_POP_DEVIATION = "neg_max_pop_deviation"
BASE_CRITERIA = (NEG_MAX_POP_DEVIATION, MIN_POLSBY_POPPER)

_WEIGHTED = re.compile(r"^weighted\(([^)]*)\)$")


class ScoringError(ValueError):
    pass


def polsby_popper(area: float, perim: float) -> float:
    if not perim > 0:
        raise ScoringError("degenerate district geometry")
    return 4.0 * math.pi * area / (perim * perim)


def min_polsby_popper(graph: AdjacencyGraph, plan: Plan) -> float:
    """Polsby-Popper score of the least compact district."""
    return min(polsby_popper(a, p) for a, p in district_geometry(graph, plan))


def deviation_from_pops(pops: Sequence[int], total: int | None = None) -> float:
    # |N_i - N/m| / (N/m) == |m N_i - N| / N, integer numerator
    m = len(pops)
    if total is None:
        total = sum(pops)
    return max(abs(m * int(p) - total) for p in pops) / total


def max_pop_deviation(graph: AdjacencyGraph, plan: Plan) -> float:
    return deviation_from_pops(district_populations(graph, plan), graph.total_pop)


def parse_weights(criterion: str) -> tuple[float, ...] | None:
    """Weights of a ``weighted(w1,w2)`` criterion id, or None for base ids."""
    match = _WEIGHTED.match(criterion.replace(" ", ""))
    if not match:
        return None
    try:
        w = tuple(float(x) for x in match.group(1).split(","))
    except ValueError as exc:
        raise ScoringError(f"bad weights in {criterion!r}") from exc
    check_simplex(w)
    if len(w) != len(BASE_CRITERIA):
        raise ScoringError(f"{criterion!r} needs {len(BASE_CRITERIA)} weights, one per base criterion")
    return w


def check_simplex(w: Sequence[float], atol: float = 1e-9) -> None:
    if len(w) == 0 or any(x < 0 for x in w) or abs(sum(w) - 1.0) > atol:
        raise ScoringError(f"weights {tuple(w)} are not in the simplex")


def validate_score_spec(spec: Sequence[str]) -> tuple[str, ...]:
    spec = tuple(s.strip() for s in spec)
    if not spec:
        raise ScoringError("score spec is empty")
    for s in spec:
        if s not in BASE_CRITERIA and parse_weights(s) is None:
            raise ScoringError(f"unknown criterion {s!r}")
    return spec


def score(graph: AdjacencyGraph, plan: Plan, spec: Sequence[str]) -> ScoreVector:
    """Evaluate the criteria named in ``spec``, in order.

    ``weighted(w1,w2)`` is the weighted sum of the base criteria
    ``(neg_max_pop_deviation, min_polsby_popper)``.
    """
    base = {}

    def get(name):
        if name not in base:
            if name == NEG_MAX_POP_DEVIATION:
                base[name] = 0.0 - max_pop_deviation(graph, plan)  # never -0.0
            else:
                base[name] = min_polsby_popper(graph, plan)
        return base[name]

    out = []
    for crit in spec:
        if crit in BASE_CRITERIA:
            out.append(get(crit))
            continue
        w = parse_weights(crit)
        if w is None:
            raise ScoringError(f"unknown criterion {crit!r}")
        out.append(scalarize(tuple(get(c) for c in BASE_CRITERIA), w))
    return tuple(out)


def scalarize(v: Sequence[float], w: Sequence[float]) -> float:
    """Weighted sum of a score vector."""
    if len(v) != len(w):
        raise ScoringError(f"length mismatch: {len(v)} scores, {len(w)} weights")
    return float(sum(wj * vj for wj, vj in zip(w, v)))


class PlanScorer:
    """Callable ``plan -> ScoreVector`` bound to a graph and criteria list.

    Picklable, so it can be shipped to worker processes.
    """

    def __init__(self, graph: AdjacencyGraph, spec: Sequence[str]):
        self.graph = graph
        self.spec = validate_score_spec(spec)

    def __call__(self, plan: Plan) -> ScoreVector:
        return score(self.graph, plan, self.spec)

    @property
    def J(self) -> int:
        return len(self.spec)


def as_array(scores: Sequence[ScoreVector]) -> np.ndarray:
    return np.asarray(scores, dtype=np.float64).reshape(len(scores), -1)
