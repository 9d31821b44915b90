import json
import os

import numpy as np
import pytest

# every optimization run in the suite verifies archive invariants per burst
os.environ["PARETO_BURSTS_CHECK"] = "1"

from pareto_bursts.graph import Plan, ProblemSpec, grid_graph, path_graph  # noqa: E402


def plan(labels, m=None):
    labels = list(labels)
    return Plan(np.array(labels), m or max(labels))


@pytest.fixture
def grid2():
    """2x2 unit-square grid: 0 1 / 2 3."""
    return grid_graph(2, 2)


@pytest.fixture
def grid10_spec():
    return ProblemSpec(grid_graph(10, 10), 4, 0.05)


@pytest.fixture
def three_by_three_spec():
    return ProblemSpec(grid_graph(3, 3, list(range(1, 10))), 3, 0.6)


@pytest.fixture
def p4():
    return path_graph(4)


@pytest.fixture
def write_json(tmp_path):
    def _write(obj, name="g.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return path

    return _write


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report(request):
    """Record a one-line PASS/FAIL verdict for an acceptance criterion."""

    def _report(criterion, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
