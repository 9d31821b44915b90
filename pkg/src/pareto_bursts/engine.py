"""Short-burst optimization over an abstract state space.

Nothing here knows about districting plans. A run needs three things:

* states: any hashable values (hash/equality decide duplicate states),
* ``score(state) -> tuple[float, ...]`` with larger-is-better coordinates,
* ``chain(state, b, rng) -> list`` of the ``b`` states visited from ``state``.

All randomness comes from one ``numpy.random.Generator`` that is threaded
through archive sampling and the chain, so a seed fixes the run.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Sequence

import numpy as np

ScoreFn = Callable[[Any], tuple]
Chain = Callable[[Any, int, np.random.Generator], list]

# set to 1 to verify archive invariants after every burst of every run
CHECK_ENV = "PARETO_BURSTS_CHECK"


class FrontierInvariantError(AssertionError):
    pass


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a`` is Pareto-dominated by ``b`` (``a ≺ b``).

    ``b`` is at least as large on every coordinate and strictly larger on
    at least one.
    """
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    strict = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


def nondominated_mask(scores: np.ndarray) -> np.ndarray:
    """Boolean mask of rows not dominated by any other row.

    Rows with identical vectors do not dominate each other, so all copies
    of a non-dominated vector are kept. Rows are visited in decreasing
    coordinate-sum order so the first few survivors eliminate most of the
    rest; correctness does not depend on that order.
    """
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[0]
    keep = np.ones(n, dtype=bool)
    if n <= 1:
        return keep
    for i in np.argsort(-scores.sum(axis=1), kind="stable"):
        if not keep[i]:
            continue
        c = scores[i]
        live = np.flatnonzero(keep)
        rows = scores[live]
        dominated = np.all(rows <= c, axis=1) & np.any(rows < c, axis=1)
        keep[live[dominated]] = False
    return keep


def all_pairs_nondominated(scores: np.ndarray) -> np.ndarray:
    """Reference O(n^2) filter: test every row against every other row."""
    scores = np.asarray(scores, dtype=np.float64)
    n, J = scores.shape
    keep = np.ones(n, dtype=bool)
    block = max(1, 1_000_000 // max(n, 1))
    for lo in range(0, n, block):
        c = scores[lo : lo + block]
        ge = np.ones((c.shape[0], n), dtype=bool)
        gt = np.zeros((c.shape[0], n), dtype=bool)
        for j in range(J):
            col, cj = scores[None, :, j], c[:, j, None]
            ge &= col >= cj
            gt |= col > cj
        keep[lo : lo + block] = ~np.any(ge & gt, axis=1)
    return keep


@dataclass(frozen=True)
class ArchiveEntry:
    state: Any
    scores: tuple
    burst_found: int


@dataclass
class FrontierArchive:
    """The running non-dominated set of a short-burst run.

    Invariants after every ``update``: no entry's scores dominate another's,
    and no two entries hold equal states. Distinct states with equal scores
    are all kept; a repeated state keeps its earliest ``burst_found``.
    ``lower`` is the componentwise minimum of every score ever offered,
    kept or not.
    """

    J: int
    entries: list[ArchiveEntry] = field(default_factory=list)
    lower: np.ndarray | None = None

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def states(self) -> list:
        return [e.state for e in self.entries]

    def score_array(self) -> np.ndarray:
        return np.array([e.scores for e in self.entries], dtype=np.float64).reshape(len(self.entries), self.J)

    def score_set(self) -> set[tuple]:
        return {e.scores for e in self.entries}

    def copy(self) -> "FrontierArchive":
        return FrontierArchive(self.J, list(self.entries), None if self.lower is None else self.lower.copy())

    def update(self, points: Iterable[tuple[Hashable, Sequence[float]]], burst: int) -> None:
        """Add ``(state, scores)`` points found in ``burst`` and drop dominated entries."""
        known = {e.state for e in self.entries}
        fresh: list[ArchiveEntry] = []
        for state, sc in points:
            sc = tuple(float(x) for x in sc)
            if len(sc) != self.J:
                raise ValueError(f"score vector of length {len(sc)}, archive has J={self.J}")
            arr = np.asarray(sc)
            self.lower = arr.copy() if self.lower is None else np.minimum(self.lower, arr)
            if state in known:
                continue
            known.add(state)
            fresh.append(ArchiveEntry(state, sc, burst))
        if not fresh:
            return
        new = np.array([e.scores for e in fresh], dtype=np.float64)
        keep_new = nondominated_mask(new)
        fresh = [e for e, k in zip(fresh, keep_new) if k]
        new = new[keep_new]
        if self.entries:
            old = self.score_array()
            # beats[i, j]: old[i] dominates new[j]; lost[i, j]: new[j] dominates old[i]
            ge = np.all(old[:, None, :] >= new[None, :, :], axis=2)
            gt = np.any(old[:, None, :] > new[None, :, :], axis=2)
            le = np.all(old[:, None, :] <= new[None, :, :], axis=2)
            lt = np.any(old[:, None, :] < new[None, :, :], axis=2)
            new_ok = ~np.any(ge & gt, axis=0)
            old_ok = ~np.any((le & lt)[:, new_ok], axis=1)
            self.entries = [e for e, k in zip(self.entries, old_ok) if k]
            fresh = [e for e, k in zip(fresh, new_ok) if k]
        self.entries = self.entries + fresh


def prune(points: Iterable[tuple[Hashable, Sequence[float]]], J: int | None = None, burst: int = 0) -> FrontierArchive:
    """Frontier archive of the non-dominated points among ``points``."""
    points = list(points)
    if J is None:
        if not points:
            raise ValueError("cannot infer J from an empty point list")
        J = len(points[0][1])
    archive = FrontierArchive(J)
    archive.update(points, burst)
    return archive


def merge_archives(archives: Sequence[FrontierArchive]) -> FrontierArchive:
    """Prune of the union of several archives, keeping each entry's provenance."""
    if not archives:
        raise ValueError("nothing to merge")
    merged = FrontierArchive(archives[0].J)
    combined: dict = {}
    for arch in archives:
        for e in arch.entries:
            old = combined.get(e.state)
            if old is None or e.burst_found < old.burst_found:
                combined[e.state] = e
        if arch.lower is not None:
            merged.lower = arch.lower.copy() if merged.lower is None else np.minimum(merged.lower, arch.lower)
    entries = list(combined.values())
    if entries:
        mask = nondominated_mask(np.array([e.scores for e in entries]))
        merged.entries = [e for e, k in zip(entries, mask) if k]
    return merged


@dataclass(frozen=True)
class BurstConfig:
    burst_size: int = 10
    max_bursts: int = 100
    rng_seed: int = 0
    # stop once some archive entry weakly dominates this vector
    threshold: tuple | None = None

    def __post_init__(self):
        if self.burst_size < 1:
            raise ValueError("burst_size must be >= 1")
        if self.max_bursts < 0:
            raise ValueError("max_bursts must be >= 0")


def _reaches(scores: Sequence[float], threshold: Sequence[float] | None) -> bool:
    return threshold is not None and all(s >= t for s, t in zip(scores, threshold))


def short_burst_univariate(
    init,
    score: ScoreFn,
    chain: Chain,
    config: BurstConfig,
    rng: np.random.Generator | None = None,
):
    """Single-criterion short bursts.

    Each burst runs ``b`` chain steps from the incumbent and moves the
    incumbent to the best of the ``b + 1`` states; ties go to the earliest
    index, so the incumbent survives ties. Returns the final incumbent and
    the best-score trace (entry 0 is the initial score).
    """
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    current = init
    best = _univariate(score(current))
    trace = [best]
    for _ in range(config.max_bursts):
        if _reaches((best,), config.threshold):
            break
        states = [current] + list(chain(current, config.burst_size, rng))
        values = [best] + [_univariate(score(s)) for s in states[1:]]
        k = argmax_first(values)
        current, best = states[k], values[k]
        trace.append(best)
    return current, trace


def argmax_first(values: Sequence[float]) -> int:
    """Index of the largest value; the lowest index wins ties."""
    k = 0
    for i, v in enumerate(values):
        if v > values[k]:
            k = i
    return k


def _univariate(v) -> float:
    if isinstance(v, (tuple, list, np.ndarray)):
        if len(v) != 1:
            raise ValueError("univariate short bursts need J = 1")
        return float(v[0])
    return float(v)


def pareto_short_bursts(
    init_set: Sequence,
    score: ScoreFn,
    chain: Chain,
    config: BurstConfig,
    rng: np.random.Generator | None = None,
    callback: Callable[[int, FrontierArchive], None] | None = None,
    check: bool | None = None,
) -> FrontierArchive:
    """Multi-criterion short bursts.

    Each burst starts from an archive state drawn uniformly at random, runs
    ``b`` chain steps, adds every visited state to the archive and prunes.
    ``callback(burst, archive)`` sees the archive after initialization
    (burst 0) and after every burst.

    With a one-state archive no draw is made, so for J = 1 with distinct
    scores this consumes the same random stream as
    :func:`short_burst_univariate`.

    With ``check`` (default: the ``PARETO_BURSTS_CHECK`` environment
    variable) the antichain and no-regression invariants are verified after
    every burst and a violation raises :class:`FrontierInvariantError`.
    """
    if check is None:
        check = os.environ.get(CHECK_ENV, "") not in ("", "0")
    if check:
        monitor = MonotonicityMonitor()
        user_callback = callback

        def callback(burst, archive):
            monitor(burst, archive)
            if monitor.violations:
                raise FrontierInvariantError(f"archive invariant violated at burst {burst}")
            if user_callback:
                user_callback(burst, archive)

    init_set = list(init_set)
    if not init_set:
        raise ValueError("init_set is empty")
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    scored = [(s, tuple(score(s))) for s in init_set]
    archive = prune(scored, J=len(scored[0][1]), burst=0)
    if callback:
        callback(0, archive)
    for burst in range(1, config.max_bursts + 1):
        if any(_reaches(e.scores, config.threshold) for e in archive.entries):
            break
        n = len(archive.entries)
        start = archive.entries[0 if n == 1 else int(rng.integers(n))].state
        visited = chain(start, config.burst_size, rng)
        archive.update(((s, tuple(score(s))) for s in visited), burst)
        if callback:
            callback(burst, archive)
    return archive


def hypervolume(archive, reference: Sequence[float]) -> float:
    """Area dominated by a two-criterion frontier above ``reference``.

    Accepts a :class:`FrontierArchive` or an ``(n, 2)`` array of scores.
    """
    pts = archive.score_array() if isinstance(archive, FrontierArchive) else np.asarray(archive, dtype=np.float64)
    if pts.size == 0:
        return 0.0
    pts = pts.reshape(len(pts), -1)
    if pts.shape[1] != 2 or len(reference) != 2:
        raise ValueError("hypervolume is implemented for J = 2 only")
    rx, ry = float(reference[0]), float(reference[1])
    if np.any(pts[:, 0] < rx) or np.any(pts[:, 1] < ry):
        raise ValueError("a frontier point lies below the reference point")
    # sweep from largest x down; each point adds the strip above the best y so far
    order = np.lexsort((-pts[:, 1], -pts[:, 0]))
    area = 0.0
    top = ry
    for i in order:
        x, y = pts[i]
        if y > top:
            area += (x - rx) * (y - top)
            top = y
    return float(area)


def baseline_chain_sample(init, score: ScoreFn, chain: Chain, steps: int, rng: np.random.Generator) -> list[tuple]:
    """Scores of ``init`` and of every state along ``steps`` raw chain steps."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    trace = [tuple(score(init))]
    if steps:
        trace.extend(tuple(score(s)) for s in chain(init, steps, rng))
    return trace


class MonotonicityMonitor:
    """Callback that checks archive snapshots as a run progresses.

    Between consecutive snapshots every score vector must still be present
    or be strictly dominated by a vector in the newer snapshot, and each
    snapshot must be an antichain. Violations are counted, not raised.
    """

    def __init__(self):
        self.previous: np.ndarray | None = None
        self.snapshots = 0
        self.violations = 0

    def __call__(self, burst: int, archive: FrontierArchive) -> None:
        cur = archive.score_array()
        if len(cur) and not all_pairs_nondominated(cur).all():
            self.violations += 1
        if self.previous is not None:
            for v in self.previous:
                present = np.any(np.all(cur == v, axis=1))
                beaten = np.any(np.all(cur >= v, axis=1) & np.any(cur > v, axis=1))
                if not (present or beaten):
                    self.violations += 1
        self.previous = cur
        self.snapshots += 1
