"""Frontier JSON, score-trace CSV and manifest writers.

Output is byte-stable: fixed key order, ``repr`` floats, ``\\n`` line endings.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .engine import ArchiveEntry, FrontierArchive
from .graph import Plan


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def archive_to_json(archive: FrontierArchive, config: dict) -> dict:
    entries = []
    for e in archive.entries:
        item = {"scores": list(e.scores), "burst_found": e.burst_found}
        if isinstance(e.state, Plan):
            item["assignment"] = e.state.assignment.tolist()
        entries.append(item)
    return {"config": config, "entries": entries}


def archive_from_json(data: dict) -> FrontierArchive:
    entries = data["entries"]
    J = len(entries[0]["scores"]) if entries else int(data["config"]["J"])
    archive = FrontierArchive(J)
    for item in entries:
        m = max(item["assignment"])
        archive.entries.append(ArchiveEntry(Plan(np.array(item["assignment"]), m), tuple(item["scores"]), item["burst_found"]))
    return archive


def read_frontier(path) -> FrontierArchive:
    with open(path, encoding="utf-8") as fh:
        return archive_from_json(json.load(fh))


def write_score_csv(path, index_name: str, rows: Iterable[tuple[int, Sequence[float]]], J: int) -> None:
    """Write ``index,score_1,...,score_J`` rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([index_name] + [f"score_{j}" for j in range(1, J + 1)])
        for idx, scores in rows:
            w.writerow([idx] + [repr(float(s)) for s in scores])


def read_score_csv(path) -> tuple[list[int], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader]
    idx = [int(r[0]) for r in rows]
    scores = np.array([[float(x) for x in r[1:]] for r in rows], dtype=np.float64).reshape(len(rows), len(header) - 1)
    return idx, scores


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])
