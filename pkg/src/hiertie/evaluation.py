"""Recall-at-rank evaluation of inference results against known superiors."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import IncomparableCurves, MissingTruth
from .graph import NodeTable
from .pipeline import InferenceResult

__all__ = [
    "GroundTruth",
    "RecallCurve",
    "ComparisonTable",
    "recall_curve",
    "compare_methods",
    "curve_to_csv",
    "curves_to_json",
    "format_recall",
]


class GroundTruth(Mapping[int, int]):
    """Mapping from a subordinate's node id to its direct superior's id."""

    def __init__(self, ties: Mapping[int, int] | Iterable[tuple[int, int]], nodes: NodeTable | None = None):
        ties = dict(ties)
        selfs = sorted(u for u, v in ties.items() if u == v)
        if selfs:
            raise ValueError(f"nodes listed as their own superior: {selfs}")
        if nodes is not None:
            bad = sorted({x for pair in ties.items() for x in pair if not 0 <= x < len(nodes)})
            if bad:
                raise ValueError(f"ground truth references unknown node ids: {bad}")
        self._ties = dict(sorted(ties.items()))
        self.nodes = nodes

    def __getitem__(self, node):
        return self._ties[node]

    def __iter__(self):
        return iter(self._ties)

    def __len__(self):
        return len(self._ties)

    def __repr__(self):
        return f"GroundTruth({len(self)} ties)"

    @property
    def subordinates(self) -> list[int]:
        return list(self._ties)


def format_recall(value: float) -> str:
    return f"{value:.6f}"


@dataclass(frozen=True)
class RecallCurve:
    """Recall at ranks ``1..max_rank``; ``points`` are ``(rank, recall)`` pairs."""

    method: str
    points: tuple[tuple[int, float], ...]
    n_queries: int
    queries: frozenset[int]

    @property
    def max_rank(self) -> int:
        return len(self.points)

    def recall(self, rank: int) -> float:
        return self.points[rank - 1][1]

    @property
    def aurc(self) -> float:
        """Area under the recall curve normalised to [0, 1] (mean recall over ranks)."""
        return sum(r for _, r in self.points) / len(self.points)


def recall_curve(results: Sequence[InferenceResult], truth: Mapping[int, int], max_rank: int = 10,
                 method: str | None = None) -> RecallCurve:
    """Fraction of queries whose true superior sits at position ``<= i``, for each rank ``i``.

    Queries whose superior never shows up in their ranking count as misses at
    every rank.
    """
    if max_rank < 1:
        raise ValueError(f"max_rank must be >= 1, got {max_rank}")
    missing = sorted({r.query for r in results if r.query not in truth})
    if missing:
        raise MissingTruth(missing)
    if method is None:
        method = results[0].method.value if results else "unknown"

    hits_at = [0] * (max_rank + 1)
    for result in results:
        pos = result.position(truth[result.query])
        if pos is not None and pos <= max_rank:
            hits_at[pos] += 1
    n = len(results)
    points, cumulative = [], 0
    for i in range(1, max_rank + 1):
        cumulative += hits_at[i]
        points.append((i, cumulative / n if n else 0.0))
    return RecallCurve(method, tuple(points), n, frozenset(r.query for r in results))


@dataclass(frozen=True)
class ComparisonTable:
    """Per-rank recall of several methods side by side, with deltas to the first one."""

    methods: tuple[str, ...]
    ranks: tuple[int, ...]
    recall: dict[str, tuple[float, ...]]
    delta: dict[str, tuple[float, ...]]
    aurc: dict[str, float]

    def to_csv(self) -> str:
        reference = self.methods[0]
        others = self.methods[1:]
        header = ["rank", *self.methods, *(f"delta_{m}_vs_{reference}" for m in others)]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for k, rank in enumerate(self.ranks):
            writer.writerow([rank, *(format_recall(self.recall[m][k]) for m in self.methods),
                             *(format_recall(self.delta[m][k]) for m in others)])
        writer.writerow(["AURC", *(format_recall(self.aurc[m]) for m in self.methods),
                         *(format_recall(self.aurc[m] - self.aurc[reference]) for m in others)])
        return buf.getvalue()


def compare_methods(curves: Sequence[RecallCurve]) -> ComparisonTable:
    if not curves:
        raise ValueError("nothing to compare")
    reference = curves[0]
    for curve in curves[1:]:
        if curve.queries != reference.queries:
            raise IncomparableCurves(f"{curve.method!r} was computed over a different query set "
                                     f"than {reference.method!r}")
        if curve.max_rank != reference.max_rank:
            raise IncomparableCurves(f"{curve.method!r} has max_rank {curve.max_rank}, "
                                     f"expected {reference.max_rank}")
    names = [c.method for c in curves]
    if len(set(names)) != len(names):
        raise IncomparableCurves(f"duplicate method tags: {names}")
    recall = {c.method: tuple(r for _, r in c.points) for c in curves}
    base = recall[reference.method]
    delta = {m: tuple(a - b for a, b in zip(vals, base)) for m, vals in recall.items()}
    return ComparisonTable(tuple(names), tuple(i for i, _ in reference.points), recall, delta,
                           {c.method: c.aurc for c in curves})


def curve_to_csv(curve: RecallCurve) -> str:
    lines = ["rank,recall"]
    lines += [f"{i},{format_recall(r)}" for i, r in curve.points]
    return "\n".join(lines) + "\n"


def curves_to_json(curves: Sequence[RecallCurve]) -> str:
    """Method-keyed arrays of ``[rank, recall]`` with recall printed to 6 decimals."""
    # hand-rolled so that every recall keeps exactly six decimals
    blocks = []
    for curve in curves:
        pairs = ", ".join(f"[{i}, {format_recall(r)}]" for i, r in curve.points)
        blocks.append(f"  {json.dumps(curve.method)}: [{pairs}]")
    return "{\n" + ",\n".join(blocks) + "\n}\n"
