"""Baseline and time-sliced inference of each query node's direct superior.

The baseline ranks candidates with a single Rooted-PageRank run over the whole
observation span.  The time-sliced methods run one Rooted-PageRank per slot in
which the query is active and aggregate the per-slot rankings either by top-p
voting or by modal rank position.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InvalidThreshold, QueryIsolated, RootInactive
from .graph import (Granularity, NodeTable, Snapshot, TemporalEdgeList, Weighting, build_snapshot,
                    build_snapshots, full_span_slot, slice_timeline)
from .rpr import RankedList, RprParams, rank_scores, rooted_pagerank

__all__ = [
    "DEFAULT_P",
    "Method",
    "QuerySet",
    "VotingTally",
    "InferenceResult",
    "baseline_rank",
    "timeslice_rank",
    "modal_position_rank",
    "slot_rankings",
    "run_method",
]

DEFAULT_P = 3
FULL_SPAN_TAG = "full-span"


class Method(enum.Enum):
    BASELINE = "baseline"
    TIME_VOTING = "time-voting"
    TIME_MODAL_POSITION = "modal-position"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, Method):
            return value
        return cls(str(value).lower())


class QuerySet(tuple):
    """Ordered, duplicate-free tuple of node ids known to ``nodes``."""

    def __new__(cls, queries: Iterable[int], nodes: NodeTable):
        queries = tuple(int(q) for q in queries)
        dupes = sorted(q for q, c in Counter(queries).items() if c > 1)
        if dupes:
            raise ValueError(f"duplicate queries: {dupes}")
        unknown = [q for q in queries if not 0 <= q < len(nodes)]
        if unknown:
            raise ValueError(f"queries not in node table: {unknown}")
        return super().__new__(cls, queries)


@dataclass(frozen=True)
class VotingTally:
    query: int
    p: int
    votes: dict[int, int]
    slots_participated: int
    slots_total: int
    mean_position: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class InferenceResult:
    """Ranked candidate superiors for one query.

    ``ranking`` holds ``(candidate, score)`` pairs, best first.  The score is
    the Rooted-PageRank value for the baseline, the vote count for
    time-voting and the modal position for modal-position aggregation.
    """

    query: int
    ranking: tuple[tuple[int, float], ...]
    method: Method
    weighting: Weighting
    granularity: str
    tally: VotingTally | None = None

    @property
    def order(self) -> list[int]:
        return [node for node, _ in self.ranking]

    def position(self, node: int) -> int | None:
        for pos, (candidate, _) in enumerate(self.ranking, start=1):
            if candidate == node:
                return pos
        return None


def baseline_rank(edges: TemporalEdgeList, query: int, weighting: Weighting,
                  params: RprParams | None = None, *, snapshot: Snapshot | None = None) -> InferenceResult:
    """Rank candidates by Rooted-PageRank from ``query`` over the full-span graph."""
    weighting = Weighting.parse(weighting)
    if snapshot is None:
        snapshot = build_snapshot(edges, full_span_slot(edges), weighting)
    try:
        ranked = rank_scores(rooted_pagerank(snapshot, query, params))
    except RootInactive as exc:
        raise QueryIsolated(f"query {query} has no interactions") from exc
    return InferenceResult(query, ranked.entries, Method.BASELINE, weighting, FULL_SPAN_TAG)


def slot_rankings(snapshots: Sequence[Snapshot], query: int, params: RprParams | None = None,
                  cache: dict | None = None) -> list[RankedList]:
    """Ranked list of ``query`` for every snapshot in which it is active.

    ``cache`` (any dict) memoises lists per ``(snapshot, query, params)`` so
    that several aggregators over the same snapshots solve each slot once.
    """
    params = params or RprParams()
    lists = []
    for snapshot in snapshots:
        if snapshot.local(query) is None:
            continue
        key = (snapshot, query, params)
        ranked = cache.get(key) if cache is not None else None
        if ranked is None:
            ranked = rank_scores(rooted_pagerank(snapshot, query, params))
            if cache is not None:
                cache[key] = ranked
        lists.append(ranked)
    if not lists:
        raise QueryIsolated(f"query {query} is not active in any of {len(snapshots)} slots")
    return lists


def _snapshots_for(edges, granularity, weighting, snapshots):
    if snapshots is not None:
        return snapshots
    return build_snapshots(edges, slice_timeline(edges, granularity), weighting)


def timeslice_rank(edges: TemporalEdgeList, query: int, granularity: Granularity,
                   weighting: Weighting, p: int = DEFAULT_P, params: RprParams | None = None, *,
                   snapshots: Sequence[Snapshot] | None = None, cache: dict | None = None) -> InferenceResult:
    """Top-p voting over per-slot rankings.

    A candidate earns one vote for every slot where it sits within the first
    ``p`` positions of the query's ranked list.  Candidates are ordered by
    votes (descending), mean position over the slots where they were ranked
    (ascending), then node id.  Slots without the query are skipped.
    """
    if int(p) != p or p < 1:
        raise InvalidThreshold(f"p must be a positive integer, got {p}")
    granularity = Granularity.parse(granularity)
    weighting = Weighting.parse(weighting)
    snapshots = _snapshots_for(edges, granularity, weighting, snapshots)
    lists = slot_rankings(snapshots, query, params, cache)

    votes: Counter = Counter()
    position_sum: Counter = Counter()
    appearances: Counter = Counter()
    for ranked in lists:
        for pos, (node, _) in enumerate(ranked.entries, start=1):
            position_sum[node] += pos
            appearances[node] += 1
            if pos <= p:
                votes[node] += 1

    mean_position = {node: position_sum[node] / appearances[node] for node in appearances}
    order = sorted(appearances, key=lambda u: (-votes[u], mean_position[u], u))
    tally = VotingTally(query, int(p), {u: votes[u] for u in order}, len(lists), len(snapshots),
                        mean_position)
    return InferenceResult(query, tuple((u, float(votes[u])) for u in order),
                           Method.TIME_VOTING, weighting, granularity.tag, tally)


def modal_position_rank(edges: TemporalEdgeList, query: int, granularity: Granularity,
                        weighting: Weighting, params: RprParams | None = None, *,
                        snapshots: Sequence[Snapshot] | None = None, cache: dict | None = None) -> InferenceResult:
    """Order candidates by their most frequent position across slots.

    When several positions are equally frequent the best (smallest) one is the
    mode.  Ties between candidates go to the higher frequency of the modal
    position, then to the smaller node id.
    """
    granularity = Granularity.parse(granularity)
    weighting = Weighting.parse(weighting)
    snapshots = _snapshots_for(edges, granularity, weighting, snapshots)
    lists = slot_rankings(snapshots, query, params, cache)

    positions: dict[int, Counter] = {}
    for ranked in lists:
        for pos, (node, _) in enumerate(ranked.entries, start=1):
            positions.setdefault(node, Counter())[pos] += 1

    modes = {}
    for node, counts in positions.items():
        modal, freq = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        modes[node] = (modal, freq)
    order = sorted(modes, key=lambda u: (modes[u][0], -modes[u][1], u))
    return InferenceResult(query, tuple((u, float(modes[u][0])) for u in order),
                           Method.TIME_MODAL_POSITION, weighting, granularity.tag)


def run_method(method: Method, edges: TemporalEdgeList, query: int, *, weighting: Weighting,
               granularity: Granularity | None = None, p: int = DEFAULT_P,
               params: RprParams | None = None, snapshots=None, cache: dict | None = None) -> InferenceResult:
    """Dispatch to the ranking function for ``method``.

    ``snapshots`` is the prepared full-span snapshot for the baseline, or the
    per-slot snapshot list for the time-sliced methods.
    """
    method = Method.parse(method)
    if method is Method.BASELINE:
        return baseline_rank(edges, query, weighting, params, snapshot=snapshots)
    if granularity is None:
        raise ValueError(f"{method.value} needs a granularity")
    if method is Method.TIME_VOTING:
        return timeslice_rank(edges, query, granularity, weighting, p, params, snapshots=snapshots, cache=cache)
    return modal_position_rank(edges, query, granularity, weighting, params, snapshots=snapshots, cache=cache)
