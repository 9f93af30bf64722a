"""Temporal interaction log, time slicing and per-slot graph snapshots.

A :class:`TemporalEdgeList` holds every recorded interaction with its date and
count.  :func:`slice_timeline` partitions its span into time slots and
:func:`build_snapshot` turns one slot into an immutable :class:`Snapshot` in
compressed (CSR) adjacency form, ready for ranking.
"""

from __future__ import annotations

import datetime as dt
import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySpan, TooManySlots

__all__ = [
    "NodeTable",
    "TemporalEdge",
    "TemporalEdgeList",
    "TimeSlot",
    "Weighting",
    "Granularity",
    "Snapshot",
    "slice_timeline",
    "full_span_slot",
    "build_snapshot",
    "build_snapshots",
]


class NodeTable:
    """Bijection between external labels and dense ids ``0..n-1``.

    Ids follow the sorted order of the labels, so the same set of labels
    always yields the same ids regardless of the order rows were read in.
    """

    def __init__(self, labels: Iterable[str]):
        self._labels = tuple(sorted(set(labels)))
        self._ids = {label: i for i, label in enumerate(self._labels)}

    def __len__(self):
        return len(self._labels)

    def __contains__(self, label):
        return label in self._ids

    def __eq__(self, other):
        return isinstance(other, NodeTable) and self._labels == other._labels

    def __hash__(self):
        return hash(self._labels)

    def __repr__(self):
        return f"NodeTable(n={len(self)})"

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    def id(self, label: str) -> int:
        return self._ids[label]

    def label(self, node: int) -> str:
        return self._labels[node]

    def get(self, label, default=None):
        return self._ids.get(label, default)


@dataclass(frozen=True, order=True)
class TemporalEdge:
    timestamp: dt.date
    src: int
    dst: int
    count: int = 1


class TemporalEdgeList:
    """The full interaction log: nodes, dated edges, direction and span.

    Edges with the same ``(src, dst, timestamp)`` are merged by summing their
    counts.  For undirected lists each edge is stored once with
    ``src <= dst``.  Edges are kept sorted by ``(timestamp, src, dst)``.
    """

    def __init__(self, nodes: NodeTable, edges: Iterable[TemporalEdge], directed: bool,
                 span: tuple[dt.date, dt.date] | None = None):
        self.nodes = nodes
        self.directed = bool(directed)
        merged: dict[tuple, int] = {}
        n = len(nodes)
        for e in edges:
            if e.count < 1:
                raise ValueError(f"edge count must be >= 1, got {e.count}")
            if not (0 <= e.src < n and 0 <= e.dst < n):
                raise ValueError(f"edge endpoint out of range: {e}")
            src, dst = e.src, e.dst
            if not self.directed and src > dst:
                src, dst = dst, src
            key = (e.timestamp, src, dst)
            merged[key] = merged.get(key, 0) + int(e.count)
        self.edges: tuple[TemporalEdge, ...] = tuple(
            TemporalEdge(t, s, d, c) for (t, s, d), c in sorted(merged.items()))

        if span is None and self.edges:
            span = (self.edges[0].timestamp, self.edges[-1].timestamp)
        if span is not None:
            start, end = span
            if start > end:
                raise ValueError(f"span start {start} is after end {end}")
            if self.edges and (self.edges[0].timestamp < start or self.edges[-1].timestamp > end):
                raise ValueError("span does not cover every edge timestamp")
        self.span = span

        self._src = np.fromiter((e.src for e in self.edges), dtype=np.int64, count=len(self.edges))
        self._dst = np.fromiter((e.dst for e in self.edges), dtype=np.int64, count=len(self.edges))
        self._day = np.fromiter((e.timestamp.toordinal() for e in self.edges),
                                dtype=np.int64, count=len(self.edges))
        self._count = np.fromiter((e.count for e in self.edges), dtype=np.int64, count=len(self.edges))

    @classmethod
    def from_records(cls, records: Iterable[tuple[str, str, dt.date, int]], directed: bool,
                     span=None) -> "TemporalEdgeList":
        """Build from ``(src_label, dst_label, date, count)`` tuples."""
        records = list(records)
        nodes = NodeTable(label for r in records for label in (r[0], r[1]))
        edges = [TemporalEdge(date, nodes.id(s), nodes.id(d), count) for s, d, date, count in records]
        return cls(nodes, edges, directed, span)

    def __len__(self):
        return len(self.edges)

    def __eq__(self, other):
        if not isinstance(other, TemporalEdgeList):
            return NotImplemented
        return (self.nodes == other.nodes and self.directed == other.directed
                and self.span == other.span and self.edges == other.edges)

    def __repr__(self):
        return (f"TemporalEdgeList(n_nodes={len(self.nodes)}, n_edges={len(self.edges)}, "
                f"directed={self.directed}, span={self.span})")

    @property
    def total_count(self) -> int:
        return int(self._count.sum())

    def reversed(self) -> "TemporalEdgeList":
        """Same log with every directed edge flipped; undirected lists are returned as is."""
        if not self.directed:
            return self
        return TemporalEdgeList(
            self.nodes, (TemporalEdge(e.timestamp, e.dst, e.src, e.count) for e in self.edges),
            True, self.span)


@dataclass(frozen=True)
class TimeSlot:
    """Half-open date interval ``[begin, end)``.  ``index == -1`` marks the full span."""

    index: int
    begin: dt.date
    end: dt.date

    @property
    def days(self) -> int:
        return (self.end - self.begin).days

    def contains(self, day: dt.date) -> bool:
        return self.begin <= day < self.end


class Weighting(enum.Enum):
    UNWEIGHTED = "unweighted"
    WEIGHTED = "weighted"

    @classmethod
    def parse(cls, value) -> "Weighting":
        if isinstance(value, Weighting):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class Granularity:
    """Slot size: calendar ``week``/``month``/``year`` or ``fixed`` with ``count`` equal slots."""

    kind: str
    count: int | None = None

    KINDS = ("week", "month", "year", "fixed")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown granularity {self.kind!r}")
        if self.kind == "fixed":
            if self.count is None or self.count < 1:
                raise ValueError("fixed granularity needs a slot count >= 1")
        elif self.count is not None:
            raise ValueError(f"{self.kind} granularity takes no slot count")

    @classmethod
    def week(cls):
        return cls("week")

    @classmethod
    def month(cls):
        return cls("month")

    @classmethod
    def year(cls):
        return cls("year")

    @classmethod
    def fixed(cls, m: int):
        return cls("fixed", int(m))

    @classmethod
    def parse(cls, text) -> "Granularity":
        """Parse ``week``, ``month``, ``year`` or ``fixed:M``."""
        if isinstance(text, Granularity):
            return text
        text = str(text).strip().lower()
        if text.startswith("fixed"):
            _, _, m = text.partition(":")
            try:
                return cls.fixed(int(m))
            except ValueError:
                raise ValueError(f"bad fixed granularity {text!r}, expected fixed:M") from None
        return cls(text)

    @property
    def tag(self) -> str:
        return f"fixed:{self.count}" if self.kind == "fixed" else self.kind


def _add_month(day: dt.date) -> dt.date:
    if day.month == 12:
        return day.replace(year=day.year + 1, month=1)
    return day.replace(month=day.month + 1)


def slice_timeline(edges: TemporalEdgeList, granularity: Granularity) -> list[TimeSlot]:
    """Partition the span of ``edges`` into ordered, contiguous, half-open slots.

    Calendar granularities snap to ISO week (Monday), month and year starts,
    so the first and last slots may reach outside the span.  ``fixed:M``
    splits the span into M slots of ``days // M`` days each, the last slot
    absorbing the remainder.
    """
    if not edges.edges or edges.span is None:
        raise EmptySpan("edge list is empty; nothing to slice")
    granularity = Granularity.parse(granularity)
    start, last = edges.span
    stop = last + dt.timedelta(days=1)

    if granularity.kind == "fixed":
        m = granularity.count
        n_days = (stop - start).days
        if m > n_days:
            raise TooManySlots(f"{m} slots requested for a span of {n_days} day(s)")
        width = n_days // m
        bounds = [start + dt.timedelta(days=k * width) for k in range(m)] + [stop]
    else:
        if granularity.kind == "week":
            cursor = start - dt.timedelta(days=start.weekday())
            step = lambda d: d + dt.timedelta(days=7)  # noqa: E731
        elif granularity.kind == "month":
            cursor = start.replace(day=1)
            step = _add_month
        else:
            cursor = dt.date(start.year, 1, 1)
            step = lambda d: d.replace(year=d.year + 1)  # noqa: E731
        bounds = [cursor]
        while bounds[-1] < stop:
            bounds.append(step(bounds[-1]))

    return [TimeSlot(k, bounds[k], bounds[k + 1]) for k in range(len(bounds) - 1)]


def full_span_slot(edges: TemporalEdgeList) -> TimeSlot:
    """Sentinel slot covering the whole span (used by the baseline ranking)."""
    if not edges.edges or edges.span is None:
        raise EmptySpan("edge list is empty")
    start, last = edges.span
    return TimeSlot(-1, start, last + dt.timedelta(days=1))


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Immutable graph of the interactions inside one slot.

    Only active nodes are stored.  ``nodes[i]`` is the global id of local node
    ``i``; the out-neighbours of local node ``i`` are
    ``indices[indptr[i]:indptr[i+1]]`` (local ids, ascending) with matching
    ``weights``.  Undirected snapshots store each edge in both rows.
    """

    slot: TimeSlot
    directed: bool
    weighting: Weighting
    nodes: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {int(g): i for i, g in enumerate(self.nodes)})

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_entries(self) -> int:
        """Number of stored adjacency entries."""
        return len(self.indices)

    @property
    def n_edges(self) -> int:
        return self.n_entries if self.directed else self.n_entries // 2

    @property
    def is_empty(self) -> bool:
        return self.n_entries == 0

    @cached_property
    def active_nodes(self) -> frozenset[int]:
        return frozenset(int(g) for g in self.nodes)

    def local(self, node: int) -> int | None:
        return self._index.get(int(node))

    def neighbors(self, node: int) -> dict[int, float]:
        """Global-id out-neighbours of ``node`` with their weights."""
        i = self._index.get(int(node))
        if i is None:
            return {}
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return {int(self.nodes[j]): float(w) for j, w in zip(self.indices[lo:hi], self.weights[lo:hi])}

    def edge_items(self) -> list[tuple[int, int, float]]:
        """All stored ``(src, dst, weight)`` entries in global ids."""
        rows = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        return [(int(self.nodes[r]), int(self.nodes[c]), float(w))
                for r, c, w in zip(rows, self.indices, self.weights)]

    def total_weight(self) -> float:
        """Sum of edge weights, counting each undirected edge once."""
        total = float(self.weights.sum())
        return total if self.directed else total / 2.0

    def scaled(self, factor: float) -> "Snapshot":
        """Copy with every weight multiplied by ``factor``."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return Snapshot(self.slot, self.directed, self.weighting, self.nodes, self.indptr,
                        self.indices, self.weights * factor)


def build_snapshot(edges: TemporalEdgeList, slot: TimeSlot, weighting: Weighting) -> Snapshot:
    """Collect the edges dated inside ``slot`` into a :class:`Snapshot`.

    Self-loops are dropped.  Weighted snapshots sum interaction counts per
    node pair; unweighted ones record weight 1 for any pair that interacted.
    """
    weighting = Weighting.parse(weighting)
    day = edges._day
    mask = (day >= slot.begin.toordinal()) & (day < slot.end.toordinal()) & (edges._src != edges._dst)
    src, dst, count = edges._src[mask], edges._dst[mask], edges._count[mask]
    if not edges.directed:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
        count = np.concatenate([count, count])

    active = np.unique(np.concatenate([src, dst]))
    if active.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return Snapshot(slot, edges.directed, weighting, empty, np.zeros(1, dtype=np.int64),
                        empty, np.zeros(0, dtype=np.float64))

    lsrc = np.searchsorted(active, src)
    ldst = np.searchsorted(active, dst)
    n = active.size
    keys, inverse = np.unique(lsrc * n + ldst, return_inverse=True)
    summed = np.bincount(inverse, weights=count.astype(np.float64))
    rows, cols = keys // n, keys % n
    weights = summed if weighting is Weighting.WEIGHTED else np.ones_like(summed)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return Snapshot(slot, edges.directed, weighting, active, indptr, cols.astype(np.int64), weights)


def build_snapshots(edges: TemporalEdgeList, slots: Sequence[TimeSlot],
                    weighting: Weighting) -> list[Snapshot]:
    return [build_snapshot(edges, slot, weighting) for slot in slots]
