"""Rooted-PageRank on a snapshot and deterministic ranking of its scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyGraph, RootInactive
from .graph import Snapshot

__all__ = ["RprParams", "ScoreVector", "RankedList", "rooted_pagerank", "rank_scores"]


@dataclass(frozen=True)
class RprParams:
    damping: float = 0.85
    tolerance: float = 1e-9
    max_iterations: int = 200

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ValueError(f"damping must lie in (0, 1), got {self.damping}")
        if not self.tolerance > 0.0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be a positive integer, got {self.max_iterations}")


@dataclass(frozen=True)
class ScoreVector:
    """Stationary visit probabilities of a walk restarting at ``root``.

    ``nodes`` are global ids (ascending) of the snapshot's active nodes and
    ``values`` their scores; the root is included.
    """

    root: int
    nodes: np.ndarray
    values: np.ndarray
    converged: bool
    iterations_used: int

    @property
    def scores(self) -> dict[int, float]:
        return {int(n): float(v) for n, v in zip(self.nodes, self.values)}

    def __getitem__(self, node: int) -> float:
        i = int(np.searchsorted(self.nodes, node))
        if i >= len(self.nodes) or self.nodes[i] != node:
            raise KeyError(node)
        return float(self.values[i])


@dataclass(frozen=True)
class RankedList:
    """Candidates for ``root`` sorted by score (descending), ties by ascending id."""

    root: int
    entries: tuple[tuple[int, float], ...]

    def __len__(self):
        return len(self.entries)

    @property
    def order(self) -> list[int]:
        return [node for node, _ in self.entries]

    def positions(self) -> dict[int, int]:
        """Map candidate id to its 1-based position."""
        return {node: pos for pos, (node, _) in enumerate(self.entries, start=1)}


class _Transition:
    # Row-normalised transition structure of a snapshot, cached on the snapshot object.
    __slots__ = ("rows", "cols", "probs", "dangling", "n")

    def __init__(self, snapshot: Snapshot):
        n = snapshot.n_nodes
        degree = np.diff(snapshot.indptr)
        self.rows = np.repeat(np.arange(n), degree)
        self.cols = snapshot.indices
        totals = np.bincount(self.rows, weights=snapshot.weights, minlength=n)
        self.probs = snapshot.weights / totals[self.rows]
        self.dangling = np.flatnonzero(degree == 0)
        self.n = n


def _transition(snapshot: Snapshot) -> _Transition:
    cached = snapshot.__dict__.get("_rpr_transition")
    if cached is None:
        cached = _Transition(snapshot)
        snapshot.__dict__["_rpr_transition"] = cached
    return cached


def rooted_pagerank(snapshot: Snapshot, root: int, params: RprParams | None = None) -> ScoreVector:
    """Power iteration for the walk that restarts at ``root``.

    At each step the walker jumps back to the root with probability
    ``1 - damping`` and otherwise follows an out-edge chosen proportionally to
    its weight.  Nodes without out-edges send all their mass to the root.
    Stops once the L1 change between iterates drops below ``tolerance``.
    """
    params = params or RprParams()
    if snapshot.is_empty:
        raise EmptyGraph("snapshot has no edges")
    r = snapshot.local(root)
    if r is None:
        raise RootInactive(f"node {root} is not active in slot {snapshot.slot.index}")

    t = _transition(snapshot)
    d = params.damping
    x = np.zeros(t.n)
    x[r] = 1.0
    converged = False
    iterations = 0
    for iterations in range(1, params.max_iterations + 1):
        nxt = d * np.bincount(t.cols, weights=x[t.rows] * t.probs, minlength=t.n)
        nxt[r] += (1.0 - d) + d * x[t.dangling].sum()
        delta = np.abs(nxt - x).sum()
        x = nxt
        if delta < params.tolerance:
            converged = True
            break
    return ScoreVector(int(root), snapshot.nodes, x, converged, iterations)


def rank_scores(scores: ScoreVector) -> RankedList:
    """Drop the root and sort by ``(score descending, node id ascending)``."""
    keep = scores.nodes != scores.root
    nodes, values = scores.nodes[keep], scores.values[keep]
    # lexsort: last key is primary
    order = np.lexsort((nodes, -values))
    return RankedList(scores.root, tuple((int(nodes[i]), float(values[i])) for i in order))
