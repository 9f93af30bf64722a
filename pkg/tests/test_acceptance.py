"""Acceptance suite: one group of tests per criterion, each tagged with ``criterion(n)``.

Expected values come from the independent oracles in ``oracle.py`` (dense
linear solves and brute-force tallies over raw records), never from the code
under test.  A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import datetime as dt
import json
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph_records
from hiertie import (EdgeFileSchema, GroundTruth, InferenceResult, Method, RprParams, SynthParams,
                     TemporalEdgeList, Weighting, baseline_rank, build_snapshot, build_snapshots,
                     full_span_slot, generate_synthetic, modal_position_rank, recall_curve, rooted_pagerank,
                     slice_timeline, timeslice_rank, write_edges, write_ground_truth)
from hiertie.cli import main
from oracle import brute_force_recall, brute_force_vote, dense_rpr, monday_week, slot_graphs

SEED = 7_2024


def raw_records(edges: TemporalEdgeList):
    label = edges.nodes.label
    return [(label(e.src), label(e.dst), e.timestamp, e.count) for e in edges.edges]


def labelled(edges, ids):
    return [edges.nodes.label(u) for u in ids]


# --- criterion 1 ---------------------------------------------------------------------------

@pytest.mark.criterion(1)
def test_solver_matches_dense_oracle():
    rng = np.random.default_rng(SEED)
    solver_seconds, worst = 0.0, 0.0
    for _ in range(100):
        n = int(rng.integers(2, 51))
        records = random_graph_records(rng, n, int(rng.integers(n, 4 * n + 1)), max_count=9)
        if all(u == v for u, v, _, _ in records):
            records.append(("v00", "v01", records[0][2], 1))
        t0 = time.perf_counter()
        edges = TemporalEdgeList.from_records(records, directed=True)
        snap = build_snapshot(edges, full_span_slot(edges), Weighting.WEIGHTED)
        root = int(snap.nodes[rng.integers(snap.n_nodes)])
        got = rooted_pagerank(snap, root)
        solver_seconds += time.perf_counter() - t0

        graph = slot_graphs(records, True, lambda day: 0, weighted=True)[0]
        expected = dense_rpr(graph, edges.nodes.label(root))
        assert got.converged
        assert sorted(labelled(edges, got.nodes)) == sorted(expected)
        for node, value in got.scores.items():
            worst = max(worst, abs(value - expected[edges.nodes.label(node)]))
    assert worst <= 1e-7, f"largest component error {worst:.3e}"
    assert solver_seconds < 10.0, f"solver took {solver_seconds:.2f}s"


# --- criterion 2 ---------------------------------------------------------------------------

def _normalization_graphs():
    rng = np.random.default_rng(SEED + 2)
    fixed = {
        "single-edge": [("a", "b")],
        "star": [("hub", f"s{i}") for i in range(6)],
        "chain": [("a", "b"), ("b", "c"), ("c", "d")],
        "cycle": [("a", "b"), ("b", "c"), ("c", "a")],
        "two-components": [("a", "b"), ("b", "a"), ("c", "d")],
        "heavy-edge": [("a", "b", 1000), ("a", "c", 1), ("c", "a", 1)],
    }
    day = dt.date(2001, 1, 1)
    graphs = {name: [(r[0], r[1], day, r[2] if len(r) > 2 else 1) for r in recs] for name, recs in fixed.items()}
    for k in range(8):
        graphs[f"random-{k}"] = random_graph_records(rng, int(rng.integers(3, 30)), 60, max_count=6)
    return graphs


@pytest.mark.criterion(2)
@pytest.mark.parametrize("damping", [0.05, 0.5, 0.85, 0.99])
@pytest.mark.parametrize("weighting", list(Weighting))
@pytest.mark.parametrize("directed", [True, False], ids=["directed", "undirected"])
def test_score_vectors_normalized(directed, weighting, damping):
    params = RprParams(damping=damping, max_iterations=5000)
    for name, records in _normalization_graphs().items():
        edges = TemporalEdgeList.from_records(records, directed=directed)
        snap = build_snapshot(edges, full_span_slot(edges), weighting)
        for root in snap.nodes:
            sv = rooted_pagerank(snap, int(root), params)
            assert abs(sv.values.sum() - 1.0) <= 1e-8, (name, int(root))
            assert (sv.values >= 0).all(), (name, int(root))


@pytest.mark.criterion(2)
@pytest.mark.parametrize("weighting", list(Weighting))
def test_pipeline_score_vectors_normalized(weighting):
    edges, truth = generate_synthetic(SynthParams(seed=3))
    snaps = build_snapshots(edges, slice_timeline(edges, "week"), weighting)
    snaps.append(build_snapshot(edges, full_span_slot(edges), weighting))
    checked = 0
    for snap in snaps:
        for root in list(truth)[::7] + sorted(set(truth.values())):
            if snap.local(root) is None:
                continue
            sv = rooted_pagerank(snap, root)
            assert abs(sv.values.sum() - 1.0) <= 1e-8
            assert (sv.values >= 0).all()
            checked += 1
    assert checked > 100


# --- criterion 3 ---------------------------------------------------------------------------

@pytest.mark.criterion(3)
@pytest.mark.parametrize("weighting", list(Weighting))
def test_single_slot_degeneracy(weighting):
    rng = np.random.default_rng(SEED + 3)
    for _ in range(50):
        n = int(rng.integers(3, 40))
        records = random_graph_records(rng, n, 3 * n, max_count=5)
        edges = TemporalEdgeList.from_records(records, directed=bool(rng.integers(2)))
        snap = build_snapshot(edges, full_span_slot(edges), weighting)
        query = int(snap.nodes[rng.integers(snap.n_nodes)])
        p = len(edges.nodes) + int(rng.integers(3))
        base = baseline_rank(edges, query, weighting).order
        voted = timeslice_rank(edges, query, "year", weighting, p=p).order
        modal = modal_position_rank(edges, query, "year", weighting).order
        assert base == voted == modal


# --- criterion 4 ---------------------------------------------------------------------------

ORG = SynthParams(seed=42, managers=10, reports_per_manager=5, slots=12, hierarchy_rate=0.9, noise_rate=0.2)


@pytest.fixture(scope="module")
def org():
    return generate_synthetic(ORG)


def _oracle_voting_recall(edges, truth, weighted, p=3, max_rank=10):
    records = raw_records(edges)
    graphs = slot_graphs(records, edges.directed, monday_week(edges.span[0]), weighted)
    label = edges.nodes.label
    orderings = {label(q): brute_force_vote(graphs, label(q), p) for q in truth}
    return brute_force_recall(orderings, {label(q): label(s) for q, s in truth.items()}, max_rank)


@pytest.mark.criterion(4)
@pytest.mark.parametrize("weighting", list(Weighting))
def test_time_voting_beats_baseline(org, weighting):
    edges, truth = org
    t0 = time.perf_counter()
    voting = recall_curve([timeslice_rank(edges, q, "week", weighting, p=3) for q in truth], truth)
    base = recall_curve([baseline_rank(edges, q, weighting) for q in truth], truth)
    elapsed = time.perf_counter() - t0

    oracle = _oracle_voting_recall(edges, truth, weighting is Weighting.WEIGHTED)
    assert oracle[0] >= 0.9
    assert voting.recall(1) == pytest.approx(oracle[0], abs=1e-12)
    assert voting.recall(1) >= 0.9
    assert voting.aurc >= base.aurc
    assert elapsed < 30.0


# --- criterion 5 ---------------------------------------------------------------------------

# manager ties carry up to five interactions per slot, peer noise a single one
SKEWED = SynthParams(seed=42, noise_rate=0.5, hierarchy_count_max=5)


@pytest.mark.criterion(5)
@pytest.mark.parametrize("method", list(Method))
def test_weighted_beats_unweighted(method):
    edges, truth = generate_synthetic(SKEWED)
    aurc = {}
    for weighting in Weighting:
        snaps = None
        if method is not Method.BASELINE:
            snaps = build_snapshots(edges, slice_timeline(edges, "week"), weighting)
        results = []
        for q in truth:
            if method is Method.BASELINE:
                results.append(baseline_rank(edges, q, weighting))
            elif method is Method.TIME_VOTING:
                results.append(timeslice_rank(edges, q, "week", weighting, p=3, snapshots=snaps))
            else:
                results.append(modal_position_rank(edges, q, "week", weighting, snapshots=snaps))
        aurc[weighting] = recall_curve(results, truth).aurc
    assert aurc[Weighting.WEIGHTED] >= aurc[Weighting.UNWEIGHTED]


@pytest.mark.criterion(5)
def test_weighted_baseline_oracle_gap():
    # dense-solve recall for the baseline on the same data, both weightings
    edges, truth = generate_synthetic(SKEWED)
    label = edges.nodes.label
    named_truth = {label(q): label(s) for q, s in truth.items()}
    oracle_aurc = {}
    for weighted in (True, False):
        graph = slot_graphs(raw_records(edges), edges.directed, lambda day: 0, weighted)[0]
        orderings = {}
        for q in named_truth:
            scores = dense_rpr(graph, q)
            orderings[q] = [u for u in sorted(scores, key=lambda u: (-scores[u], u)) if u != q]
        oracle_aurc[weighted] = float(np.mean(brute_force_recall(orderings, named_truth, 10)))
    assert oracle_aurc[True] >= oracle_aurc[False]
    for weighting, weighted in ((Weighting.WEIGHTED, True), (Weighting.UNWEIGHTED, False)):
        curve = recall_curve([baseline_rank(edges, q, weighting) for q in truth], truth)
        assert curve.aurc == pytest.approx(oracle_aurc[weighted], abs=1e-12)


# --- criterion 6 ---------------------------------------------------------------------------

@st.composite
def ranked_results(draw):
    n_queries = draw(st.integers(1, 25))
    n_nodes = n_queries + draw(st.integers(1, 30))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    truth, results = {}, []
    for q in range(n_queries):
        others = [u for u in range(n_nodes) if u != q]
        truth[q] = int(rng.choice(others))
        k = int(rng.integers(0, len(others) + 1))
        ranking = rng.permutation(others)[:k]
        results.append(InferenceResult(q, tuple((int(u), 0.0) for u in ranking), Method.BASELINE,
                                       Weighting.WEIGHTED, "full-span"))
    return results, GroundTruth(truth), draw(st.integers(1, 40)), seed


@pytest.mark.criterion(6)
@settings(max_examples=300, deadline=None, derandomize=True)
@given(ranked_results())
def test_recall_curve_properties(case):
    results, truth, max_rank, seed = case
    curve = recall_curve(results, truth, max_rank)
    values = [r for _, r in curve.points]
    assert [i for i, _ in curve.points] == list(range(1, max_rank + 1))
    assert all(0.0 <= r <= 1.0 for r in values)
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert 0.0 <= curve.aurc <= 1.0

    shuffled = [results[i] for i in np.random.default_rng(seed).permutation(len(results))]
    assert recall_curve(shuffled, truth, max_rank).points == curve.points

    orderings = {r.query: r.order for r in results}
    assert values == pytest.approx(brute_force_recall(orderings, truth, max_rank), abs=1e-12)


# --- criterion 7 ---------------------------------------------------------------------------

@pytest.mark.criterion(7)
def test_evaluate_is_byte_identical(tmp_path):
    out = tmp_path / "out"
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "synthetic": True, "seed": 11, "noise_rate": 0.3, "hierarchy_count_max": 3,
        "method": ["baseline", "time-voting", "modal-position"],
        "granularity": ["week", "fixed:4"], "weighting": ["weighted", "unweighted"],
        "out": str(out),
    }))

    def snapshot():
        return {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}

    assert main(["evaluate", "--config", str(config)]) == 0
    first = snapshot()
    assert main(["evaluate", "--config", str(config)]) == 0
    second = snapshot()
    assert len(first) == 2 * 5 + 3
    assert first == second


# --- criterion 8 ---------------------------------------------------------------------------

SMOKE_METHODS = ["time-voting", "modal-position"]
SMOKE_GRANULARITIES = ["week", "month"]


def _smoke_run(edges_path, truth_path, schema, expected_ties, out, jobs=1, max_rank=10):
    argv = ["evaluate", "--edges", str(edges_path), "--truth", str(truth_path), "--schema", schema,
            "--out", str(out), "--max-rank", str(max_rank), "--jobs", str(jobs)]
    for m in SMOKE_METHODS:
        argv += ["--method", m]
    for g in SMOKE_GRANULARITIES:
        argv += ["--granularity", g]
    for w in Weighting:
        argv += ["--weighting", w.value]
    assert main(argv) == 0

    manifest = json.loads((out / "run_manifest.json").read_text())
    assert manifest["n_queries"] == expected_ties
    curves = json.loads((out / "curves.json").read_text())
    assert len(curves) == len(SMOKE_METHODS) * len(SMOKE_GRANULARITIES) * len(Weighting)
    for tag, points in curves.items():
        assert [i for i, _ in points] == list(range(1, max_rank + 1)), tag
        values = [r for _, r in points]
        assert all(0.0 <= r <= 1.0 for r in values), tag
        assert all(a <= b for a, b in zip(values, values[1:])), tag
        assert (out / f"recall_{tag}.csv").is_file()
    rows = (out / "comparison.csv").read_text().splitlines()
    assert len(rows) == 1 + max_rank + 1 and rows[-1].startswith("AURC,")


@pytest.mark.criterion(8)
def test_real_data_smoke(request, tmp_path):
    opt = request.config.getoption
    if not opt("--enron-edges"):
        pytest.skip("no real data supplied (use --enron-edges and --enron-truth)")
    edges_path, truth_path = Path(opt("--enron-edges")), Path(opt("--enron-truth") or "")
    assert edges_path.is_file(), edges_path
    assert truth_path.is_file(), f"--enron-truth must name an existing file, got {truth_path}"
    _smoke_run(edges_path, truth_path, opt("--enron-schema"), opt("--enron-ties"), tmp_path / "out",
               jobs=opt("--enron-jobs"))


@pytest.mark.criterion(8)
def test_enron_shaped_stand_in(tmp_path):
    # same file format and time span shape as the e-mail corpus, kept small enough to run always
    params = SynthParams(seed=2001, managers=6, reports_per_manager=8, slots=40, noise_rate=0.3,
                         hierarchy_count_max=4, start=dt.date(2000, 1, 3))
    edges, truth = generate_synthetic(params)
    edges_path, truth_path = tmp_path / "edges.csv", tmp_path / "truth.csv"
    write_edges(edges, edges_path, EdgeFileSchema.directed_counts())
    write_ground_truth(truth, edges.nodes, truth_path)
    _smoke_run(edges_path, truth_path, "directed-counts", len(truth), tmp_path / "out")
