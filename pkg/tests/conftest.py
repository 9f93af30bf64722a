import datetime as dt
import sys
from pathlib import Path

import numpy as np
import pytest

from hiertie import TemporalEdgeList, Weighting, build_snapshot, full_span_slot

sys.path.insert(0, str(Path(__file__).parent))

DAY = dt.date(2001, 1, 1)


def edge_list(pairs, directed=True, day=DAY):
    """TemporalEdgeList from ``(src, dst[, count[, date]])`` tuples of string labels."""
    records = []
    for item in pairs:
        src, dst, *rest = item
        count = rest[0] if rest else 1
        date = rest[1] if len(rest) > 1 else day
        records.append((src, dst, date, count))
    return TemporalEdgeList.from_records(records, directed=directed)


def single_snapshot(pairs, directed=True, weighting=Weighting.WEIGHTED):
    edges = edge_list(pairs, directed)
    return edges, build_snapshot(edges, full_span_slot(edges), weighting)


def random_graph_records(rng, n_nodes, n_edges, max_count=5, n_days=1, start=DAY):
    """Random directed multi-edge records over labels ``v00..``; may include self-loops."""
    labels = [f"v{i:02d}" for i in range(n_nodes)]
    out = []
    for _ in range(n_edges):
        u, v = rng.integers(n_nodes, size=2)
        day = start + dt.timedelta(days=int(rng.integers(n_days)))
        out.append((labels[u], labels[v], day, int(rng.integers(1, max_count + 1))))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# --- acceptance criteria bookkeeping -------------------------------------------------------

CRITERIA = {
    1: "solver matches dense linear solve",
    2: "score vectors are normalized",
    3: "single-slot methods agree with baseline",
    4: "time voting beats baseline on synthetic org",
    5: "weighted beats unweighted on count-skewed org",
    6: "recall curve properties",
    7: "evaluate output is byte-identical across runs",
    8: "real-data smoke run",
}
_outcomes: dict[int, list[str]] = {}


def pytest_addoption(parser):
    group = parser.getgroup("hiertie", "real-data smoke run")
    group.addoption("--enron-edges", help="interaction CSV in Enron format (enables the real-data smoke run)")
    group.addoption("--enron-truth", help="ground-truth CSV for --enron-edges")
    group.addoption("--enron-schema", default="directed-counts", help="edge schema of --enron-edges")
    group.addoption("--enron-ties", type=int, default=146, help="expected number of ground-truth ties")
    group.addoption("--enron-jobs", type=int, default=1, help="worker processes for the real-data run")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(marker.args[0], []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, name in CRITERIA.items():
        seen = _outcomes.get(n)
        if not seen:
            status = "NOT RUN"
        elif "failed" in seen:
            status = "FAIL"
        elif all(s == "skipped" for s in seen):
            status = "SKIP"
        elif "skipped" in seen:
            status = f"PASS ({seen.count('skipped')} conditional test(s) skipped)"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {n} [{name}]: {status}")
