"""Reading and writing interaction logs and ground truth, plus a seeded synthetic organization."""

from __future__ import annotations

import csv
import datetime as dt
import enum
import re
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfig, EmptyInput, ParseError, UnknownActor
from .evaluation import GroundTruth
from .graph import NodeTable, TemporalEdgeList

__all__ = [
    "SchemaKind",
    "EdgeFileSchema",
    "SynthParams",
    "parse_date",
    "parse_edges",
    "write_edges",
    "parse_ground_truth",
    "write_ground_truth",
    "generate_synthetic",
]

_YEAR = re.compile(r"^\d{4}$")


class SchemaKind(enum.Enum):
    DIRECTED_COUNTS = "directed-counts"
    UNDIRECTED_COAUTHOR = "undirected-coauthor"


# Column names tried, in order, when the schema does not pin one.
_ALIASES = {
    "src": ("sender", "src", "author_a", "author1", "source"),
    "dst": ("receiver", "dst", "author_b", "author2", "target"),
    "date": ("date", "week", "year", "timestamp"),
    "count": ("count", "weight", "n"),
}


@dataclass(frozen=True)
class EdgeFileSchema:
    """Layout of an interaction CSV.

    Column names left as ``None`` are looked up among common aliases
    (``sender``/``src``, ``receiver``/``dst``, ``date``/``year``, ``count``).
    The count column is optional; rows without one count as a single
    interaction.
    """

    kind: SchemaKind = SchemaKind.DIRECTED_COUNTS
    src: str | None = None
    dst: str | None = None
    date: str | None = None
    count: str | None = None

    @classmethod
    def directed_counts(cls, **columns):
        return cls(SchemaKind.DIRECTED_COUNTS, **columns)

    @classmethod
    def undirected_coauthor(cls, **columns):
        return cls(SchemaKind.UNDIRECTED_COAUTHOR, **columns)

    @classmethod
    def parse(cls, kind, **columns) -> "EdgeFileSchema":
        if isinstance(kind, EdgeFileSchema):
            return kind
        return cls(SchemaKind(kind) if not isinstance(kind, SchemaKind) else kind, **columns)

    @property
    def directed(self) -> bool:
        return self.kind is SchemaKind.DIRECTED_COUNTS

    def header(self) -> list[str]:
        if self.directed:
            defaults = ("sender", "receiver", "date", "count")
        else:
            defaults = ("src", "dst", "date", "count")
        return [given or default for given, default in
                zip((self.src, self.dst, self.date, self.count), defaults)]

    def resolve(self, fieldnames) -> dict[str, str | None]:
        present = set(fieldnames or ())
        mapping = {}
        for role in ("src", "dst", "date", "count"):
            given = getattr(self, role)
            if given is not None:
                if given not in present:
                    raise ParseError(f"missing required column {given!r}", line=1)
                mapping[role] = given
                continue
            found = next((c for c in _ALIASES[role] if c in present), None)
            if found is None and role != "count":
                raise ParseError(f"no {role} column among {sorted(present)}; "
                                 f"expected one of {list(_ALIASES[role])}", line=1)
            mapping[role] = found
        return mapping


def parse_date(text: str) -> dt.date:
    """``YYYY-MM-DD`` or bare ``YYYY`` (read as January 1st)."""
    text = text.strip()
    if _YEAR.match(text):
        return dt.date(int(text), 1, 1)
    return dt.date.fromisoformat(text)


def parse_edges(path, schema: EdgeFileSchema | None = None) -> TemporalEdgeList:
    """Read an interaction CSV (header row required) into a :class:`TemporalEdgeList`."""
    schema = schema or EdgeFileSchema()
    records = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        cols = schema.resolve(reader.fieldnames)
        for row in reader:
            line = reader.line_num
            if None in row or any(row.get(c) is None for c in cols.values() if c):
                raise ParseError("wrong number of fields", line=line)
            src, dst = row[cols["src"]].strip(), row[cols["dst"]].strip()
            if not src or not dst:
                raise ParseError("empty actor label", line=line)
            try:
                date = parse_date(row[cols["date"]])
            except ValueError:
                raise ParseError(f"bad date {row[cols['date']]!r}", line=line) from None
            count = 1
            if cols["count"]:
                try:
                    count = int(row[cols["count"]])
                except ValueError:
                    raise ParseError(f"bad count {row[cols['count']]!r}", line=line) from None
                if count < 1:
                    raise ParseError(f"count must be positive, got {count}", line=line)
            records.append((src, dst, date, count))
    if not records:
        raise EmptyInput(f"{path}: no interaction rows")
    return TemporalEdgeList.from_records(records, directed=schema.directed)


def write_edges(edges: TemporalEdgeList, path, schema: EdgeFileSchema | None = None) -> None:
    if schema is None:
        schema = EdgeFileSchema(SchemaKind.DIRECTED_COUNTS if edges.directed
                                else SchemaKind.UNDIRECTED_COAUTHOR)
    label = edges.nodes.label
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(schema.header())
        for e in edges.edges:
            writer.writerow([label(e.src), label(e.dst), e.timestamp.isoformat(), e.count])


def parse_ground_truth(path, nodes: NodeTable) -> GroundTruth:
    """Read a ``subordinate,superior`` CSV and resolve labels against ``nodes``."""
    ties: dict[str, str] = {}
    unknown: set[str] = set()
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        missing = {"subordinate", "superior"} - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"missing required column(s) {sorted(missing)}", line=1)
        for row in reader:
            line = reader.line_num
            sub, sup = (row["subordinate"] or "").strip(), (row["superior"] or "").strip()
            if not sub or not sup:
                raise ParseError("empty label", line=line)
            if sub == sup:
                raise ParseError(f"{sub!r} listed as its own superior", line=line)
            if sub in ties and ties[sub] != sup:
                raise ParseError(f"{sub!r} has conflicting superiors {ties[sub]!r} and {sup!r}",
                                 line=line)
            unknown.update(x for x in (sub, sup) if x not in nodes)
            ties[sub] = sup
    if unknown:
        raise UnknownActor(unknown)
    return GroundTruth({nodes.id(s): nodes.id(v) for s, v in ties.items()}, nodes)


def write_ground_truth(truth: GroundTruth, nodes: NodeTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["subordinate", "superior"])
        for sub, sup in truth.items():
            writer.writerow([nodes.label(sub), nodes.label(sup)])


@dataclass(frozen=True)
class SynthParams:
    """Two-level organization: ``managers`` each with ``reports_per_manager`` reports.

    In every slot each report interacts with its manager with probability
    ``hierarchy_rate`` and with one uniformly drawn fellow report with
    probability ``noise_rate``.  Interaction counts are drawn uniformly from
    ``1..hierarchy_count_max`` and ``1..noise_count_max`` respectively.
    """

    seed: int = 42
    managers: int = 10
    reports_per_manager: int = 5
    slots: int = 12
    hierarchy_rate: float = 0.9
    noise_rate: float = 0.2
    hierarchy_count_max: int = 1
    noise_count_max: int = 1
    slot_days: int = 7
    directed: bool = True
    start: dt.date = dt.date(2000, 1, 3)

    def __post_init__(self):
        for name in ("managers", "reports_per_manager", "slots", "hierarchy_count_max",
                     "noise_count_max", "slot_days"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value}")
        if not 0.0 < self.hierarchy_rate <= 1.0:
            raise ValueError(f"hierarchy_rate must lie in (0, 1], got {self.hierarchy_rate}")
        if not 0.0 <= self.noise_rate < 1.0:
            raise ValueError(f"noise_rate must lie in [0, 1), got {self.noise_rate}")


def generate_synthetic(params: SynthParams) -> tuple[TemporalEdgeList, GroundTruth]:
    """Seeded two-level organization and its manager ground truth."""
    rng = np.random.default_rng(params.seed)
    mw = len(str(params.managers - 1))
    rw = len(str(params.reports_per_manager - 1))
    manager_label = [f"m{i:0{mw}d}" for i in range(params.managers)]
    reports = [(f"r{i:0{mw}d}_{j:0{rw}d}", i)
               for i in range(params.managers) for j in range(params.reports_per_manager)]

    interactions = []
    for k in range(params.slots):
        slot_start = params.start + dt.timedelta(days=k * params.slot_days)
        for r, (label, boss) in enumerate(reports):
            if rng.random() < params.hierarchy_rate:
                day = slot_start + dt.timedelta(days=int(rng.integers(params.slot_days)))
                count = int(rng.integers(1, params.hierarchy_count_max + 1))
                interactions.append((label, manager_label[boss], day, count))
            if rng.random() < params.noise_rate and len(reports) > 1:
                peer = int(rng.integers(len(reports) - 1))
                peer += peer >= r
                day = slot_start + dt.timedelta(days=int(rng.integers(params.slot_days)))
                count = int(rng.integers(1, params.noise_count_max + 1))
                interactions.append((label, reports[peer][0], day, count))

    if not interactions:
        raise DegenerateConfig(f"parameters produced no interactions: {params}")
    if params.directed:
        records = [rec for a, b, day, c in interactions for rec in ((a, b, day, c), (b, a, day, c))]
    else:
        records = interactions

    # span is inferred from the data so that a CSV round trip reproduces it exactly
    edges = TemporalEdgeList.from_records(records, directed=params.directed)
    nodes = edges.nodes
    truth = {nodes.id(label): nodes.id(manager_label[boss]) for label, boss in reports
             if label in nodes and manager_label[boss] in nodes}
    return edges, GroundTruth(truth, nodes)
