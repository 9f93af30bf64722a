"""Infer direct hierarchical ties with Rooted-PageRank over time-sliced interaction graphs."""

__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateConfig, EmptyGraph, EmptyInput, EmptySpan, HierTieError,
                     IncomparableCurves, InvalidThreshold, MissingTruth, ParseError, QueryIsolated,
                     RootInactive, TooManySlots, UnknownActor)
from .graph import (Granularity, NodeTable, Snapshot, TemporalEdge, TemporalEdgeList, TimeSlot, Weighting,
                    build_snapshot, build_snapshots, full_span_slot, slice_timeline)
from .rpr import RankedList, RprParams, ScoreVector, rank_scores, rooted_pagerank
from .pipeline import (DEFAULT_P, InferenceResult, Method, QuerySet, VotingTally, baseline_rank,
                       modal_position_rank, run_method, slot_rankings, timeslice_rank)
from .evaluation import (ComparisonTable, GroundTruth, RecallCurve, compare_methods, curve_to_csv,
                         curves_to_json, recall_curve)
from .ingest import (EdgeFileSchema, SchemaKind, SynthParams, generate_synthetic, parse_date, parse_edges,
                     parse_ground_truth, write_edges, write_ground_truth)
