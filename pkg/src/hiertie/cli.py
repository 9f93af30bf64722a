"""Command-line entry point: ``hiertie {rank,evaluate,synth,slice-info}``.

Every effective parameter is resolved as built-in default < JSON config file
(``--config``) < command-line flag and echoed to ``run_manifest.json`` next to
the outputs.  Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

from . import __version__
from .errors import ConfigError, DegenerateConfig, EmptyInput, HierTieError, ParseError, QueryIsolated, UnknownActor
from .evaluation import compare_methods, curve_to_csv, curves_to_json, recall_curve
from .graph import (Granularity, TemporalEdgeList, Weighting, build_snapshot, build_snapshots, full_span_slot,
                    slice_timeline)
from .ingest import (EdgeFileSchema, SchemaKind, SynthParams, generate_synthetic, parse_edges, parse_ground_truth,
                     write_edges, write_ground_truth)
from .pipeline import DEFAULT_P, InferenceResult, Method, QuerySet, run_method
from .rpr import RprParams

log = logging.getLogger("hiertie")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2

DEFAULTS = {
    "edges": None,
    "schema": SchemaKind.DIRECTED_COUNTS.value,
    "truth": None,
    "synthetic": False,
    "method": ["time-voting"],
    "granularity": ["week"],
    "weighting": ["weighted"],
    "p": DEFAULT_P,
    "damping": RprParams.damping,
    "tolerance": RprParams.tolerance,
    "max_iterations": RprParams.max_iterations,
    "max_rank": 10,
    "out": "out",
    "jobs": 1,
    "queries": None,
    "reverse_edges": False,
    **{f.name: f.default for f in fields(SynthParams) if f.name != "start"},
}
_SYNTH_KEYS = [f.name for f in fields(SynthParams) if f.name != "start"]
_LIST_KEYS = ("method", "granularity", "weighting")


class _Validation(Exception):
    pass


def _add_data_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("data source (edge file + ground truth, or --synthetic)")
    g.add_argument("--edges", help="interaction CSV")
    g.add_argument("--schema", choices=[k.value for k in SchemaKind])
    g.add_argument("--truth", help="ground-truth CSV with columns subordinate,superior")
    g.add_argument("--synthetic", action="store_true", default=None, help="generate a synthetic organization")
    g.add_argument("--reverse-edges", action="store_true", default=None,
                   help="flip every directed edge before ranking")
    _add_synth_args(p)


def _add_synth_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("synthetic organization")
    g.add_argument("--seed", type=int)
    g.add_argument("--managers", type=int)
    g.add_argument("--reports-per-manager", type=int)
    g.add_argument("--slots", type=int)
    g.add_argument("--hierarchy-rate", type=float)
    g.add_argument("--noise-rate", type=float)
    g.add_argument("--hierarchy-count-max", type=int)
    g.add_argument("--noise-count-max", type=int)
    g.add_argument("--slot-days", type=int)
    g.add_argument("--undirected", dest="directed", action="store_false", default=None)


def _add_run_args(p: argparse.ArgumentParser, multi: bool):
    action = "append" if multi else "store"
    suffix = " (repeatable)" if multi else ""
    p.add_argument("--method", action=action, choices=[m.value for m in Method], help="ranking method" + suffix)
    p.add_argument("--granularity", action=action, help="week, month, year or fixed:M" + suffix)
    p.add_argument("--weighting", action=action, choices=[w.value for w in Weighting], help="edge weighting" + suffix)
    p.add_argument("--p", type=int, help="top-p voting threshold")
    p.add_argument("--damping", type=float)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--max-rank", type=int)
    p.add_argument("--query", dest="queries", action="append", help="query label (repeatable); "
                   "defaults to every ground-truth subordinate")
    p.add_argument("--jobs", type=int, help="worker processes for per-query ranking")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hiertie", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, multi, help_ in (("rank", False, "write per-query candidate rankings"),
                               ("evaluate", True, "write recall curves and a method comparison")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON file with default values for any flag")
        p.add_argument("--out", help="output directory")
        _add_data_args(p)
        _add_run_args(p, multi)

    p = sub.add_parser("synth", help="write a synthetic organization as edges.csv + truth.csv")
    p.add_argument("--config")
    p.add_argument("--out")
    _add_synth_args(p)

    p = sub.add_parser("slice-info", help="print slot boundaries with per-slot node/edge counts")
    p.add_argument("--config")
    p.add_argument("--out", help="directory for slice_info.csv")
    _add_data_args(p)
    p.add_argument("--granularity")
    p.add_argument("--weighting", choices=[w.value for w in Weighting])
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults, the optional JSON config and explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise _Validation(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise _Validation(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise _Validation(f"config file {path} must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = sorted(set(loaded) - set(DEFAULTS))
        if unknown:
            raise _Validation(f"unknown config keys: {unknown}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            cfg[key] = value
    if args.command == "slice-info":
        for key in ("granularity", "weighting"):
            if isinstance(cfg[key], list):
                cfg[key] = cfg[key][0]
    for key in _LIST_KEYS:
        if args.command == "evaluate" and not isinstance(cfg[key], list):
            cfg[key] = [cfg[key]]
        if args.command == "rank" and isinstance(cfg[key], list):
            if len(cfg[key]) != 1:
                raise _Validation(f"rank takes a single {key}, got {cfg[key]}")
            cfg[key] = cfg[key][0]
    return cfg


def _check(cond, message):
    if not cond:
        raise _Validation(message)


def _synth_params(cfg) -> SynthParams:
    try:
        return SynthParams(**{k: cfg[k] for k in _SYNTH_KEYS})
    except (TypeError, ValueError) as exc:
        raise _Validation(f"invalid synthetic parameters: {exc}") from None


def _load_data(cfg, need_truth: bool):
    """Edge list and ground truth (or None) from files or the synthetic generator."""
    if cfg["synthetic"]:
        _check(not cfg["edges"] and not cfg["truth"],
               "give either --synthetic or --edges/--truth, not both")
        edges, truth = generate_synthetic(_synth_params(cfg))
    else:
        _check(cfg["edges"], "no data source: pass --edges (with --truth) or --synthetic")
        edges_path = Path(cfg["edges"])
        _check(edges_path.is_file(), f"edge file not found: {edges_path}")
        truth = None
        if cfg["truth"]:
            _check(Path(cfg["truth"]).is_file(), f"ground-truth file not found: {cfg['truth']}")
        elif need_truth:
            raise _Validation("missing --truth (required to choose queries and to evaluate)")
        try:
            schema = EdgeFileSchema.parse(cfg["schema"])
        except ValueError:
            raise _Validation(f"unknown schema {cfg['schema']!r}") from None
        edges = parse_edges(edges_path, schema)
        if cfg["truth"]:
            truth = parse_ground_truth(cfg["truth"], edges.nodes)
    if cfg["reverse_edges"]:
        edges = edges.reversed()
    return edges, truth


def _params(cfg) -> RprParams:
    try:
        return RprParams(float(cfg["damping"]), float(cfg["tolerance"]), int(cfg["max_iterations"]))
    except (TypeError, ValueError) as exc:
        raise _Validation(str(exc)) from None


def _granularity(text) -> Granularity:
    try:
        return Granularity.parse(text)
    except ValueError as exc:
        raise _Validation(str(exc)) from None


def _queries(cfg, edges: TemporalEdgeList, truth) -> QuerySet:
    if cfg["queries"]:
        labels = list(cfg["queries"])
        unknown = [q for q in labels if q not in edges.nodes]
        _check(not unknown, f"unknown query labels: {unknown}")
        ids = sorted(edges.nodes.id(q) for q in labels)
    else:
        _check(truth is not None, "no queries: pass --query or --truth")
        ids = truth.subordinates
    try:
        return QuerySet(ids, edges.nodes)
    except ValueError as exc:
        raise _Validation(str(exc)) from None


def _validate_run(cfg):
    _check(int(cfg["p"]) >= 1, f"p must be >= 1, got {cfg['p']}")
    _check(int(cfg["max_rank"]) >= 1, f"max_rank must be >= 1, got {cfg['max_rank']}")
    _check(int(cfg["jobs"]) >= 1, f"jobs must be >= 1, got {cfg['jobs']}")
    methods = cfg["method"] if isinstance(cfg["method"], list) else [cfg["method"]]
    weightings = cfg["weighting"] if isinstance(cfg["weighting"], list) else [cfg["weighting"]]
    for m in methods:
        _check(m in {x.value for x in Method}, f"unknown method {m!r}")
    for w in weightings:
        _check(w in {x.value for x in Weighting}, f"unknown weighting {w!r}")


def method_tag(method: Method, weighting: Weighting, granularity: Granularity | None, p: int) -> str:
    if method is Method.BASELINE:
        return f"baseline-{weighting.value}"
    tag = f"{method.value}-{weighting.value}-{granularity.tag.replace(':', '')}"
    return f"{tag}-p{p}" if method is Method.TIME_VOTING else tag


# Worker state for the process pool; set once per worker by the initializer.
_STATE: dict = {}


def _init_worker(state):
    _STATE.clear()
    _STATE.update(state)


def _rank_one(query: int):
    s = _STATE
    try:
        return run_method(s["method"], s["edges"], query, weighting=s["weighting"],
                          granularity=s["granularity"], p=s["p"], params=s["params"],
                          snapshots=s["snapshots"], cache=s.get("cache"))
    except QueryIsolated:
        return InferenceResult(query, (), s["method"], s["weighting"], "isolated")


def prepare_snapshots(method: Method, edges: TemporalEdgeList, weighting: Weighting,
                      granularity: Granularity | None):
    """Full-span snapshot for the baseline, per-slot snapshot list otherwise."""
    if method is Method.BASELINE:
        return build_snapshot(edges, full_span_slot(edges), weighting)
    return build_snapshots(edges, slice_timeline(edges, granularity), weighting)


def rank_queries(method: Method, edges: TemporalEdgeList, queries, *, weighting: Weighting,
                 granularity: Granularity | None, p: int, params: RprParams, jobs: int = 1,
                 snapshots=None, cache: dict | None = None) -> list[InferenceResult]:
    """Run ``method`` for every query; isolated queries get an empty ranking.

    ``cache`` is only used on the serial path (worker processes keep their own).
    """
    if snapshots is None:
        snapshots = prepare_snapshots(method, edges, weighting, granularity)
    state = dict(method=method, edges=edges, weighting=weighting, granularity=granularity, p=p,
                 params=params, snapshots=snapshots)
    queries = sorted(queries)
    if jobs <= 1 or len(queries) < 2:
        _init_worker({**state, "cache": cache})
        results = [_rank_one(q) for q in queries]
    else:
        chunk = max(1, len(queries) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(state,)) as pool:
            results = list(pool.map(_rank_one, queries, chunksize=chunk))
    for r in results:
        if not r.ranking:
            log.warning("query %s has no interactions; counted as a miss", edges.nodes.label(r.query))
    return results


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="")


def _manifest(cfg, command, extra=None) -> str:
    body = {"command": command, "version": __version__, "config": cfg}
    if extra:
        body.update(extra)
    return json.dumps(body, indent=2, sort_keys=True, default=str) + "\n"


def _out_dir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _rankings_csv(results, edges, max_rank) -> str:
    label = edges.nodes.label
    lines = ["query,rank,candidate,score"]
    for r in results:
        for pos, (node, score) in enumerate(r.ranking[:max_rank], start=1):
            lines.append(f"{_csv_field(label(r.query))},{pos},{_csv_field(label(node))},{score:.12g}")
    return "\n".join(lines) + "\n"


def _csv_field(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _rankings_json(results, edges, max_rank, tag) -> str:
    label = edges.nodes.label
    body = {
        "method": tag,
        "rankings": [
            {"query": label(r.query),
             "candidates": [{"rank": pos, "candidate": label(n), "score": float(f"{s:.12g}")}
                            for pos, (n, s) in enumerate(r.ranking[:max_rank], start=1)]}
            for r in results
        ],
    }
    return json.dumps(body, indent=2) + "\n"


def cmd_rank(cfg) -> int:
    _validate_run(cfg)
    edges, truth = _load_data(cfg, need_truth=not cfg["queries"])
    queries = _queries(cfg, edges, truth)
    method, weighting = Method.parse(cfg["method"]), Weighting.parse(cfg["weighting"])
    granularity = None if method is Method.BASELINE else _granularity(cfg["granularity"])
    params = _params(cfg)
    out = _out_dir(cfg)
    results = rank_queries(method, edges, queries, weighting=weighting, granularity=granularity,
                           p=int(cfg["p"]), params=params, jobs=int(cfg["jobs"]))
    tag = method_tag(method, weighting, granularity, int(cfg["p"]))
    _write(out / "rankings.csv", _rankings_csv(results, edges, int(cfg["max_rank"])))
    _write(out / "rankings.json", _rankings_json(results, edges, int(cfg["max_rank"]), tag))
    _write(out / "run_manifest.json", _manifest(cfg, "rank", {"method_tag": tag, "n_queries": len(queries)}))
    return EXIT_OK


def cmd_evaluate(cfg) -> int:
    _validate_run(cfg)
    edges, truth = _load_data(cfg, need_truth=True)
    _check(truth is not None, "evaluate needs ground truth")
    queries = _queries(cfg, edges, truth)
    missing = [edges.nodes.label(q) for q in queries if q not in truth]
    _check(not missing, f"queries without ground truth: {missing}")
    params, p, max_rank = _params(cfg), int(cfg["p"]), int(cfg["max_rank"])
    granularities = [_granularity(g) for g in cfg["granularity"]]

    methods = [Method.parse(m) for m in dict.fromkeys(cfg["method"])]
    timed = [m for m in methods if m is not Method.BASELINE]
    out = _out_dir(cfg)
    curves = []
    for w in dict.fromkeys(cfg["weighting"]):
        weighting = Weighting.parse(w)
        groups = [(None, [Method.BASELINE])] if Method.BASELINE in methods else []
        groups += [(g, timed) for g in granularities if timed]
        for granularity, group in groups:
            # aggregators over the same slots share snapshots and per-slot rankings
            snapshots = prepare_snapshots(group[0], edges, weighting, granularity)
            cache: dict = {}
            for method in group:
                tag = method_tag(method, weighting, granularity, p)
                log.info("running %s", tag)
                results = rank_queries(method, edges, queries, weighting=weighting, granularity=granularity,
                                       p=p, params=params, jobs=int(cfg["jobs"]), snapshots=snapshots,
                                       cache=cache)
                curve = recall_curve(results, truth, max_rank, method=tag)
                curves.append(curve)
                _write(out / f"recall_{tag}.csv", curve_to_csv(curve))
    table = compare_methods(curves)
    _write(out / "curves.json", curves_to_json(curves))
    _write(out / "comparison.csv", table.to_csv())
    _write(out / "run_manifest.json",
           _manifest(cfg, "evaluate", {"method_tags": [c.method for c in curves], "n_queries": len(queries)}))
    return EXIT_OK


def cmd_synth(cfg) -> int:
    params = _synth_params(cfg)
    edges, truth = generate_synthetic(params)
    out = _out_dir(cfg)
    write_edges(edges, out / "edges.csv")
    write_ground_truth(truth, edges.nodes, out / "truth.csv")
    _write(out / "run_manifest.json", _manifest({k: cfg[k] for k in ["out", *_SYNTH_KEYS]}, "synth",
                                                {"schema": "directed-counts" if params.directed
                                                 else "undirected-coauthor"}))
    return EXIT_OK


def cmd_slice_info(cfg) -> int:
    edges, _ = _load_data(cfg, need_truth=False)
    granularity = _granularity(cfg["granularity"])
    weighting = Weighting.parse(cfg["weighting"])
    lines = ["slot,begin,end,nodes,edges,total_weight"]
    for slot in slice_timeline(edges, granularity):
        snap = build_snapshot(edges, slot, weighting)
        lines.append(f"{slot.index},{slot.begin},{slot.end},{snap.n_nodes},{snap.n_edges},"
                     f"{snap.total_weight():g}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    _write(_out_dir(cfg) / "slice_info.csv", text)
    return EXIT_OK


def _fail(code: int, kind: str, message: str) -> int:
    message = " ".join(str(message).split())
    print(f"hiertie: error: code={code} kind={kind} message={message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "rank":
            return cmd_rank(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        if args.command == "synth":
            return cmd_synth(cfg)
        return cmd_slice_info(cfg)
    except _Validation as exc:
        return _fail(EXIT_VALIDATION, "ValidationError", exc)
    except (ParseError, EmptyInput, UnknownActor, DegenerateConfig, ConfigError) as exc:
        return _fail(EXIT_VALIDATION, type(exc).__name__, exc)
    except (HierTieError, OSError, ValueError) as exc:
        return _fail(EXIT_RUNTIME, type(exc).__name__, exc)


if __name__ == "__main__":
    sys.exit(main())
