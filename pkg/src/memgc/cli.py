"""``memgc`` command line: gen, compress, retrieve, bench, inspect.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import graph as graphio
from .baselines import BaselineParams
from .benchkit import GenConfig, generate, run_bench, sample_queries
from .compressor import METHODS, CompressionConfig, run_method
from .graph import GraphError, partition_connectivity, validate
from .retrieval import RetrievalConfig, retrieve
from .vecmath import normalize

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Show a default for every optional flag, including ones without help text."""

    def _get_help_string(self, action):
        text = action.help or ""
        if not action.option_strings or action.required or action.default is argparse.SUPPRESS or "default" in text:
            return text
        shown = "none" if action.default is None else "%(default)s"
        return f"{text} (default: {shown})".strip()


def _default_seed() -> int:
    raw = os.environ.get("MEMGC_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"MEMGC_SEED must be an integer, got {raw!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _method(text: str) -> str:
    name = text.replace("-", "_").lower()
    if name not in METHODS:
        raise argparse.ArgumentTypeError(f"unknown method {text!r}; choose from {', '.join(METHODS)}")
    return name


def read_query(path: str | Path) -> np.ndarray:
    """One real per line (blank lines and ``#`` comments ignored); normalized."""
    values = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise GraphError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not values:
        raise GraphError(f"{path}: empty query file")
    try:
        return normalize(values)
    except ValueError as exc:
        raise GraphError(f"{path}: {exc}") from None


def _query_from(args) -> np.ndarray:
    if args.query_inline is not None:
        try:
            return normalize(_floats(args.query_inline))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise GraphError(f"--query-inline: {exc}") from None
    if args.query is None:
        raise UsageError("retrieve needs --query or --query-inline")
    return read_query(args.query)


def build_parser() -> argparse.ArgumentParser:
    fmt = _HelpFormatter
    p = _Parser(prog="memgc", description=__doc__.splitlines()[0], formatter_class=fmt)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a synthetic memory graph", formatter_class=fmt)
    d = GenConfig()
    g.add_argument("--out", required=True, help="output graph file")
    g.add_argument("--n-text", type=int, default=d.n_text, help="number of text nodes")
    g.add_argument("--entities", type=int, default=d.n_entities, help="number of face/voice entities")
    g.add_argument("--connected-fraction", type=float, default=d.connected_fraction, help="share of text nodes with entity edges")
    g.add_argument("--segments", type=int, default=d.n_segments, help="number of clips")
    g.add_argument("--topics", type=int, default=d.n_topics, help="planted topic centroids")
    g.add_argument("--noise", type=float, default=d.topic_noise, help="per-coordinate topic noise")
    g.add_argument("--dim", type=int, default=d.embedding_dim, help="embedding dimension")
    g.add_argument("--dup-fraction", type=float, default=d.redundancy_dup_fraction, help="share of near-duplicate nodes")
    g.add_argument("--seed", type=int, default=None, help="(default: $MEMGC_SEED, else 0)")

    c = sub.add_parser("compress", help="compress a graph", formatter_class=fmt)
    c.add_argument("--in", dest="input", required=True, help="input graph file")
    c.add_argument("--out", required=True, help="output graph file")
    c.add_argument("--ratio", type=float, default=0.3, help="fraction of text nodes removed")
    c.add_argument("--method", type=_method, default="streammeco", help=f"one of {', '.join(METHODS)}")
    c.add_argument("--a", type=float, default=0.05, help="clustering ratio")
    c.add_argument("--b", type=float, default=0.1, help="balance coefficient")
    c.add_argument("--pivot-fraction", type=float, default=0.02, help="dart pivot fraction")
    c.add_argument("--threshold", type=float, default=0.7, help="adjacent-fifo similarity threshold")
    c.add_argument("--seed", type=int, default=None, help="(default: $MEMGC_SEED, else 0)")
    c.add_argument("--report", default=None, help="write a JSON compression report here")

    r = sub.add_parser("retrieve", help="retrieve text nodes for a query", formatter_class=fmt)
    r.add_argument("--in", dest="input", required=True, help="graph file")
    r.add_argument("--query", default=None, help="query vector file, one real per line")
    r.add_argument("--query-inline", default=None, help="comma-separated query vector")
    r.add_argument("--k", type=int, default=10, help="number of text nodes to return")
    r.add_argument("--mode", choices=["tmr", "character", "semantic"], default="tmr", help="retrieval mode")
    r.add_argument("--lambda", dest="decay", type=float, default=0.1, help="decay coefficient")
    r.add_argument("--decay", dest="decay_kind", choices=["exp", "linear", "piecewise"], default="exp", help="decay kind")
    r.add_argument("--format", choices=["table", "tabular"], default="table", help="output style")

    b = sub.add_parser("bench", help="retrieval latency and quality benchmark", formatter_class=fmt)
    b.add_argument("--in", dest="input", required=True, help="graph file")
    b.add_argument("--ratios", type=_floats, default=[0.0, 0.3, 0.5, 0.7], help="comma-separated compression ratios")
    b.add_argument("--methods", default="streammeco,random", help="comma-separated methods")
    b.add_argument("--queries", default=None, help="directory of query files or a single query file")
    b.add_argument("--n-queries", type=int, default=50, help="sampled queries when --queries is absent")
    b.add_argument("--repeats", type=int, default=3, help="timed runs per query (median kept)")
    b.add_argument("--k", type=int, default=10, help="retrieval budget")
    b.add_argument("--lambda", dest="decay", type=float, default=0.1, help="decay coefficient")
    b.add_argument("--decay", dest="decay_kind", choices=["exp", "linear", "piecewise"], default="exp", help="decay kind")
    b.add_argument("--a", type=float, default=0.05, help="clustering ratio")
    b.add_argument("--b", type=float, default=0.1, help="balance coefficient")
    b.add_argument("--seed", type=int, default=None, help="(default: $MEMGC_SEED, else 0)")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--format", choices=["table", "tabular"], default="table", help="stdout style")

    i = sub.add_parser("inspect", help="summarize a graph", formatter_class=fmt)
    i.add_argument("--in", dest="input", required=True, help="graph file")
    i.add_argument("--format", choices=["table", "tabular"], default="table", help="output style")
    return p


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def cmd_gen(args) -> int:
    cfg = GenConfig(
        n_text=args.n_text,
        n_entities=args.entities,
        connected_fraction=args.connected_fraction,
        n_segments=args.segments,
        n_topics=args.topics,
        topic_noise=args.noise,
        embedding_dim=args.dim,
        redundancy_dup_fraction=args.dup_fraction,
        seed=_seed(args),
    )
    graph = generate(cfg)
    graphio.save(graph, args.out)
    print(f"wrote {args.out}: {len(graph)} text nodes, {len(graph.entity_nodes)} entities, {len(graph.edges)} edges")
    return 0


def cmd_compress(args) -> int:
    graph = graphio.load(args.input)
    seed = _seed(args)
    cfg = CompressionConfig(args.ratio, args.a, args.b, seed)
    params = BaselineParams(args.pivot_fraction, args.threshold, seed)
    small, report = run_method(args.method, graph, args.ratio, cfg, params)
    graphio.save(small, args.out)
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n", encoding="utf-8")
    print(
        f"{args.method}: kept {len(small)}/{len(graph)} text nodes "
        f"({len(report.retained_isolated)} isolated, {len(report.retained_connected)} connected) "
        f"in {report.duration:.3f}s"
    )
    return 0


def cmd_retrieve(args) -> int:
    graph = graphio.load(args.input)
    query = _query_from(args)
    cfg = RetrievalConfig(k=args.k, decay=args.decay, decay_kind=args.decay_kind, mode=args.mode)
    result = retrieve(graph, query, cfg)
    if args.format == "tabular":
        print("rank,id,score")
        for rank, (i, s) in enumerate(zip(result.ids, result.scores), 1):
            print(f"{rank},{i},{s!r}")
    else:
        print(f"{'rank':>4}  {'id':>8}  {'score':>10}  clip")
        for rank, (i, s) in enumerate(zip(result.ids, result.scores), 1):
            print(f"{rank:>4}  {i:>8}  {s:>10.6f}  {graph.text_node(i).clip}")
        if result.fallback:
            print("(no positive similarity mass; fell back to top-k)")
    return 0


def _load_queries(args, graph) -> np.ndarray:
    if args.queries is None:
        return sample_queries(graph, args.n_queries, seed=_seed(args))
    path = Path(args.queries)
    files = sorted(p for p in path.iterdir() if p.is_file()) if path.is_dir() else [path]
    if not files:
        raise GraphError(f"{path}: no query files")
    return np.stack([read_query(f) for f in files])


def cmd_bench(args) -> int:
    graph = graphio.load(args.input)
    methods = [_method(m) for m in args.methods.split(",") if m]
    queries = _load_queries(args, graph)
    if queries.shape[1] != graph.embedding_dim:
        raise GraphError(f"query dimension {queries.shape[1]} does not match graph dimension {graph.embedding_dim}")
    rcfg = RetrievalConfig(k=args.k, decay=args.decay, decay_kind=args.decay_kind, mode="tmr")
    ccfg = CompressionConfig(0.0, args.a, args.b, _seed(args))
    report = run_bench(graph, methods, args.ratios, queries, rcfg, args.repeats, ccfg)
    summary, table = report.write(args.out)
    if args.format == "tabular":
        sys.stdout.write(report.to_csv())
    else:
        print(f"{'policy':<16}{'ratio':>6}{'nodes':>8}{'tr_p50 ms':>11}{'speedup':>9}{'overlap@k':>11}{'radius':>9}")
        for c in report.cells:
            m = c.metrics
            print(
                f"{c.policy:<16}{c.ratio:>6.2f}{int(m['n_text']):>8}{m['tr_time_p50'] * 1e3:>11.3f}"
                f"{m.get('tr_speedup', float('nan')):>9.2f}{m['overlap_character']:>11.3f}{m['covering_radius']:>9.3f}"
            )
        print(f"wrote {summary} and {table}")
    return 0


def cmd_inspect(args) -> int:
    graph = graphio.load(args.input)
    isolated, connected = partition_connectivity(graph)
    seg_clips, _, sizes = graph.segments
    kinds = {}
    for e in graph.entity_nodes:
        kinds[e.kind.value] = kinds.get(e.kind.value, 0) + 1
    info = {
        "text_nodes": len(graph),
        "entity_nodes": len(graph.entity_nodes),
        "faces": kinds.get("face", 0),
        "voices": kinds.get("voice", 0),
        "edges": len(graph.edges),
        "isolated": len(isolated),
        "connected": len(connected),
        "segments": int(seg_clips.shape[0]),
        "embedding_dim": graph.embedding_dim,
        "valid": validate(graph).ok,
    }
    if args.format == "tabular":
        print("key,value")
        for k, v in info.items():
            print(f"{k},{v}")
        print("clip,count")
        for clip, n in zip(seg_clips.tolist(), sizes.tolist()):
            print(f"{clip},{n}")
        return 0
    for k, v in info.items():
        print(f"{k:<14}{v}")
    print("segment histogram (clip: count)")
    peak = max(sizes.max(), 1) if sizes.size else 1
    for clip, n in zip(seg_clips.tolist(), sizes.tolist()):
        print(f"  {clip:>6}: {n:>6} {'#' * max(1, int(40 * n / peak))}")
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "compress": cmd_compress,
    "retrieve": cmd_retrieve,
    "bench": cmd_bench,
    "inspect": cmd_inspect,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"memgc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, ValueError, OSError) as exc:
        print(f"memgc: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
