"""Synthetic memory graphs and the retrieval-latency / compression-quality harness."""

from __future__ import annotations

import csv
import io
import json
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .compressor import CompressionConfig, run_method
from .graph import Edge, EntityKind, EntityNode, MemoryGraph, TextNode
from .retrieval import RetrievalConfig, character_topk, similarity_sort, tmr_retrieve
from .vecmath import normalize_rows, round_half_up

TIMING_METRICS = frozenset(
    {
        "ss_time_mean", "ss_time_p50", "ss_time_p95",
        "tr_time_mean", "tr_time_p50", "tr_time_p95",
        "topk_time_p50", "compress_time", "ss_speedup", "tr_speedup",
    }
)  # fmt: skip


@dataclass(frozen=True)
class GenConfig:
    n_text: int = 2000
    n_entities: int = 20
    connected_fraction: float = 0.5
    n_segments: int = 40
    n_topics: int = 20
    topic_noise: float = 0.1
    embedding_dim: int = 64
    redundancy_dup_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not self.n_text >= self.n_segments >= 1:
            raise ValueError("need n_text >= n_segments >= 1")
        if self.embedding_dim < 2:
            raise ValueError("embedding_dim must be >= 2")
        if self.n_topics < 1:
            raise ValueError("n_topics must be >= 1")
        if not 0 <= self.connected_fraction <= 1:
            raise ValueError("connected_fraction must be in [0, 1]")
        if not 0 <= self.redundancy_dup_fraction < 1:
            raise ValueError("redundancy_dup_fraction must be in [0, 1)")
        if self.topic_noise < 0:
            raise ValueError("topic_noise must be >= 0")
        if self.connected_fraction > 0 and self.n_entities < 1:
            raise ValueError("connected nodes need at least one entity")


def generate(cfg: GenConfig) -> MemoryGraph:
    """Seeded graph with planted topics, near-duplicates, and chronological clips.

    Text node ``i`` draws a topic and gets ``normalize(centroid + N(0, sigma^2))``.
    A ``redundancy_dup_fraction`` of nodes instead copy an earlier node with
    noise ``sigma / 10``. Clips are contiguous blocks in node order. A
    ``connected_fraction`` of nodes get 1-3 edges to distinct random
    entities with weights ``|N(0, 1)|``.
    """
    rng = np.random.default_rng(cfg.seed)
    n, d = cfg.n_text, cfg.embedding_dim
    centroids = normalize_rows(rng.standard_normal((cfg.n_topics, d)))
    topic = rng.integers(cfg.n_topics, size=n)
    raw = centroids[topic] + cfg.topic_noise * rng.standard_normal((n, d))

    n_dup = min(n - 1, round_half_up(n * cfg.redundancy_dup_fraction)) if n > 1 else 0
    dups = np.sort(rng.choice(np.arange(1, n), size=n_dup, replace=False)) if n_dup else np.empty(0, int)
    emb = normalize_rows(raw)
    dup_noise = cfg.topic_noise / 10.0 * rng.standard_normal((n_dup, d))
    for row, i in enumerate(dups):
        src = int(rng.integers(i))
        topic[i] = topic[src]
        emb[i] = emb[src] + dup_noise[row]
        emb[i] /= np.linalg.norm(emb[i])

    clips = (np.arange(n) * cfg.n_segments) // n
    text_nodes = [
        TextNode(i, f"memory {i} (topic {topic[i]}, clip {clips[i]})", emb[i], int(clips[i])) for i in range(n)
    ]
    kinds = (EntityKind.FACE, EntityKind.VOICE)
    entities = [EntityNode(j, kinds[j % 2], f"{kinds[j % 2].value}_{j}") for j in range(cfg.n_entities)]

    n_conn = round_half_up(n * cfg.connected_fraction)
    edges = []
    if n_conn:
        conn = np.sort(rng.choice(n, size=n_conn, replace=False))
        max_deg = min(3, cfg.n_entities)
        for t in conn:
            deg = int(rng.integers(1, max_deg + 1))
            for ent in np.sort(rng.choice(cfg.n_entities, size=deg, replace=False)):
                edges.append(Edge(int(ent), int(t), float(abs(rng.standard_normal()))))
    return MemoryGraph(text_nodes, entities, edges, d, _embeddings=np.ascontiguousarray(emb))


def sample_queries(graph: MemoryGraph, n: int, noise: float = 0.1, seed: int = 0) -> np.ndarray:
    """Queries near stored memories: a random node's embedding plus Gaussian noise."""
    rng = np.random.default_rng(seed)
    base = graph.embeddings[rng.integers(len(graph), size=n)]
    return normalize_rows(base + noise * rng.standard_normal(base.shape))


@dataclass
class BenchCell:
    policy: str
    ratio: float
    metrics: dict[str, float] = field(default_factory=dict)


@dataclass
class BenchReport:
    seed: int
    k: int
    n_queries: int
    repeats: int
    cells: list[BenchCell] = field(default_factory=list)

    def cell(self, policy: str, ratio: float) -> BenchCell:
        for c in self.cells:
            if c.policy == policy and c.ratio == ratio:
                return c
        raise KeyError((policy, ratio))

    def rows(self, timing: bool = True) -> list[tuple]:
        out = []
        for c in self.cells:
            for metric, value in c.metrics.items():
                if timing or metric not in TIMING_METRICS:
                    out.append((c.policy, c.ratio, metric, value, self.seed))
        return out

    def to_csv(self, timing: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["policy", "ratio", "metric", "value", "seed"])
        for policy, ratio, metric, value, seed in self.rows(timing):
            w.writerow([policy, repr(ratio), metric, repr(float(value)), seed])
        return buf.getvalue()

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            for c in d["cells"]:
                c["metrics"] = {m: v for m, v in c["metrics"].items() if m not in TIMING_METRICS}
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=1, sort_keys=True)

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        summary, table = out / "summary.json", out / "metrics.csv"
        summary.write_text(self.to_json() + "\n", encoding="utf-8")
        table.write_text(self.to_csv(), encoding="utf-8")
        return summary, table


def _pct(values: Sequence[float], q: float) -> float:
    return float(np.percentile(np.asarray(values), q))


def _timed(fn, *args, **kwargs) -> float:
    t0 = time.perf_counter()
    fn(*args, **kwargs)
    return time.perf_counter() - t0


def overlap_at_k(retrieved: Sequence[int], oracle: Sequence[int], k: int) -> float:
    return len(set(retrieved) & set(oracle)) / k


def run_bench(
    graph: MemoryGraph,
    policies: Sequence[str],
    ratios: Sequence[float],
    queries,
    retrieval_cfg: RetrievalConfig | None = None,
    repeats: int = 3,
    compression_cfg: CompressionConfig | None = None,
    timing: bool = True,
) -> BenchReport:
    """Compress ``graph`` once per (policy, ratio) and measure retrieval on ``queries``.

    Per query, each timed operation runs ``repeats`` times and the median is
    kept; mean/p50/p95 are then taken across queries. Overlap metrics compare
    against ``character_topk`` on the uncompressed graph. ``timing=False``
    skips the clock entirely (quality metrics only).
    """
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if queries.shape[0] == 0 or queries.size == 0:
        raise ValueError("need at least one query")
    if repeats < 3 and timing:
        raise ValueError("repeats must be >= 3")
    rcfg = retrieval_cfg or RetrievalConfig()
    ccfg = compression_cfg or CompressionConfig()
    k = min(rcfg.k, len(graph))
    oracle = [character_topk(graph, q, k).ids for q in queries]
    report = BenchReport(ccfg.seed, k, queries.shape[0], repeats)

    for policy in policies:
        base_ss = base_tr = None
        for ratio in ratios:
            t0 = time.perf_counter()
            small, crep = run_method(policy, graph, ratio, ccfg)
            compress_time = time.perf_counter() - t0
            m: dict[str, float] = {
                "n_text": float(len(small)),
                "n_edges": float(len(small.edges)),
                "covering_radius": float(crep.covering_radius),
            }
            frac = crep.retained_score_fraction
            if frac is not None:
                m["retained_score_fraction"] = float(frac)
            small.embeddings, small.segments  # build caches outside the timed region

            ov_char, ov_tmr = [], []
            for q, truth in zip(queries, oracle):
                ov_char.append(overlap_at_k(character_topk(small, q, k).ids, truth, k))
                ov_tmr.append(overlap_at_k(tmr_retrieve(small, q, rcfg, with_segments=False).ids, truth, k))
            m["overlap_character"] = float(np.mean(ov_char))
            m["overlap_tmr"] = float(np.mean(ov_tmr))

            if timing:
                m["compress_time"] = compress_time
                ss, tr, tk = [], [], []
                for q in queries:
                    # warm-up, excluded
                    similarity_sort(small, q)
                    tmr_retrieve(small, q, rcfg, with_segments=False)
                    ss.append(statistics.median(_timed(similarity_sort, small, q) for _ in range(repeats)))
                    tr.append(
                        statistics.median(
                            _timed(tmr_retrieve, small, q, rcfg, with_segments=False) for _ in range(repeats)
                        )
                    )
                    tk.append(statistics.median(_timed(character_topk, small, q, k) for _ in range(repeats)))
                m.update(
                    ss_time_mean=float(np.mean(ss)), ss_time_p50=_pct(ss, 50), ss_time_p95=_pct(ss, 95),
                    tr_time_mean=float(np.mean(tr)), tr_time_p50=_pct(tr, 50), tr_time_p95=_pct(tr, 95),
                    topk_time_p50=_pct(tk, 50),
                )  # fmt: skip
                if ratio == 0:
                    base_ss, base_tr = m["ss_time_p50"], m["tr_time_p50"]
                if base_tr is not None:
                    m["ss_speedup"] = base_ss / m["ss_time_p50"]
                    m["tr_speedup"] = base_tr / m["tr_time_p50"]
            report.cells.append(BenchCell(policy, float(ratio), m))
    return report
