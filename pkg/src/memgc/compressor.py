"""Whole-graph compression: dual-branch method and baseline dispatch."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import baselines
from .baselines import BaselineParams, BaselinePolicy
from .em_sampling import EMConfig, em_run
from .ew_pruning import EWConfig, ew_run
from .graph import GraphError, GraphValidationError, MemoryGraph, partition_connectivity, retain_text_nodes, validate
from .vecmath import covering_radius, retention_count

STREAMMECO = "streammeco"
METHODS = (STREAMMECO,) + tuple(p.value for p in BaselinePolicy)


@dataclass(frozen=True)
class CompressionConfig:
    """Knobs for :func:`compress`.

    ``compression_ratio`` is the fraction of text nodes removed; both branches
    keep ``1 - compression_ratio`` unless ``isolated_retention`` or
    ``connected_retention`` override it.
    """

    compression_ratio: float = 0.3
    clustering_ratio: float = 0.05
    balance: float = 0.1
    seed: int = 0
    isolated_retention: float | None = None
    connected_retention: float | None = None
    max_iters: int = 100
    tol: float = 1e-6

    def __post_init__(self):
        if not 0 <= self.compression_ratio < 1:
            raise ValueError(f"compression_ratio must be in [0, 1), got {self.compression_ratio}")

    @property
    def alpha(self) -> float:
        return self.isolated_retention if self.isolated_retention is not None else 1.0 - self.compression_ratio

    @property
    def beta(self) -> float:
        return self.connected_retention if self.connected_retention is not None else 1.0 - self.compression_ratio


@dataclass
class CompressionReport:
    method: str
    compression_ratio: float
    seed: int
    retained_isolated: list[int] = field(default_factory=list)
    retained_connected: list[int] = field(default_factory=list)
    removed: list[int] = field(default_factory=list)
    retained_score: float | None = None
    total_score: float | None = None
    n_clusters: int = 0
    cluster_radius: list[float] = field(default_factory=list)
    covering_radius: float = 0.0
    duration: float = 0.0

    @property
    def retained(self) -> list[int]:
        return sorted(self.retained_isolated + self.retained_connected)

    @property
    def retained_score_fraction(self) -> float | None:
        if self.retained_score is None or not self.total_score:
            return None
        return self.retained_score / self.total_score

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        d["cluster_radius"] = [None if not np.isfinite(r) else r for r in self.cluster_radius]
        d["retained_score_fraction"] = self.retained_score_fraction
        if not timing:
            d.pop("duration")
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=1, sort_keys=True)


def _check_input(graph: MemoryGraph) -> None:
    if len(graph) == 0:
        raise GraphError("cannot compress a graph without text nodes")
    report = validate(graph)
    if not report.ok:
        raise GraphValidationError(report.violations)


def _branches(graph: MemoryGraph):
    isolated, connected = partition_connectivity(graph)
    idx = graph.index_of
    iso_x = graph.embeddings[[idx[i] for i in isolated]] if isolated else None
    con_x = graph.embeddings[[idx[i] for i in connected]] if connected else None
    return isolated, iso_x, connected, con_x


def _finish(graph: MemoryGraph, report: CompressionReport, iso_ids, iso_x, started: float):
    keep = set(report.retained_isolated) | set(report.retained_connected)
    report.removed = [n.id for n in graph.text_nodes if n.id not in keep]
    if iso_ids and len(report.retained_isolated) < len(iso_ids):
        idx = graph.index_of
        kept_x = graph.embeddings[[idx[i] for i in report.retained_isolated]]
        report.covering_radius = covering_radius(iso_x, kept_x)
    out = retain_text_nodes(graph, keep)
    report.duration = time.perf_counter() - started
    return out, report


def compress(graph: MemoryGraph, cfg: CompressionConfig) -> tuple[MemoryGraph, CompressionReport]:
    """Compress isolated nodes by minmax sampling and connected nodes by fused-score pruning."""
    started = time.perf_counter()
    _check_input(graph)
    report = CompressionReport(STREAMMECO, cfg.compression_ratio, cfg.seed)
    iso_ids, iso_x, con_ids, con_x = _branches(graph)
    if iso_ids:
        em = em_run(
            iso_ids,
            iso_x,
            EMConfig(cfg.clustering_ratio, cfg.alpha, cfg.seed, cfg.max_iters, cfg.tol),
        )
        report.retained_isolated = em.retained
        report.n_clusters = em.n_clusters
        report.cluster_radius = em.cluster_radius
    if con_ids:
        ew = ew_run(con_ids, con_x, graph.edges, EWConfig(cfg.beta, cfg.balance))
        report.retained_connected = ew.retained
        report.retained_score = ew.retained_score
        report.total_score = ew.total_score
    return _finish(graph, report, iso_ids, iso_x, started)


def _pairs(ids, x):
    return list(zip(ids, x))


def compress_with(
    policy: str | BaselinePolicy,
    graph: MemoryGraph,
    ratio: float,
    seed: int = 0,
    params: BaselineParams | None = None,
) -> tuple[MemoryGraph, CompressionReport]:
    """Compress with a named baseline policy at compression ratio ``ratio``."""
    started = time.perf_counter()
    policy = BaselinePolicy(policy.replace("-", "_") if isinstance(policy, str) else policy)
    if not 0 <= ratio < 1:
        raise ValueError(f"compression ratio must be in [0, 1), got {ratio}")
    params = params or BaselineParams(seed=seed)
    _check_input(graph)
    report = CompressionReport(policy.value, ratio, seed)
    iso_ids, iso_x, con_ids, con_x = _branches(graph)
    keep_frac = 1.0 - ratio

    if policy.per_branch:
        for ids, x, slot in ((iso_ids, iso_x, "retained_isolated"), (con_ids, con_x, "retained_connected")):
            if not ids:
                continue
            count = retention_count(len(ids), keep_frac)
            if count == len(ids):
                kept = list(ids)
            elif policy is BaselinePolicy.RANDOM:
                kept = baselines.random_select(ids, count, seed)
            elif policy is BaselinePolicy.CLUSTERING:
                kept = baselines.cluster_center_select(_pairs(ids, x), count, seed)
            else:
                kept = baselines.dart_select(_pairs(ids, x), count, params.dart_pivot_fraction, seed)
            setattr(report, slot, sorted(kept))
    else:
        ids = graph.text_ids.tolist()
        count = retention_count(len(ids), keep_frac)
        nodes = _pairs(ids, graph.embeddings)
        if count == len(ids):
            kept = ids
        elif policy is BaselinePolicy.ADJACENT_FIFO:
            kept = baselines.adjacent_fifo_select(nodes, count, params.adjacent_threshold, clips=graph.clips)
        else:
            kept = baselines.capacity_evict_select(nodes, count, clips=graph.clips)
        kept_set = set(kept)
        iso_set = set(iso_ids)
        report.retained_isolated = sorted(i for i in kept_set if i in iso_set)
        report.retained_connected = sorted(i for i in kept_set if i not in iso_set)
    return _finish(graph, report, iso_ids, iso_x, started)


def run_method(method: str, graph: MemoryGraph, ratio: float, cfg: CompressionConfig | None = None,
               params: BaselineParams | None = None) -> tuple[MemoryGraph, CompressionReport]:
    """Dispatch on a method name (``streammeco`` or any baseline, dashes allowed)."""
    cfg = cfg or CompressionConfig()
    name = method.replace("-", "_").lower()
    if name == STREAMMECO:
        return compress(graph, CompressionConfig(**{**asdict(cfg), "compression_ratio": ratio}))
    return compress_with(name, graph, ratio, cfg.seed, params)
