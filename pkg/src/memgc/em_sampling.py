"""Edge-free compression of isolated text nodes.

Nodes are grouped with spherical k-means, each cluster gets a retention
quota proportional to its size, and inside every cluster nodes are picked by
greedy minmax (farthest-point) sampling seeded at the node nearest the
cluster centroid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .vecmath import argmax_tol, largest_remainder, retention_count, round_half_up, spherical_kmeans


@dataclass(frozen=True)
class EMConfig:
    clustering_ratio: float = 0.05
    retention_ratio: float = 0.7
    seed: int = 0
    max_iters: int = 100
    tol: float = 1e-6

    def __post_init__(self):
        if not 0 < self.clustering_ratio <= 1:
            raise ValueError(f"clustering_ratio must be in (0, 1], got {self.clustering_ratio}")
        if not 0 < self.retention_ratio <= 1:
            raise ValueError(f"retention_ratio must be in (0, 1], got {self.retention_ratio}")


@dataclass
class EMResult:
    retained: list[int]
    n_clusters: int
    quotas: list[int]
    # covering radius of each cluster after its final pick (inf for quota 0)
    cluster_radius: list[float] = field(default_factory=list)
    # per-step radius trace for every cluster with a positive quota
    radius_trace: list[np.ndarray] = field(default_factory=list)

    @property
    def covering_radius(self) -> float:
        """Largest final per-cluster covering radius; inf if a cluster kept nothing."""
        if not self.cluster_radius:
            return 0.0
        return float(max(self.cluster_radius))


def minmax_sample(embeddings, centroid, count: int) -> list[int]:
    """Indices chosen by minmax sampling, in selection order.

    The first pick maximizes cosine to ``centroid``; each later pick maximizes
    the Euclidean distance to the already-selected set. Ties go to the lowest
    index.
    """
    idx, _ = minmax_trace(embeddings, centroid, count)
    return idx.tolist()


def minmax_trace(embeddings, centroid, count: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.ascontiguousarray(embeddings, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}], got {count}")
    first = argmax_tol(x @ np.asarray(centroid, dtype=np.float64))
    return kernels.minmax_greedy(x, first, count)


def cluster_quotas(sizes: Sequence[int], retention_ratio: float, total: int) -> np.ndarray:
    """Per-cluster retention counts summing to ``total`` (largest remainder, ties to lower index)."""
    sizes = np.asarray(sizes, dtype=np.int64)
    return largest_remainder(sizes * retention_ratio, total, capacity=sizes)


def em_run(ids: Sequence[int], embeddings, cfg: EMConfig) -> EMResult:
    """Full EM branch with diagnostics. ``ids`` and rows of ``embeddings`` align."""
    ids = np.asarray(ids, dtype=np.int64)
    x = np.ascontiguousarray(embeddings, dtype=np.float64)
    n = ids.shape[0]
    if n == 0:
        raise ValueError("em_select needs at least one node")
    if x.shape[0] != n:
        raise ValueError("ids and embeddings differ in length")
    # node order by id so index tie-breaks are id tie-breaks
    order = np.argsort(ids, kind="stable")
    ids, x = ids[order], x[order]

    target = retention_count(n, cfg.retention_ratio)
    if target == n:
        return EMResult(ids.tolist(), 0, [n], [0.0], [])

    k = min(n, max(1, round_half_up(n * cfg.clustering_ratio)))
    clusters = spherical_kmeans(x, k, seed=cfg.seed, max_iters=cfg.max_iters, tol=cfg.tol)
    members = [np.flatnonzero(clusters.assignments == j) for j in range(k)]
    quotas = cluster_quotas([m.shape[0] for m in members], cfg.retention_ratio, target)

    retained: list[int] = []
    radii: list[float] = []
    traces: list[np.ndarray] = []
    for j in range(k):
        q = int(quotas[j])
        if q == 0:
            radii.append(float("inf"))
            continue
        local = x[members[j]]
        picked, trace = minmax_trace(local, clusters.centroids[j], q)
        retained.extend(ids[members[j][picked]].tolist())
        radii.append(float(trace[-1]))
        traces.append(trace)
    return EMResult(sorted(retained), k, quotas.tolist(), radii, traces)


def em_select(isolated_nodes, cfg: EMConfig) -> list[int]:
    """Retained ids for ``isolated_nodes``, a sequence of ``(id, embedding)`` pairs."""
    if len(isolated_nodes) == 0:
        raise ValueError("em_select needs at least one node")
    ids = [int(i) for i, _ in isolated_nodes]
    x = np.stack([np.asarray(e, dtype=np.float64) for _, e in isolated_nodes])
    return em_run(ids, x, cfg).retained
