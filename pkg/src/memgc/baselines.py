"""Comparison compression policies.

``random``, ``clustering`` and ``dart`` are applied per connectivity branch by
the compressor; ``adjacent_fifo`` and ``capacity_evict`` run over all text
nodes in chronological ``(clip, id)`` order. Every selector returns retained
ids in input order.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .vecmath import TIE_EPS, spherical_kmeans


class BaselinePolicy(str, enum.Enum):
    RANDOM = "random"
    CLUSTERING = "clustering"
    DART = "dart"
    ADJACENT_FIFO = "adjacent_fifo"
    CAPACITY_EVICT = "capacity_evict"

    @property
    def per_branch(self) -> bool:
        return self in (BaselinePolicy.RANDOM, BaselinePolicy.CLUSTERING, BaselinePolicy.DART)


@dataclass(frozen=True)
class BaselineParams:
    dart_pivot_fraction: float = 0.02
    adjacent_threshold: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.dart_pivot_fraction < 1:
            raise ValueError(f"dart_pivot_fraction must be in (0, 1), got {self.dart_pivot_fraction}")
        if not -1 < self.adjacent_threshold < 1:
            raise ValueError(f"adjacent_threshold must be in (-1, 1), got {self.adjacent_threshold}")


class DartPivotWarning(UserWarning):
    """Retention target is smaller than the DART pivot set."""


def _check_count(count: int, n: int, lo: int = 1) -> None:
    if not lo <= count <= n:
        raise ValueError(f"retention count must be in [{lo}, {n}], got {count}")


def _split(nodes) -> tuple[np.ndarray, np.ndarray]:
    ids = np.asarray([int(i) for i, _ in nodes], dtype=np.int64)
    x = np.ascontiguousarray(np.stack([np.asarray(e, dtype=np.float64) for _, e in nodes]))
    return ids, x


def random_select(ids: Sequence[int], retention_count: int, seed: int = 0) -> list[int]:
    ids = list(ids)
    _check_count(retention_count, len(ids))
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(len(ids), size=retention_count, replace=False))
    return [ids[i] for i in keep]


def cluster_center_select(nodes, retention_count: int, seed: int = 0) -> list[int]:
    """k-means into ``retention_count`` clusters, keep each cluster's most central node."""
    if len(nodes) == 0:
        raise ValueError("no nodes")
    ids, x = _split(nodes)
    _check_count(retention_count, ids.shape[0])
    clusters = spherical_kmeans(x, retention_count, seed=seed)
    cos = np.einsum("ij,ij->i", x, clusters.centroids[clusters.assignments])
    keep = np.zeros(ids.shape[0], dtype=bool)
    for j in range(retention_count):
        members = np.flatnonzero(clusters.assignments == j)
        # near-equal cosines (e.g. both members of a pair) tie to the lower id
        close = members[cos[members] >= cos[members].max() - TIE_EPS]
        best = close[np.argmin(ids[close])]
        keep[best] = True
    return ids[keep].tolist()


def dart_select(nodes, retention_count: int, pivot_fraction: float = 0.02, seed: int = 0) -> list[int]:
    """Keep random pivots, drop the non-pivots most similar (in total) to the pivots.

    When the target is below the pivot count a :class:`DartPivotWarning` is
    issued, every non-pivot is dropped, and pivots are trimmed in ascending
    order of their total similarity to the other pivots.
    """
    if len(nodes) == 0:
        raise ValueError("no nodes")
    ids, x = _split(nodes)
    n = ids.shape[0]
    _check_count(retention_count, n)
    if retention_count == n:
        return ids.tolist()
    n_pivots = min(n, max(1, int(np.floor(n * pivot_fraction + 0.5 + 1e-9))))
    rng = np.random.default_rng(seed)
    pivots = np.sort(rng.choice(n, size=n_pivots, replace=False))
    is_pivot = np.zeros(n, dtype=bool)
    is_pivot[pivots] = True
    total_sim = x @ x[pivots].sum(axis=0)
    keep = np.zeros(n, dtype=bool)
    if retention_count >= n_pivots:
        keep[pivots] = True
        rest = np.flatnonzero(~is_pivot)
        # removal order: highest total similarity first, lower id first on ties
        removal = rest[np.lexsort((ids[rest], -total_sim[rest]))]
        keep[removal[n - retention_count :]] = True
    else:
        warnings.warn(
            f"retention count {retention_count} is below the pivot count {n_pivots}; trimming pivots",
            DartPivotWarning,
            stacklevel=2,
        )
        pivot_sim = total_sim[pivots] - np.einsum("ij,ij->i", x[pivots], x[pivots])
        removal = pivots[np.lexsort((ids[pivots], pivot_sim))]
        keep[removal[n_pivots - retention_count :]] = True
    return ids[keep].tolist()


def _chronological(nodes, clips) -> np.ndarray:
    ids = np.asarray([int(i) for i, _ in nodes], dtype=np.int64)
    return np.lexsort((ids, np.asarray(clips, dtype=np.int64)))


def adjacent_fifo_select(nodes, retention_count: int, threshold: float = 0.7, clips=None) -> list[int]:
    """Adjacent-similarity dedup followed by oldest-first eviction.

    ``nodes`` are ``(id, embedding)`` pairs in chronological order, or in any
    order when ``clips`` gives each node's clip index. A survivor whose
    cosine with the next survivor exceeds ``threshold`` is removed (the chain
    re-links, so the previous survivor is then compared with that next node).
    If more than ``retention_count`` survive, the oldest are dropped.
    """
    if len(nodes) == 0:
        raise ValueError("no nodes")
    ids, x = _split(nodes)
    _check_count(retention_count, ids.shape[0])
    order = np.arange(ids.shape[0]) if clips is None else _chronological(nodes, clips)
    survivors = order[kernels.adjacent_dedup(x[order], threshold)]
    survivors = survivors[max(0, survivors.shape[0] - retention_count) :]
    return ids[np.sort(survivors)].tolist()


def capacity_evict_select(nodes, capacity: int, clips=None) -> list[int]:
    """Stream nodes into a bank of size ``capacity``.

    Once full, each arrival evicts the bank member with the highest cosine
    to it (the older member on ties) and takes its place.
    """
    if len(nodes) == 0:
        raise ValueError("no nodes")
    if capacity < 1:
        raise ValueError(f"capacity must be >= 1, got {capacity}")
    ids, x = _split(nodes)
    order = np.arange(ids.shape[0]) if clips is None else _chronological(nodes, clips)
    bank = order[kernels.capacity_evict(x[order], capacity)]
    return ids[np.sort(bank)].tolist()
