"""Edge-aware compression of connected text nodes.

Each connected node is scored by ``r = b * importance + (1 - b) * diversity``
where importance is the min-max normalized total edge weight into the node
and diversity is one minus the min-max normalized total cosine similarity to
the other connected nodes. The top-scoring nodes are kept.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .vecmath import retention_count

# max - min below this (relative to scale) counts as a constant vector
_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class EWConfig:
    retention_ratio: float = 0.7
    balance: float = 0.1

    def __post_init__(self):
        if not 0 < self.retention_ratio <= 1:
            raise ValueError(f"retention_ratio must be in (0, 1], got {self.retention_ratio}")
        if not 0 <= self.balance <= 1:
            raise ValueError(f"balance must be in [0, 1], got {self.balance}")


def minmax_normalize(v) -> np.ndarray:
    """Scale to [0, 1]; a (numerically) constant vector maps to all 0.5."""
    v = np.asarray(v, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    if hi - lo <= _DEGENERATE_TOL * max(1.0, abs(hi), abs(lo)):
        return np.full(v.shape, 0.5)
    return np.clip((v - lo) / (hi - lo), 0.0, 1.0)


def entity_importance(weights) -> np.ndarray:
    """Min-max normalized column sums of the ``M x N`` entity-text weight matrix."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.size == 0:
        raise ValueError("entity_importance needs a non-empty M x N matrix")
    return minmax_normalize(w.sum(axis=0))


def diversity_score(similarity) -> np.ndarray:
    """``1 - minmax(row sums without the diagonal)`` of a square similarity matrix."""
    s = np.asarray(similarity, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"similarity matrix must be square, got shape {s.shape}")
    if s.shape[0] == 0:
        raise ValueError("similarity matrix is empty")
    totals = s.sum(axis=1) - np.diagonal(s)
    return 1.0 - minmax_normalize(totals)


def diversity_from_embeddings(embeddings) -> np.ndarray:
    """Same as ``diversity_score(pairwise_similarity(x))`` in O(N*D) memory and time.

    Row ``i`` of the similarity matrix sums to ``x_i . sum_j x_j``, so the
    off-diagonal total is that minus ``x_i . x_i``.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("need a non-empty 2-D embedding array")
    totals = x @ x.sum(axis=0) - np.einsum("ij,ij->i", x, x)
    return 1.0 - minmax_normalize(totals)


def fusion_score(importance, diversity, balance: float) -> np.ndarray:
    w = np.asarray(importance, dtype=np.float64)
    s = np.asarray(diversity, dtype=np.float64)
    if w.shape != s.shape:
        raise ValueError(f"length mismatch: {w.shape} vs {s.shape}")
    if not 0 <= balance <= 1:
        raise ValueError(f"balance must be in [0, 1], got {balance}")
    return balance * w + (1.0 - balance) * s


def top_by_score(ids: Sequence[int], scores, count: int) -> list[int]:
    """The ``count`` ids with highest score; ties go to the lower id. Output sorted by id."""
    ids = np.asarray(ids, dtype=np.int64)
    order = np.lexsort((ids, -np.asarray(scores, dtype=np.float64)))
    return sorted(ids[order[:count]].tolist())


def weight_matrix(node_ids: Sequence[int], edges: Iterable) -> tuple[np.ndarray, list[int]]:
    """Dense ``M x N`` matrix from ``(entity_id, text_id, weight)`` triples or Edge objects.

    Rows follow ascending entity id. Pairs without an edge are zero.
    """
    col = {int(t): j for j, t in enumerate(node_ids)}
    triples = []
    for e in edges:
        if hasattr(e, "entity_id"):
            triples.append((e.entity_id, e.text_id, e.weight))
        else:
            triples.append(tuple(e))
    triples = [t for t in triples if int(t[1]) in col]
    entities = sorted({int(t[0]) for t in triples})
    row = {ent: i for i, ent in enumerate(entities)}
    w = np.zeros((max(1, len(entities)), len(node_ids)))
    for ent, text, weight in triples:
        if weight < 0:
            raise ValueError(f"negative edge weight {weight} on ({ent}, {text})")
        w[row[int(ent)], col[int(text)]] += float(weight)
    return w, entities


@dataclass
class EWResult:
    retained: list[int]
    scores: dict[int, float]

    @property
    def retained_score(self) -> float:
        return float(sum(self.scores[i] for i in self.retained))

    @property
    def total_score(self) -> float:
        return float(sum(self.scores.values()))


def ew_run(ids: Sequence[int], embeddings, edges: Iterable, cfg: EWConfig) -> EWResult:
    ids = [int(i) for i in ids]
    if not ids:
        raise ValueError("ew_select needs at least one node")
    x = np.asarray(embeddings, dtype=np.float64)
    edges = list(edges)
    orphan = np.flatnonzero(~_has_edge(ids, edges))
    if orphan.size:
        raise ValueError(f"nodes without edges passed to ew_select: {[ids[i] for i in orphan[:10]]}")
    w, _ = weight_matrix(ids, edges)
    r = fusion_score(entity_importance(w), diversity_from_embeddings(x), cfg.balance)
    keep = top_by_score(ids, r, retention_count(len(ids), cfg.retention_ratio))
    return EWResult(keep, dict(zip(ids, r.tolist())))


def _has_edge(ids: Sequence[int], edges: Iterable) -> np.ndarray:
    touched = {int(e.text_id if hasattr(e, "text_id") else e[1]) for e in edges}
    return np.fromiter((i in touched for i in ids), dtype=bool, count=len(ids))


def ew_select(connected_nodes, entity_edges, cfg: EWConfig) -> list[int]:
    """Retained ids for ``connected_nodes``, a sequence of ``(id, embedding)`` pairs."""
    if len(connected_nodes) == 0:
        raise ValueError("ew_select needs at least one node")
    entity_edges = list(entity_edges)
    ids = [int(i) for i, _ in connected_nodes]
    x = np.stack([np.asarray(e, dtype=np.float64) for _, e in connected_nodes])
    return ew_run(ids, x, entity_edges, cfg).retained
