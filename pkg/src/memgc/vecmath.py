"""Vector primitives, quota rounding, and seeded spherical k-means."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Absorbs float error in products like 0.29 * 100 before floor/round.
_ROUND_EPS = 1e-9
# Scores within this of the maximum count as tied (lowest index wins).
TIE_EPS = 1e-12


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if not math.isfinite(norm):
        raise ValueError("embedding has non-finite entries")
    if norm == 0.0:
        raise ValueError("cannot normalize a zero-norm vector")
    return v / norm


def normalize_rows(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("cannot normalize a zero-norm vector")
    return x / norms


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(np.clip(u @ v, -1.0, 1.0))


def pairwise_similarity(embeddings) -> np.ndarray:
    """Cosine similarity matrix of unit-norm rows; exactly symmetric, unit diagonal."""
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("pairwise_similarity needs a non-empty 2-D array")
    s = x @ x.T
    s = (s + s.T) * 0.5
    np.clip(s, -1.0, 1.0, out=s)
    np.fill_diagonal(s, 1.0)
    return s


def argmax_tol(values, eps: float = TIE_EPS) -> int:
    """Lowest index whose value is within ``eps`` of the maximum."""
    v = np.asarray(values, dtype=np.float64)
    return int(np.argmax(v >= v.max() - eps))


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5 + _ROUND_EPS))


def retention_count(n: int, ratio: float) -> int:
    """``max(1, round(n * ratio))`` with half-up rounding, capped at ``n``."""
    if n <= 0:
        return 0
    return min(n, max(1, round_half_up(n * ratio)))


def largest_remainder(shares, total: int, capacity=None, tie_key=None) -> np.ndarray:
    """Integer apportionment of ``shares`` summing to ``total``.

    Floors every share, then hands out the residual one unit at a time by
    descending fractional remainder. ``tie_key`` orders equal remainders
    (higher key wins; default prefers lower index). ``capacity`` caps each
    entry; entries at capacity are skipped.
    """
    shares = np.asarray(shares, dtype=np.float64)
    n = shares.shape[0]
    floors = np.floor(shares + _ROUND_EPS).astype(np.int64)
    if capacity is not None:
        capacity = np.asarray(capacity, dtype=np.int64)
        floors = np.minimum(floors, capacity)
    remainder = np.maximum(shares - floors, 0.0)
    if tie_key is None:
        tie_key = -np.arange(n)
    # Sort: remainder desc, tie_key desc.
    order = np.lexsort((-np.asarray(tie_key), -remainder))
    out = floors.copy()
    residual = int(total - out.sum())
    while residual > 0:
        open_ = order if capacity is None else order[out[order] < capacity[order]]
        if open_.shape[0] == 0:
            raise ValueError("total exceeds the combined capacity")
        step = open_[:residual]
        out[step] += 1
        residual -= step.shape[0]
    return out


@dataclass(frozen=True)
class ClusterAssignment:
    assignments: np.ndarray
    centroids: np.ndarray
    n_clusters: int
    n_iter: int = 0
    objective: float = 0.0

    def members(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == j)


def _kmeanspp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    # cosine distance to the nearest chosen centre
    dist = np.maximum(1.0 - x @ x[chosen[0]], 0.0)
    taken = np.zeros(n, dtype=bool)
    taken[chosen[0]] = True
    for c in range(1, k):
        w = dist * dist
        w[taken] = 0.0
        cum = np.cumsum(w)
        if cum[-1] > 0:
            idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            if idx >= n:
                idx = int(np.flatnonzero(w > 0)[-1])
        else:
            free = np.flatnonzero(~taken)
            idx = int(free[rng.integers(free.shape[0])])
        chosen[c] = idx
        taken[idx] = True
        np.minimum(dist, np.maximum(1.0 - x @ x[idx], 0.0), out=dist)
    return x[chosen].copy()


def _centroids(x: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    sums = np.zeros((k, x.shape[1]))
    order = np.argsort(labels, kind="stable")
    counts = np.bincount(labels, minlength=k)
    nonempty = np.flatnonzero(counts)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))[nonempty]
    sums[nonempty] = np.add.reduceat(x[order], starts, axis=0)
    norms = np.linalg.norm(sums, axis=1, keepdims=True)
    zero = norms[:, 0] == 0
    if np.any(zero):
        # members cancel exactly; fall back to the first member's direction
        for j in np.flatnonzero(zero):
            members = np.flatnonzero(labels == j)
            sums[j] = x[members[0]] if members.size else 0.0
            norms[j] = 1.0
    return sums / norms


def _repair_empty(x: np.ndarray, labels: np.ndarray, centroids: np.ndarray, k: int) -> None:
    """Reseed empty clusters in place with the worst-fitting point."""
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        fit = np.einsum("ij,ij->i", x, centroids[labels])
        fit[counts[labels] <= 1] = np.inf
        worst = int(np.argmin(fit))
        counts[labels[worst]] -= 1
        labels[worst] = j
        counts[j] = 1
        centroids[j] = x[worst]


def spherical_kmeans(
    embeddings,
    n_clusters: int,
    seed: int = 0,
    max_iters: int = 100,
    tol: float = 1e-6,
    debug: bool = False,
) -> ClusterAssignment:
    """Cluster unit vectors by cosine similarity.

    kmeans++ seeding on ``1 - cos``, then alternate assign-to-best-centroid and
    ``centroid = normalize(mean of members)``. Stops when assignments are
    unchanged, mean centroid movement drops below ``tol``, or ``max_iters``.
    Every returned cluster is non-empty. With ``debug`` the objective
    (sum of member-centroid cosines) is asserted non-decreasing.
    """
    x = np.ascontiguousarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("spherical_kmeans needs a non-empty 2-D array")
    n = x.shape[0]
    if not 1 <= n_clusters <= n:
        raise ValueError(f"n_clusters must be in [1, {n}], got {n_clusters}")
    k = int(n_clusters)
    rng = np.random.default_rng(seed)

    if k == n:
        labels = np.arange(n)
        return ClusterAssignment(labels, x.copy(), k, 0, float(n))

    centroids = _kmeanspp(x, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    prev_obj = -np.inf
    it = 0
    for it in range(1, max_iters + 1):
        new_labels = np.argmax(x @ centroids.T, axis=1)
        _repair_empty(x, new_labels, centroids, k)
        if debug:
            obj = float(np.einsum("ij,ij->", x, centroids[new_labels]))
            assert obj >= prev_obj - 1e-9, f"objective decreased: {prev_obj} -> {obj}"
        new_centroids = _centroids(x, new_labels, k)
        if debug:
            prev_obj = float(np.einsum("ij,ij->", x, new_centroids[new_labels]))
        shift = float(np.mean(np.linalg.norm(new_centroids - centroids, axis=1)))
        unchanged = np.array_equal(new_labels, labels)
        labels, centroids = new_labels, new_centroids
        if unchanged or shift < tol:
            break
    objective = float(np.einsum("ij,ij->", x, centroids[labels]))
    return ClusterAssignment(labels, centroids, k, it, objective)


def covering_radius(points, retained, block: int = 4096) -> float:
    """Max over ``points`` of the Euclidean distance to the nearest row of ``retained``."""
    p = np.asarray(points, dtype=np.float64)
    r = np.asarray(retained, dtype=np.float64)
    if p.shape[0] == 0:
        return 0.0
    if r.shape[0] == 0:
        return float("inf")
    worst = 0.0
    rr = np.einsum("ij,ij->i", r, r)
    for start in range(0, p.shape[0], block):
        chunk = p[start : start + block]
        d2 = np.einsum("ij,ij->i", chunk, chunk)[:, None] + rr[None, :] - 2.0 * chunk @ r.T
        worst = max(worst, float(np.maximum(d2.min(axis=1), 0.0).max()))
    return float(np.sqrt(worst))
