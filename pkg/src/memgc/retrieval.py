"""Query-time retrieval over a memory graph.

Three modes are supported: plain top-k by cosine (``character_topk``),
segment-representative retrieval (``semantic_segments``), and time-decay
retrieval (``tmr_retrieve``), which splits a budget of ``k`` nodes across
clip segments in proportion to their recency-decayed mean similarity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .graph import MemoryGraph
from .vecmath import largest_remainder

PIECEWISE_HALF_LIFE = 5


class DecayKind(str, enum.Enum):
    EXPONENTIAL = "exponential"
    LINEAR = "linear"
    PIECEWISE = "piecewise"

    @classmethod
    def parse(cls, value: "str | DecayKind") -> "DecayKind":
        if isinstance(value, cls):
            return value
        aliases = {"exp": "exponential", "lin": "linear", "step": "piecewise"}
        return cls(aliases.get(value, value))


class RetrievalMode(str, enum.Enum):
    CHARACTER_TOPK = "character_topk"
    SEMANTIC_SEGMENTS = "semantic_segments"
    TMR = "tmr"

    @classmethod
    def parse(cls, value: "str | RetrievalMode") -> "RetrievalMode":
        if isinstance(value, cls):
            return value
        aliases = {"character": "character_topk", "semantic": "semantic_segments"}
        return cls(aliases.get(value, value))


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = 10
    decay: float = 0.1
    decay_kind: DecayKind = DecayKind.EXPONENTIAL
    mode: RetrievalMode = RetrievalMode.TMR

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.decay >= 0:
            raise ValueError(f"decay coefficient must be >= 0, got {self.decay}")
        object.__setattr__(self, "decay_kind", DecayKind.parse(self.decay_kind))
        object.__setattr__(self, "mode", RetrievalMode.parse(self.mode))


@dataclass
class SegmentScore:
    index: int  # chronological rank, 1..t
    clip: int
    age: int
    members: list[int]
    total: float  # E_j
    mean: float  # mean similarity
    decayed: float  # E'_j
    share: float  # pre-rounding allocation
    num: int  # allocated count


@dataclass
class RetrievalResult:
    ids: list[int]
    scores: list[float]
    segments: list[SegmentScore] | None = None
    fallback: bool = False


def _scores(graph: MemoryGraph, query) -> np.ndarray:
    if len(graph) == 0:
        raise ValueError("graph has no text nodes")
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (graph.embedding_dim,):
        raise ValueError(f"dimension mismatch: query {q.shape}, graph dim {graph.embedding_dim}")
    return graph.embeddings @ q


def _ranked(ids: np.ndarray, scores: np.ndarray, k: int) -> np.ndarray:
    """Positions of the ``k`` best scores, descending, ties to the lower id."""
    n = scores.shape[0]
    if k < n:
        part = np.argpartition(-scores, k - 1)[:k]
        cand = np.flatnonzero(scores >= scores[part].min())
    else:
        cand = np.arange(n)
    order = np.lexsort((ids[cand], -scores[cand]))
    return cand[order[:k]]


def similarity_sort(graph: MemoryGraph, query) -> tuple[np.ndarray, np.ndarray]:
    """Cosine of every node to ``query`` and the full descending order."""
    s = _scores(graph, query)
    return s, np.lexsort((graph.text_ids, -s))


def character_topk(graph: MemoryGraph, query, k: int) -> RetrievalResult:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    s = _scores(graph, query)
    pos = _ranked(graph.text_ids, s, min(k, len(graph)))
    return RetrievalResult(graph.text_ids[pos].tolist(), s[pos].tolist())


def semantic_segments(graph: MemoryGraph, query) -> RetrievalResult:
    """All nodes of the two clips whose best node is most similar to the query."""
    s = _scores(graph, query)
    seg_clips, seg_of, _ = graph.segments
    ids = graph.text_ids
    # representative per segment: max score, lower id on ties
    order = np.lexsort((ids, -s, seg_of))
    first = np.ones(order.shape[0], dtype=bool)
    first[1:] = seg_of[order][1:] != seg_of[order][:-1]
    reps = order[first]  # one per segment, in segment order
    top = reps[np.lexsort((ids[reps], -s[reps]))][:2]
    chosen = np.sort(seg_of[top])
    mask = np.isin(seg_of, chosen)
    pos = np.flatnonzero(mask)
    pos = pos[np.lexsort((ids[pos], seg_of[pos]))]
    return RetrievalResult(ids[pos].tolist(), s[pos].tolist())


def decay_factor(kind: str | DecayKind, decay: float, age: float) -> float:
    """Recency weight for a segment ``age`` steps before the newest one."""
    if age < 0:
        raise ValueError(f"age must be >= 0, got {age}")
    kind = DecayKind.parse(kind)
    if kind is DecayKind.EXPONENTIAL:
        return math.exp(-decay * age)
    if kind is DecayKind.LINEAR:
        return max(0.0, 1.0 - decay * age)
    return 0.5 ** (age // PIECEWISE_HALF_LIFE)


def decay_factors(kind: str | DecayKind, decay: float, ages: np.ndarray) -> np.ndarray:
    ages = np.asarray(ages, dtype=np.float64)
    if np.any(ages < 0):
        raise ValueError("age must be >= 0")
    kind = DecayKind.parse(kind)
    if kind is DecayKind.EXPONENTIAL:
        return np.exp(-decay * ages)
    if kind is DecayKind.LINEAR:
        return np.maximum(0.0, 1.0 - decay * ages)
    return 0.5 ** np.floor(ages / PIECEWISE_HALF_LIFE)


def allocate(decayed, sizes, budget: int) -> tuple[np.ndarray, np.ndarray]:
    """Split ``budget`` nodes across segments in proportion to ``decayed``.

    Returns ``(shares, counts)``: the fractional pre-rounding shares and the
    integer allocation. Rounding is largest-remainder with ties to the more
    recent (higher index) segment. Allocations above a segment's size are
    capped and the surplus goes to unsaturated segments in descending
    ``decayed`` order (more recent first on ties). ``decayed`` must have a
    positive sum.
    """
    e = np.asarray(decayed, dtype=np.float64)
    sizes = np.asarray(sizes, dtype=np.int64)
    total = float(e.sum())
    if not total > 0:
        raise ValueError("decayed scores must have a positive sum")
    budget = int(min(budget, sizes.sum()))
    shares = e / total * budget
    recency = np.arange(e.shape[0])
    counts = largest_remainder(shares, budget, tie_key=recency)
    surplus = int(np.maximum(counts - sizes, 0).sum())
    if surplus:
        counts = np.minimum(counts, sizes)
        for j in np.lexsort((-recency, -e)):
            room = int(sizes[j] - counts[j])
            if room > 0:
                give = min(room, surplus)
                counts[j] += give
                surplus -= give
                if surplus == 0:
                    break
    return shares, counts


def segment_profile(graph: MemoryGraph, sims: np.ndarray, cfg: RetrievalConfig):
    """Per-segment totals, means, and decayed scores for clamped similarities."""
    seg_clips, seg_of, sizes = graph.segments
    clamped = np.maximum(sims, 0.0)
    totals = np.bincount(seg_of, weights=clamped, minlength=seg_clips.shape[0])
    means = totals / sizes
    ages = seg_clips[-1] - seg_clips
    decayed = means * decay_factors(cfg.decay_kind, cfg.decay, ages)
    return seg_clips, seg_of, sizes, totals, means, ages, decayed


def tmr_retrieve(graph: MemoryGraph, query, cfg: RetrievalConfig, with_segments: bool = True) -> RetrievalResult:
    """Time-decay retrieval; returns ids ranked by similarity plus per-segment scores.

    Segment age is measured in clip indices from the newest clip present.
    Negative similarities count as zero mass. If every segment has zero
    decayed mass the call degrades to :func:`character_topk`.
    """
    sims = _scores(graph, query)
    ids = graph.text_ids
    seg_clips, seg_of, sizes, totals, means, ages, decayed = segment_profile(graph, sims, cfg)
    budget = min(cfg.k, len(graph))

    if not decayed.sum() > 0:
        pos = _ranked(ids, sims, budget)
        shares = np.zeros(seg_clips.shape[0])
        counts = np.bincount(seg_of[pos], minlength=seg_clips.shape[0])
        fallback = True
    else:
        shares, counts = allocate(decayed, sizes, budget)
        # rank within segment: segment asc, similarity desc, id asc
        order = np.lexsort((ids, -sims, seg_of))
        starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
        seg_sorted = seg_of[order]
        rank = np.arange(order.shape[0]) - starts[seg_sorted]
        pos = order[rank < counts[seg_sorted]]
        pos = pos[np.lexsort((ids[pos], -sims[pos]))]
        fallback = False

    segments = None
    if with_segments:
        members = np.split(np.argsort(seg_of, kind="stable"), np.cumsum(sizes)[:-1])
        segments = [
            SegmentScore(
                index=j + 1,
                clip=int(seg_clips[j]),
                age=int(ages[j]),
                members=ids[members[j]].tolist(),
                total=float(totals[j]),
                mean=float(means[j]),
                decayed=float(decayed[j]),
                share=float(shares[j]),
                num=int(counts[j]),
            )
            for j in range(seg_clips.shape[0])
        ]
    return RetrievalResult(ids[pos].tolist(), sims[pos].tolist(), segments, fallback)


def retrieve(graph: MemoryGraph, query, cfg: RetrievalConfig) -> RetrievalResult:
    if cfg.mode is RetrievalMode.CHARACTER_TOPK:
        return character_topk(graph, query, cfg.k)
    if cfg.mode is RetrievalMode.SEMANTIC_SEGMENTS:
        return semantic_segments(graph, query)
    return tmr_retrieve(graph, query, cfg)
