"""Memory-graph data model: text nodes, face/voice entity nodes, weighted edges.

Graphs are immutable. Operations that "change" a graph return a new one.
Embeddings are stored per node and also exposed as a stacked ``(N, D)``
matrix, cached on first access, which is what every numeric module uses.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .vecmath import normalize

NORM_TOL = 1e-9


class GraphError(Exception):
    """Base class for graph loading and manipulation errors."""


class GraphFormatError(GraphError):
    """The graph file could not be parsed against the schema."""


class GraphValidationError(GraphError):
    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        lines = "; ".join(v.message for v in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"graph failed validation: {lines}{more}")


class EntityKind(str, enum.Enum):
    FACE = "face"
    VOICE = "voice"


@dataclass(frozen=True, eq=False)
class TextNode:
    id: int
    content: str
    embedding: np.ndarray
    clip: int

    def __post_init__(self):
        emb = np.array(self.embedding, dtype=np.float64)
        emb.setflags(write=False)
        object.__setattr__(self, "embedding", emb)

    def __eq__(self, other):
        if not isinstance(other, TextNode):
            return NotImplemented
        return (
            self.id == other.id
            and self.content == other.content
            and self.clip == other.clip
            and self.embedding.shape == other.embedding.shape
            and bool(np.array_equal(self.embedding, other.embedding))
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class EntityNode:
    id: int
    kind: EntityKind
    label: str = ""


@dataclass(frozen=True)
class Edge:
    entity_id: int
    text_id: int
    weight: float


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    refs: tuple = ()


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


class MemoryGraph:
    """Text nodes, entity nodes and entity->text edges.

    ``embedding_dim`` defaults to the dimension of the first text node.
    Construction never raises on invariant violations; call :func:`validate`.
    """

    def __init__(
        self,
        text_nodes: Iterable[TextNode],
        entity_nodes: Iterable[EntityNode] = (),
        edges: Iterable[Edge] = (),
        embedding_dim: int | None = None,
        *,
        _embeddings: np.ndarray | None = None,
    ):
        self.text_nodes: tuple[TextNode, ...] = tuple(text_nodes)
        self.entity_nodes: tuple[EntityNode, ...] = tuple(entity_nodes)
        self.edges: tuple[Edge, ...] = tuple(edges)
        if embedding_dim is None:
            embedding_dim = self.text_nodes[0].embedding.shape[0] if self.text_nodes else 0
        self.embedding_dim = int(embedding_dim)
        if _embeddings is not None:
            _embeddings.setflags(write=False)
            self.__dict__["embeddings"] = _embeddings

    def __repr__(self):
        return (
            f"MemoryGraph(text={len(self.text_nodes)}, entities={len(self.entity_nodes)}, "
            f"edges={len(self.edges)}, dim={self.embedding_dim})"
        )

    def __len__(self):
        return len(self.text_nodes)

    def __eq__(self, other):
        if not isinstance(other, MemoryGraph):
            return NotImplemented
        return (
            self.embedding_dim == other.embedding_dim
            and self.text_nodes == other.text_nodes
            and self.entity_nodes == other.entity_nodes
            and self.edges == other.edges
        )

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def text_ids(self) -> np.ndarray:
        ids = np.fromiter((n.id for n in self.text_nodes), dtype=np.int64, count=len(self.text_nodes))
        ids.setflags(write=False)
        return ids

    @cached_property
    def clips(self) -> np.ndarray:
        clips = np.fromiter((n.clip for n in self.text_nodes), dtype=np.int64, count=len(self.text_nodes))
        clips.setflags(write=False)
        return clips

    @cached_property
    def embeddings(self) -> np.ndarray:
        """Stacked ``(N, D)`` embedding matrix. Requires consistent dimensions."""
        if not self.text_nodes:
            out = np.zeros((0, self.embedding_dim))
        else:
            out = np.ascontiguousarray(np.stack([n.embedding for n in self.text_nodes]))
        out.setflags(write=False)
        return out

    @cached_property
    def index_of(self) -> dict[int, int]:
        return {n.id: i for i, n in enumerate(self.text_nodes)}

    @cached_property
    def segments(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(segment_clips, segment_of_node, segment_sizes)``; clips ascending."""
        seg_clips, seg_of, sizes = np.unique(self.clips, return_inverse=True, return_counts=True)
        for a in (seg_clips, seg_of, sizes):
            a.setflags(write=False)
        return seg_clips, seg_of.reshape(-1), sizes

    def text_node(self, node_id: int) -> TextNode:
        return self.text_nodes[self.index_of[node_id]]

    def degree(self) -> dict[int, int]:
        """Number of incident edges per text id (absent ids have degree 0)."""
        deg: dict[int, int] = {}
        for e in self.edges:
            deg[e.text_id] = deg.get(e.text_id, 0) + 1
        return deg

    def canonical(self) -> "MemoryGraph":
        """Same graph with nodes sorted by id and edges by (entity, text)."""
        return MemoryGraph(
            sorted(self.text_nodes, key=lambda n: n.id),
            sorted(self.entity_nodes, key=lambda n: n.id),
            sorted(self.edges, key=lambda e: (e.entity_id, e.text_id)),
            self.embedding_dim,
        )


def validate(graph: MemoryGraph) -> ValidationReport:
    """Collect every violated invariant; never raises."""
    out: list[Violation] = []
    add = lambda code, msg, *refs: out.append(Violation(code, msg, tuple(refs)))  # noqa: E731

    if graph.embedding_dim <= 0 and graph.text_nodes:
        add("bad dimension", f"embedding_dim must be positive, got {graph.embedding_dim}")

    text_ids: set[int] = set()
    shaped: list[int] = []
    for pos, n in enumerate(graph.text_nodes):
        if n.id in text_ids:
            add("duplicate id", f"duplicate text node id {n.id}", n.id)
        text_ids.add(n.id)
        if n.id < 0:
            add("negative id", f"text node id {n.id} is negative", n.id)
        if n.clip < 0:
            add("negative clip", f"text node {n.id} has negative clip {n.clip}", n.id)
        emb = n.embedding
        if emb.ndim != 1 or emb.shape[0] != graph.embedding_dim:
            add(
                "dimension mismatch",
                f"text node {n.id} has embedding shape {emb.shape}, expected ({graph.embedding_dim},)",
                n.id,
            )
            continue
        shaped.append(pos)

    # finiteness and unit norm, checked in one pass over the stacked matrix
    if shaped:
        nodes = graph.text_nodes
        if len(shaped) == len(nodes):
            x = graph.embeddings
        else:
            x = np.stack([nodes[p].embedding for p in shaped])
        finite = np.isfinite(x).all(axis=1)
        norms = np.linalg.norm(np.where(finite[:, None], x, 0.0), axis=1)
        for row in np.flatnonzero(~finite | (np.abs(norms - 1.0) > NORM_TOL)):
            n = nodes[shaped[row]]
            if not finite[row]:
                add("non-finite embedding", f"text node {n.id} has non-finite embedding entries", n.id)
            else:
                add("non-unit embedding", f"text node {n.id} embedding norm {norms[row]!r} is not 1", n.id)

    entity_ids: set[int] = set()
    for ent in graph.entity_nodes:
        if ent.id in entity_ids:
            add("duplicate id", f"duplicate entity node id {ent.id}", ent.id)
        entity_ids.add(ent.id)
        if ent.id < 0:
            add("negative id", f"entity node id {ent.id} is negative", ent.id)
        if not isinstance(ent.kind, EntityKind):
            add("bad kind", f"entity node {ent.id} has kind {ent.kind!r}", ent.id)

    pairs: set[tuple[int, int]] = set()
    for e in graph.edges:
        ref = (e.entity_id, e.text_id)
        if e.entity_id not in entity_ids:
            add("dangling edge", f"edge {ref} references missing entity {e.entity_id}", *ref)
        if e.text_id not in text_ids:
            add("dangling edge", f"edge {ref} references missing text node {e.text_id}", *ref)
        if ref in pairs:
            add("duplicate edge", f"edge {ref} appears more than once", *ref)
        pairs.add(ref)
        if not (math.isfinite(e.weight) and e.weight >= 0):
            add("negative weight", f"edge {ref} has invalid weight {e.weight!r}", *ref)
    return ValidationReport(out)


def partition_connectivity(graph: MemoryGraph) -> tuple[list[int], list[int]]:
    """Split text ids into (isolated, connected), preserving graph order."""
    touched = {e.text_id for e in graph.edges}
    isolated = [n.id for n in graph.text_nodes if n.id not in touched]
    connected = [n.id for n in graph.text_nodes if n.id in touched]
    return isolated, connected


def remove_text_nodes(graph: MemoryGraph, ids: Iterable[int]) -> MemoryGraph:
    """Return a copy of ``graph`` without ``ids`` and their incident edges.

    Entity nodes are always kept, even when their degree drops to zero.
    """
    drop = set(int(i) for i in ids)
    unknown = drop - set(graph.index_of)
    if unknown:
        raise GraphError(f"unknown text ids: {sorted(unknown)[:10]}")
    if not drop:
        return graph
    keep = np.fromiter((n.id not in drop for n in graph.text_nodes), dtype=bool, count=len(graph))
    text_nodes = [n for n, k in zip(graph.text_nodes, keep) if k]
    edges = [e for e in graph.edges if e.text_id not in drop]
    embeddings = None
    if "embeddings" in graph.__dict__:
        embeddings = np.ascontiguousarray(graph.embeddings[keep])
    return MemoryGraph(text_nodes, graph.entity_nodes, edges, graph.embedding_dim, _embeddings=embeddings)


def retain_text_nodes(graph: MemoryGraph, ids: Iterable[int]) -> MemoryGraph:
    keep = set(int(i) for i in ids)
    return remove_text_nodes(graph, [n.id for n in graph.text_nodes if n.id not in keep])


# -- serialization -----------------------------------------------------------


def to_dict(graph: MemoryGraph) -> dict:
    g = graph.canonical()
    return {
        "embedding_dim": g.embedding_dim,
        "text_nodes": [
            {"id": n.id, "content": n.content, "embedding": [float(x) for x in n.embedding], "clip": n.clip}
            for n in g.text_nodes
        ],
        "entity_nodes": [{"id": e.id, "kind": e.kind.value, "label": e.label} for e in g.entity_nodes],
        "edges": [{"entity": e.entity_id, "text": e.text_id, "weight": float(e.weight)} for e in g.edges],
    }


def dumps(graph: MemoryGraph) -> str:
    report = validate(graph)
    if not report.ok:
        raise GraphValidationError(report.violations)
    # json emits repr() floats, which round-trip exactly
    return json.dumps(to_dict(graph), ensure_ascii=False, allow_nan=False, indent=1)


def save(graph: MemoryGraph, path: str | Path) -> None:
    Path(path).write_text(dumps(graph) + "\n", encoding="utf-8")


def _field(obj: dict, key: str, where: str, kind):
    if not isinstance(obj, dict):
        raise GraphFormatError(f"{where}: expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise GraphFormatError(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise GraphFormatError(f"{where}.{key}: expected integer, got {value!r}")
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise GraphFormatError(f"{where}.{key}: expected number, got {value!r}")
    if kind is str and not isinstance(value, str):
        raise GraphFormatError(f"{where}.{key}: expected string, got {value!r}")
    if kind is list and not isinstance(value, list):
        raise GraphFormatError(f"{where}.{key}: expected array, got {type(value).__name__}")
    return value


def _renormalize(v: np.ndarray) -> np.ndarray:
    # already-unit vectors are left bit-identical so save/load is a fixed point
    norm = float(np.linalg.norm(v))
    if math.isfinite(norm) and abs(norm - 1.0) <= 1e-15:
        return v
    return normalize(v)


def from_dict(data: dict) -> MemoryGraph:
    """Build a canonical, validated graph from parsed JSON.

    Embeddings are re-normalized. Raises :class:`GraphFormatError` for schema
    problems and :class:`GraphValidationError` for invariant violations.
    """
    dim = _field(data, "embedding_dim", "graph", int)
    if dim <= 0:
        raise GraphFormatError(f"graph.embedding_dim: must be positive, got {dim}")
    text_nodes = []
    for i, raw in enumerate(_field(data, "text_nodes", "graph", list)):
        where = f"text_nodes[{i}]"
        emb = _field(raw, "embedding", where, list)
        if len(emb) != dim:
            raise GraphFormatError(f"{where}.embedding: dimension mismatch, got {len(emb)}, expected {dim}")
        for j, x in enumerate(emb):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise GraphFormatError(f"{where}.embedding[{j}]: expected number, got {x!r}")
        try:
            vec = _renormalize(np.asarray(emb, dtype=np.float64))
        except ValueError as exc:
            raise GraphFormatError(f"{where}.embedding: {exc}") from None
        text_nodes.append(
            TextNode(
                _field(raw, "id", where, int),
                _field(raw, "content", where, str),
                vec,
                _field(raw, "clip", where, int),
            )
        )
    entity_nodes = []
    for i, raw in enumerate(data.get("entity_nodes", [])):
        where = f"entity_nodes[{i}]"
        kind = _field(raw, "kind", where, str)
        try:
            kind = EntityKind(kind)
        except ValueError:
            raise GraphFormatError(f"{where}.kind: expected 'face' or 'voice', got {kind!r}") from None
        entity_nodes.append(EntityNode(_field(raw, "id", where, int), kind, raw.get("label", "")))
    edges = []
    for i, raw in enumerate(data.get("edges", [])):
        where = f"edges[{i}]"
        edges.append(
            Edge(
                _field(raw, "entity", where, int),
                _field(raw, "text", where, int),
                float(_field(raw, "weight", where, float)),
            )
        )
    graph = MemoryGraph(text_nodes, entity_nodes, edges, dim).canonical()
    report = validate(graph)
    if not report.ok:
        raise GraphValidationError(report.violations)
    return graph


def loads(text: str) -> MemoryGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return from_dict(data)


def load(path: str | Path) -> MemoryGraph:
    return loads(Path(path).read_text(encoding="utf-8"))
