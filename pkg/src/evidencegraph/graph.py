"""Directed multigraph of entities and labeled properties, plus path extraction.

Nodes come from three origins: the structured knowledge base, unstructured
triples, and the annotated concepts of the input text.  Edges are directed
statements, but reachability and shortest paths treat the graph as
undirected; each traversed edge remembers its original predicate and the
direction it was walked in.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .errors import UnknownEntityError
from .text import is_numeric

WIKIFIERED = "WIKIFIERED"
MATCH = "MATCH"


class Origin(str, Enum):
    STRUCTURED = "structured"
    UNSTRUCTURED = "unstructured"
    CONCEPT = "concept"


class PathKind(str, Enum):
    SENTENCE_TO_SENTENCE = "sen_sen"
    SENTENCE_TO_TOPIC = "sen_top"


@dataclass(frozen=True)
class EntityRef:
    """A node: knowledge-base entity, unstructured phrase, or annotated concept.

    ``tokens`` holds the lowercased, lemmatized tokens of the label and is
    what MATCH-merging operates on.
    """

    id: str
    label: str
    tokens: tuple[str, ...] = ()
    origin: Origin = Origin.STRUCTURED


@dataclass(frozen=True)
class PropertyRef:
    id: str
    label: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("property id must be nonempty")


@dataclass(frozen=True)
class Statement:
    """One directed edge subject --predicate--> object.

    ``provenance`` is bookkeeping (e.g. "openied" for match edges created
    during enrichment) and does not participate in edge identity.
    """

    subject: str
    predicate: str
    object: str
    provenance: Optional[str] = field(default=None, compare=False)

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate, self.object)


@dataclass(frozen=True)
class EvidencePath:
    """Alternating entity/property sequence e0, p0, e1, ..., en.

    ``directions[i]`` is True when edge i was traversed subject->object.
    """

    elements: tuple[str, ...]
    kind: PathKind
    directions: tuple[bool, ...] = ()

    def __post_init__(self):
        if len(self.elements) % 2 != 1:
            raise ValueError("path must end on an entity (odd element count)")

    @property
    def entities(self) -> tuple[str, ...]:
        return self.elements[0::2]

    @property
    def properties(self) -> tuple[str, ...]:
        return self.elements[1::2]

    @property
    def num_edges(self) -> int:
        return len(self.elements) // 2


class KnowledgeGraph:
    """Directed multigraph; duplicate (subject, predicate, object) triples collapse."""

    def __init__(self):
        self.nodes: dict[str, EntityRef] = {}
        self.edges: list[Statement] = []
        self.properties: dict[str, PropertyRef] = {}
        self._edge_keys: set[tuple[str, str, str]] = set()
        # undirected adjacency: node -> [(neighbor, statement, walked_forward)]
        self._adj: dict[str, list[tuple[str, Statement, bool]]] = {}

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def ensure_node(self, meta: EntityRef) -> None:
        """Insert a node, keeping existing metadata except id-placeholder labels.

        A node first seen without a real label (label == id) is upgraded when
        a later statement supplies one.
        """
        existing = self.nodes.get(meta.id)
        if existing is None:
            self.nodes[meta.id] = meta
            self._adj[meta.id] = []
        elif existing.label == existing.id and meta.label != meta.id:
            self.nodes[meta.id] = meta

    def add_statement(
        self,
        statement: Statement,
        subject_meta: EntityRef,
        object_meta: EntityRef,
        property_meta: Optional[PropertyRef] = None,
    ) -> "KnowledgeGraph":
        """Upsert both endpoints and the edge; idempotent for identical triples."""
        if statement.subject != subject_meta.id or statement.object != object_meta.id:
            raise ValueError("statement endpoints do not match the supplied metadata")
        self.ensure_node(subject_meta)
        self.ensure_node(object_meta)
        if property_meta is not None:
            self.properties.setdefault(property_meta.id, property_meta)
        else:
            self.properties.setdefault(statement.predicate, PropertyRef(statement.predicate, statement.predicate))
        key = statement.as_tuple()
        if key in self._edge_keys:
            return self
        self._edge_keys.add(key)
        self.edges.append(statement)
        self._adj[statement.subject].append((statement.object, statement, True))
        if statement.object != statement.subject:
            self._adj[statement.object].append((statement.subject, statement, False))
        return self

    def neighbors(self, node_id: str) -> list[tuple[str, Statement, bool]]:
        if node_id not in self.nodes:
            raise UnknownEntityError(node_id)
        return self._adj[node_id]

    def copy(self) -> "KnowledgeGraph":
        dup = KnowledgeGraph()
        for node in self.nodes.values():
            dup.ensure_node(node)
        dup.properties = dict(self.properties)
        for stmt in self.edges:
            dup._edge_keys.add(stmt.as_tuple())
            dup.edges.append(stmt)
            dup._adj[stmt.subject].append((stmt.object, stmt, True))
            if stmt.object != stmt.subject:
                dup._adj[stmt.object].append((stmt.subject, stmt, False))
        return dup


def shortest_path(
    graph: KnowledgeGraph, src: str, dst: str, kind: PathKind = PathKind.SENTENCE_TO_SENTENCE
) -> Optional[EvidencePath]:
    """Minimum-hop simple path over the undirected view, or None if disconnected.

    Among equal-length paths the lexicographically smallest entity-id
    sequence wins; among parallel edges between a node pair the smallest
    (predicate id, forward-first) pair is recorded.
    """
    if src not in graph.nodes:
        raise UnknownEntityError(src)
    if dst not in graph.nodes:
        raise UnknownEntityError(dst)
    if src == dst:
        return EvidencePath(elements=(src,), kind=kind, directions=())

    dist = _bfs_distances(graph, dst)
    if src not in dist:
        return None

    # Walk forward greedily: at each step pick the smallest-id neighbor that
    # still lies on some shortest path towards dst.
    elements: list[str] = [src]
    directions: list[bool] = []
    current = src
    remaining = dist[src]
    while current != dst:
        candidates = [
            (nbr, stmt, fwd)
            for nbr, stmt, fwd in graph.neighbors(current)
            if dist.get(nbr, -1) == remaining - 1
        ]
        nbr = min(c[0] for c in candidates)
        stmt, fwd = min(
            ((s, f) for n, s, f in candidates if n == nbr),
            key=lambda sf: (sf[0].predicate, not sf[1]),
        )
        elements.extend([stmt.predicate, nbr])
        directions.append(fwd)
        current = nbr
        remaining -= 1
    return EvidencePath(elements=tuple(elements), kind=kind, directions=tuple(directions))


def _bfs_distances(graph: KnowledgeGraph, source: str) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for nbr, _stmt, _fwd in graph.neighbors(node):
            if nbr not in dist:
                dist[nbr] = dist[node] + 1
                queue.append(nbr)
    return dist


def match_nodes(a: EntityRef, b: EntityRef, stopwords: frozenset[str] | set[str]) -> bool:
    """True iff the nodes share a usable token.

    Usable: not a stopword, not purely numeric, longer than two characters.
    Symmetric by construction.
    """
    shared = set(a.tokens) & set(b.tokens)
    return any(len(t) > 2 and not is_numeric(t) and t not in stopwords for t in shared)


def merge_graphs(
    structured: KnowledgeGraph,
    unstructured: KnowledgeGraph,
    stopwords: frozenset[str] | set[str],
) -> KnowledgeGraph:
    """Union of both graphs plus a MATCH edge pair per matching cross-graph node pair.

    Node ids are expected to be disjoint (unstructured ids are namespaced at
    creation time); matching runs over all structured x unstructured pairs
    and emits both edge directions so the link is usable either way.
    """
    merged = KnowledgeGraph()
    for source in (structured, unstructured):
        for node in source.nodes.values():
            merged.ensure_node(node)
        for prop in source.properties.values():
            merged.properties.setdefault(prop.id, prop)
        for stmt in source.edges:
            merged.add_statement(stmt, merged.nodes[stmt.subject], merged.nodes[stmt.object])
    merged.properties.setdefault(MATCH, PropertyRef(MATCH, MATCH))
    for a_id in sorted(structured.nodes):
        for b_id in sorted(unstructured.nodes):
            a, b = structured.nodes[a_id], unstructured.nodes[b_id]
            if match_nodes(a, b, stopwords):
                merged.add_statement(Statement(a.id, MATCH, b.id), a, b)
                merged.add_statement(Statement(b.id, MATCH, a.id), b, a)
    return merged


def extract_evidence(
    graph: KnowledgeGraph,
    topic_concepts: Iterable[str],
    sentence_concepts: Iterable[str],
) -> list[EvidencePath]:
    """Shortest paths between concept pairs.

    One path per unordered sentence-concept pair (sentence-to-sentence) and
    one per (topic concept, sentence concept) pair (sentence-to-topic).
    Zero-edge paths (identical concepts) and disconnected pairs are dropped.
    """
    topic_ids = list(topic_concepts)
    sentence_ids = list(sentence_concepts)
    for cid in topic_ids + sentence_ids:
        if cid not in graph.nodes:
            raise UnknownEntityError(cid)

    paths: list[EvidencePath] = []
    for i in range(len(sentence_ids)):
        for j in range(i + 1, len(sentence_ids)):
            path = shortest_path(graph, sentence_ids[i], sentence_ids[j], PathKind.SENTENCE_TO_SENTENCE)
            if path is not None and path.num_edges > 0:
                paths.append(path)
    for t in topic_ids:
        for s in sentence_ids:
            path = shortest_path(graph, t, s, PathKind.SENTENCE_TO_TOPIC)
            if path is not None and path.num_edges > 0:
                paths.append(path)
    return paths
