"""Embedding-gated breadth-first construction of the structured-knowledge graph.

The traversal seeds the graph with concept->entity anchor edges, then grows
it level by level.  Each frontier entity costs exactly one knowledge-base
query covering the whole property set; every newly discovered object entity
must pass the cosine gate (or have no embedded label token) before it joins
the frontier.  Edges into entities that are already part of the graph are
always kept, so cross-links and cycles between admitted nodes survive.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .annotate import ConceptAnnotation, concept_node_id
from .graph import WIKIFIERED, EntityRef, KnowledgeGraph, Origin, PropertyRef, Statement
from .sparql import SparqlClient
from .text import label_tokens
from .vectors import EmbeddingTable, GateOutcome, SentenceVector, gate, sentence_vector

GATE_DISABLED = -1.0


@dataclass
class TraversalConfig:
    cosine_threshold: float = 0.4
    max_nodes: int = 600
    max_depth: int = 10
    per_entity_result_limit: int = 500

    def __post_init__(self):
        if self.max_nodes < 1 or self.max_depth < 1:
            raise ValueError("max_nodes and max_depth must be >= 1")

    @property
    def gate_enabled(self) -> bool:
        return self.cosine_threshold > GATE_DISABLED


@dataclass
class TraversalStats:
    depth_reached: int = 0
    nodes_visited: int = 0
    edges_added: int = 0
    queries_issued: int = 0
    gate_rejections: int = 0
    wall_time: float = 0.0
    truncated: bool = False
    queries_per_depth: list[int] = field(default_factory=list)


def seed_graph(annotations: Sequence[ConceptAnnotation]) -> tuple[KnowledgeGraph, list[str]]:
    """Anchor every annotated concept to its entity with a WIKIFIERED edge.

    Returns the seeded graph and the seed entity ids in first-seen order.
    The annotation carries no entity label, so the surface form stands in
    for it until (and unless) a query supplies a better one.
    """
    graph = KnowledgeGraph()
    seeds: list[str] = []
    for ann in annotations:
        concept = EntityRef(
            id=concept_node_id(ann.surface),
            label=ann.surface,
            tokens=tuple(label_tokens(ann.surface)),
            origin=Origin.CONCEPT,
        )
        entity = EntityRef(
            id=ann.entity_id,
            label=ann.surface,
            tokens=tuple(label_tokens(ann.surface)),
            origin=Origin.STRUCTURED,
        )
        graph.add_statement(
            Statement(concept.id, WIKIFIERED, entity.id),
            concept,
            entity,
            PropertyRef(WIKIFIERED, WIKIFIERED),
        )
        if ann.entity_id not in seeds:
            seeds.append(ann.entity_id)
    return graph, seeds


def dynamic_bfs(
    sentence: str,
    annotations: Sequence[ConceptAnnotation],
    properties: Sequence[str],
    table: EmbeddingTable,
    client: SparqlClient,
    config: TraversalConfig,
) -> tuple[KnowledgeGraph, TraversalStats]:
    """Grow the sentence-specific graph; returns it with traversal statistics."""
    if not annotations:
        raise ValueError("traversal needs at least one concept annotation")
    if not properties:
        raise ValueError("traversal needs a nonempty property set")

    started = time.perf_counter()
    stats = TraversalStats()
    graph, seeds = seed_graph(annotations)

    v_s: SentenceVector | None = None
    if config.gate_enabled:
        v_s = sentence_vector(sentence, table)

    visited: set[str] = set()
    queued: set[str] = set(seeds)
    frontier: list[str] = list(seeds)
    level: dict[str, int] = {s: 0 for s in seeds}  # hop distance from the seeds
    iteration = 0

    while frontier and iteration < config.max_depth and len(visited) < config.max_nodes:
        iteration += 1
        queries_this_depth = 0
        next_frontier: list[str] = []
        for entity_id in frontier:
            queued.discard(entity_id)
            if entity_id in visited:
                continue
            if len(visited) >= config.max_nodes:
                stats.truncated = True
                break
            visited.add(entity_id)
            neighborhood = client.query_entity(
                entity_id, properties, limit=config.per_entity_result_limit
            )
            stats.queries_issued += 1
            queries_this_depth += 1
            for stmt in neighborhood.statements:
                obj_id = stmt.object
                if obj_id in visited or obj_id in queued or obj_id in graph:
                    # node already admitted; keep the edge so cycles and
                    # cross-links between admitted nodes are not lost
                    graph.add_statement(stmt, graph.nodes[stmt.subject], _object_ref(neighborhood, obj_id))
                    stats.edges_added += 1
                    continue
                if v_s is not None:
                    label = neighborhood.object_labels.get(obj_id, obj_id)
                    decision = gate(label, v_s, table, config.cosine_threshold)
                    if decision.outcome is GateOutcome.REJECT:
                        stats.gate_rejections += 1
                        continue
                graph.add_statement(stmt, graph.nodes[stmt.subject], _object_ref(neighborhood, obj_id))
                stats.edges_added += 1
                queued.add(obj_id)
                next_frontier.append(obj_id)
                level[obj_id] = level[entity_id] + 1
        stats.queries_per_depth.append(queries_this_depth)
        frontier = next_frontier

    # searchable depth: deepest hop level any discovered entity sits at
    stats.depth_reached = max(level.values(), default=0)
    stats.nodes_visited = len(visited)
    stats.wall_time = time.perf_counter() - started
    return graph, stats


def _object_ref(neighborhood, obj_id: str) -> EntityRef:
    label = neighborhood.object_labels.get(obj_id, obj_id)
    return EntityRef(
        id=obj_id, label=label, tokens=tuple(label_tokens(label)), origin=Origin.STRUCTURED
    )
