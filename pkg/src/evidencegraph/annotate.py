"""Concept annotation ingestion plus a naive fallback entity linker.

The real entity linker is an external web service; the pipeline consumes its
output as a JSON document per instance:

    {"topic_concepts":    [{"surface": ..., "entity_id": ..., "rank_score": ...}, ...],
     "sentence_concepts": [...]}

The fallback linker exists so fixtures and demos can be generated offline:
it does exact lowercase label matching against a local entity-label table,
scoring longer matches higher.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import ConfigError
from .text import tokenize


class AnnotationSource(str, Enum):
    TOPIC = "topic"
    SENTENCE = "sentence"


@dataclass(frozen=True)
class ConceptAnnotation:
    surface: str
    entity_id: str
    rank_score: float
    source: AnnotationSource

    def __post_init__(self):
        if not self.entity_id:
            raise ValueError("annotation needs a nonempty entity id")


def concept_node_id(surface: str) -> str:
    """Graph node id for an annotated span; identical surfaces share a node."""
    return "concept:" + " ".join(tokenize(surface))


def _take_top(entries: list[dict], k: int, source: AnnotationSource) -> list[ConceptAnnotation]:
    annotations = [
        ConceptAnnotation(
            surface=e["surface"],
            entity_id=e["entity_id"],
            rank_score=float(e.get("rank_score", 0.0)),
            source=source,
        )
        for e in entries
    ]
    annotations.sort(key=lambda a: (-a.rank_score, a.entity_id))
    return annotations[:k]


def load_annotations(path: str | Path, k_s: int, k_t: int) -> list[ConceptAnnotation]:
    """Top-k_t topic and top-k_s sentence concepts by rank score.

    Fewer concepts than requested is fine; malformed JSON is a ConfigError.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        topic = _take_top(doc.get("topic_concepts", []), k_t, AnnotationSource.TOPIC)
        sentence = _take_top(doc.get("sentence_concepts", []), k_s, AnnotationSource.SENTENCE)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad annotation file {path}: {exc}") from exc
    return topic + sentence


def naive_link(text: str, label_table: dict[str, str], source: AnnotationSource) -> list[ConceptAnnotation]:
    """Exact lowercase label matching against a local entity-label table.

    ``label_table`` maps lowercased labels (possibly multi-word) to entity
    ids.  Longer matches score higher; each distinct surface is annotated
    once.
    """
    tokens = tokenize(text)
    found: dict[str, ConceptAnnotation] = {}
    max_len = max((len(label.split()) for label in label_table), default=0)
    for n in range(max_len, 0, -1):
        for i in range(0, len(tokens) - n + 1):
            surface = " ".join(tokens[i : i + n])
            entity_id = label_table.get(surface)
            if entity_id is None or surface in found:
                continue
            found[surface] = ConceptAnnotation(
                surface=surface,
                entity_id=entity_id,
                rank_score=float(n),
                source=source,
            )
    return sorted(found.values(), key=lambda a: (-a.rank_score, a.entity_id))


def write_annotation_file(
    path: str | Path,
    topic_concepts: list[ConceptAnnotation],
    sentence_concepts: list[ConceptAnnotation],
) -> None:
    doc = {
        "topic_concepts": [
            {"surface": a.surface, "entity_id": a.entity_id, "rank_score": a.rank_score}
            for a in topic_concepts
        ],
        "sentence_concepts": [
            {"surface": a.surface, "entity_id": a.entity_id, "rank_score": a.rank_score}
            for a in sentence_concepts
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True), encoding="utf-8")
