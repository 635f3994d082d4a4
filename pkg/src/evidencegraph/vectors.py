"""Word-vector table, averaged sentence vectors, and the cosine admission gate.

An entity whose label has no embedded token cannot be scored; the gate
reports NoCoverage and the traversal keeps such entities so they do not
silently vanish from the graph.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import UnembeddableSentenceError, VectorFormatError
from .text import tokenize


@dataclass
class EmbeddingTable:
    dimension: int
    vectors: dict[str, np.ndarray]

    @property
    def is_valid(self) -> bool:
        return self.dimension > 0

    def __len__(self) -> int:
        return len(self.vectors)

    def get(self, token: str) -> Optional[np.ndarray]:
        return self.vectors.get(token)


@dataclass
class SentenceVector:
    v: np.ndarray
    covered_tokens: int
    total_tokens: int


class GateOutcome(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    NO_COVERAGE = "no_coverage"


@dataclass
class GateDecision:
    outcome: GateOutcome
    max_cosine: Optional[float]  # None when no label token is covered

    @property
    def keeps_node(self) -> bool:
        """Traversal keeps the node on Accept and on NoCoverage."""
        return self.outcome is not GateOutcome.REJECT


def load_vectors(path: str | Path) -> EmbeddingTable:
    """Parse the plain text format: one ``token v1 v2 ... vD`` line per token.

    The dimension is inferred from the first line; any later line with a
    different arity raises VectorFormatError naming the line number.
    """
    vectors: dict[str, np.ndarray] = {}
    dimension = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 2:
                raise VectorFormatError(f"line {lineno}: expected token and values")
            token, values = parts[0], parts[1:]
            if dimension == 0:
                dimension = len(values)
            elif len(values) != dimension:
                raise VectorFormatError(
                    f"line {lineno}: expected {dimension} values, found {len(values)}"
                )
            try:
                vec = np.asarray([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise VectorFormatError(f"line {lineno}: {exc}") from exc
            vectors[token] = vec
    return EmbeddingTable(dimension=dimension, vectors=vectors)


def sentence_vector(sentence: str, table: EmbeddingTable) -> SentenceVector:
    """Average of the vectors of covered tokens; uncovered tokens are skipped."""
    if not table.is_valid:
        raise ValueError("embedding table has dimension 0")
    tokens = tokenize(sentence)
    covered = [table.vectors[t] for t in tokens if t in table.vectors]
    if not covered:
        raise UnembeddableSentenceError(sentence)
    v = np.mean(np.stack(covered), axis=0)
    return SentenceVector(v=v, covered_tokens=len(covered), total_tokens=len(tokens))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; zero vectors get similarity 0 to stay defined."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


_LABEL_SPLIT_RE = re.compile(r"[\s\-]+")


def label_lookup_tokens(label: str) -> list[str]:
    """Lowercase label tokens for vector lookup: split on whitespace and hyphens."""
    return [t for t in _LABEL_SPLIT_RE.split(label.lower()) if t]


def gate(entity_label: str, v_s: SentenceVector, table: EmbeddingTable, t_cos: float) -> GateDecision:
    """Admission check for a newly discovered entity.

    Accept when the best cosine between the sentence vector and any covered
    label token exceeds ``t_cos``; NoCoverage (kept) when no token embeds.
    """
    if not -1.0 < t_cos < 1.0:
        raise ValueError("t_cos must lie strictly inside (-1, 1)")
    best: Optional[float] = None
    for token in label_lookup_tokens(entity_label):
        vec = table.vectors.get(token)
        if vec is None:
            continue
        sim = cosine(v_s.v, vec)
        if best is None or sim > best:
            best = sim
    if best is None:
        return GateDecision(outcome=GateOutcome.NO_COVERAGE, max_cosine=None)
    if best > t_cos:
        return GateDecision(outcome=GateOutcome.ACCEPT, max_cosine=best)
    return GateDecision(outcome=GateOutcome.REJECT, max_cosine=best)
