"""Context-specific property selection.

Given the entities annotated in a (topic, sentence) pair, the selector
trains a topic model on their encyclopedia articles, ranks the resulting
topic words against the knowledge base's property descriptions with TF-IDF,
and returns the most frequently mentioned properties whose base-wide usage
count clears a floor.  This is what keeps the graph traversal from fanning
out over thousands of irrelevant edge labels.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyCorpusError
from .graph import EntityRef
from .text import preprocess

logger = logging.getLogger(__name__)


@dataclass
class SelectionConfig:
    tfidf_threshold: float = 2.5
    count_threshold: int = 1000
    num_topics: int = 5
    num_properties: int = 50
    lda_iterations: int = 200
    words_per_topic: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.num_topics < 1 or self.num_properties < 1 or self.lda_iterations < 1:
            raise ValueError("num_topics, num_properties and lda_iterations must be >= 1")


@dataclass
class PropertyDescription:
    id: str
    label: str
    description: str
    count: int = 0

    @property
    def info(self) -> str:
        return f"{self.label} {self.description}".strip()


@dataclass
class TopicModel:
    topic_word: np.ndarray  # num_topics x vocabulary
    doc_topic: np.ndarray  # documents x num_topics
    vocabulary: list[str]


@dataclass
class TfidfMatrix:
    matrix: np.ndarray  # words x documents
    words: list[str]
    cumulative: np.ndarray  # per-word row sums

    def score(self, word: str) -> float:
        return float(self.cumulative[self.words.index(word)])


def load_property_descriptions(path: str | Path) -> list[PropertyDescription]:
    """Parse the property TSV: id, usage count, label, description per line."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        pid, count, label, description = line.split("\t", 3)
        out.append(PropertyDescription(id=pid, label=label, description=description, count=int(count)))
    return out


def load_articles(entities: Sequence[EntityRef], article_dir: str | Path) -> tuple[list[str], int]:
    """Read one ``<entity id>.txt`` article per entity; absent files are skipped.

    Returns the documents plus the number of entities without an article.
    """
    documents = []
    missing = 0
    for entity in entities:
        path = Path(article_dir) / f"{entity.id}.txt"
        if not path.exists():
            logger.warning("no article for entity %s", entity.id)
            missing += 1
            continue
        documents.append(path.read_text(encoding="utf-8"))
    return documents, missing


class GibbsSampler:
    """Collapsed Gibbs sampler with symmetric priors alpha = 50/K, beta = 0.01."""

    def __init__(self, corpus: list[list[str]], num_topics: int, seed: int):
        self.vocabulary = sorted({t for doc in corpus for t in doc})
        if not corpus or not self.vocabulary:
            raise EmptyCorpusError("cannot train a topic model on an empty corpus")
        self.index = {t: i for i, t in enumerate(self.vocabulary)}
        self.num_topics = num_topics
        self.alpha = 50.0 / num_topics
        self.beta = 0.01
        self.rng = np.random.default_rng(seed)

        self.docs = [[self.index[t] for t in doc] for doc in corpus]
        V, K, D = len(self.vocabulary), num_topics, len(corpus)
        self.n_kt = np.zeros((K, V), dtype=np.int64)
        self.n_k = np.zeros(K, dtype=np.int64)
        self.n_mk = np.zeros((D, K), dtype=np.int64)
        self.assignments = []
        for m, doc in enumerate(self.docs):
            z = self.rng.integers(0, K, size=len(doc))
            self.assignments.append(z)
            for t, k in zip(doc, z):
                self.n_kt[k, t] += 1
                self.n_k[k] += 1
                self.n_mk[m, k] += 1

    @property
    def total_assigned(self) -> int:
        return int(self.n_k.sum())

    def sweep(self) -> None:
        V = len(self.vocabulary)
        for m, doc in enumerate(self.docs):
            z = self.assignments[m]
            for n, t in enumerate(doc):
                k = z[n]
                self.n_kt[k, t] -= 1
                self.n_k[k] -= 1
                self.n_mk[m, k] -= 1
                weights = (self.n_kt[:, t] + self.beta) / (self.n_k + V * self.beta)
                weights *= self.n_mk[m] + self.alpha
                weights /= weights.sum()
                k = int(np.searchsorted(np.cumsum(weights), self.rng.random()))
                k = min(k, self.num_topics - 1)
                z[n] = k
                self.n_kt[k, t] += 1
                self.n_k[k] += 1
                self.n_mk[m, k] += 1

    def to_model(self) -> TopicModel:
        V = len(self.vocabulary)
        topic_word = (self.n_kt + self.beta) / (self.n_k + V * self.beta)[:, None]
        doc_lengths = self.n_mk.sum(axis=1)
        doc_topic = (self.n_mk + self.alpha) / (doc_lengths + self.num_topics * self.alpha)[:, None]
        return TopicModel(topic_word=topic_word, doc_topic=doc_topic, vocabulary=self.vocabulary)


def train_lda(corpus: list[list[str]], config: SelectionConfig) -> TopicModel:
    """Run the sampler for the configured number of sweeps; seeded, deterministic."""
    sampler = GibbsSampler(corpus, config.num_topics, config.seed)
    for _ in range(config.lda_iterations):
        sampler.sweep()
    return sampler.to_model()


def top_topic_words(
    model: TopicModel, words_per_topic: int, stopwords: frozenset[str] | set[str]
) -> list[str]:
    """Union of each topic's top-k words, stopwords dropped, first seen wins."""
    if words_per_topic < 1:
        raise ValueError("words_per_topic must be >= 1")
    seen: list[str] = []
    for k in range(model.topic_word.shape[0]):
        row = model.topic_word[k]
        ranked = sorted(zip(-row, model.vocabulary))[:words_per_topic]
        for _, word in ranked:
            if word not in stopwords and word not in seen:
                seen.append(word)
    return seen


def _info_tokens(description: PropertyDescription) -> list[str]:
    # lemmatize/lowercase like the article pipeline but keep stopwords; they
    # can never collide with ranked words, which are stopword-free
    return preprocess(description.info, frozenset())


def tfidf_matrix(words: Iterable[str], descriptions: Sequence[PropertyDescription]) -> TfidfMatrix:
    """Raw term counts against description documents, idf = ln(N / df)."""
    words = list(words)
    docs = [Counter(_info_tokens(d)) for d in descriptions]
    n_docs = len(docs)
    matrix = np.zeros((len(words), n_docs), dtype=np.float64)
    for i, w in enumerate(words):
        df = sum(1 for doc in docs if doc[w] > 0)
        if df == 0:
            continue
        idf = math.log(n_docs / df)
        for j, doc in enumerate(docs):
            matrix[i, j] = doc[w] * idf
    return TfidfMatrix(matrix=matrix, words=words, cumulative=matrix.sum(axis=1))


def rank_by_tfidf(
    words: Iterable[str], descriptions: Sequence[PropertyDescription], tfidf_threshold: float
) -> list[str]:
    """Words whose cumulative score clears the threshold, best first."""
    if not descriptions:
        raise ValueError("property descriptions must be nonempty")
    scored = tfidf_matrix(words, descriptions)
    keep = [
        (score, word)
        for word, score in zip(scored.words, scored.cumulative)
        if score >= tfidf_threshold
    ]
    keep.sort(key=lambda sw: (-sw[0], sw[1]))
    return [w for _, w in keep]


def select_properties(
    entities: Sequence[EntityRef],
    descriptions: Sequence[PropertyDescription],
    config: SelectionConfig,
    article_dir: str | Path,
    stopwords: frozenset[str] | set[str],
) -> list[str]:
    """End-to-end property selection for one entity set.

    A property qualifies when any ranked word occurs in its label+description
    text and its knowledge-base usage count exceeds the count threshold;
    qualifiers are ordered by how often ranked words occur in their text.
    """
    documents, missing = load_articles(entities, article_dir)
    if missing:
        logger.warning("%d of %d entities had no article", missing, len(entities))
    corpus = [preprocess(doc, stopwords) for doc in documents]
    model = train_lda(corpus, config)
    words = top_topic_words(model, config.words_per_topic, stopwords)
    ranked = rank_by_tfidf(words, descriptions, config.tfidf_threshold)
    if not ranked:
        return []
    ranked_set = set(ranked)
    scored: list[tuple[int, str]] = []
    for prop in descriptions:
        if prop.count <= config.count_threshold:
            continue
        occurrences = sum(1 for tok in _info_tokens(prop) if tok in ranked_set)
        if occurrences > 0:
            scored.append((occurrences, prop.id))
    scored.sort(key=lambda os: (-os[0], os[1]))
    return [pid for _, pid in scored[: config.num_properties]]
