"""Unstructured-knowledge enrichment from ranked topic documents.

Documents arrive pre-ranked (the live search engine is out of scope); their
sentences are filtered, packed into a bounded corpus, and turned into
(subject, predicate, object) triples, either by parsing the external
extractor's TSV output or by a deliberately simple fallback splitter.  The
triples form a second graph whose nodes are joined to the structured graph
through token-overlap MATCH edges.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .graph import MATCH, EntityRef, KnowledgeGraph, Origin, PropertyRef, Statement, match_nodes
from .text import label_tokens, tokenize

logger = logging.getLogger(__name__)


@dataclass
class EnrichConfig:
    max_urls: int = 3
    max_annotations: int = 600
    max_chars: int = 99999
    min_chars: int = 70000
    min_words_per_sentence: int = 3

    def __post_init__(self):
        if self.min_chars > self.max_chars:
            raise ValueError("min_chars must not exceed max_chars")
        if self.min_words_per_sentence < 3:
            raise ValueError("sentences need at least three words to yield a triple")


@dataclass(frozen=True)
class RankedDocument:
    rank: int
    url: str
    text: str


@dataclass(frozen=True)
class TripleAnnotation:
    confidence: float
    subject: str
    predicate: str
    object: str

    def __post_init__(self):
        if not (self.subject and self.predicate and self.object):
            raise ValueError("triple fields must be nonempty")


@dataclass
class CorpusResult:
    text: str
    length: int
    underfilled: bool
    skipped: int


@dataclass
class EnrichStats:
    sentences_collected: int = 0
    corpus_chars: int = 0
    corpus_underfilled: bool = False
    triples_used: int = 0
    triples_skipped_malformed: int = 0
    unstructured_nodes: int = 0
    match_edges: int = 0


def load_ranked_documents(path: str | Path) -> list[RankedDocument]:
    """Read the JSON-lines document file: one {rank, url, text} object per line."""
    docs = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        docs.append(RankedDocument(rank=int(obj["rank"]), url=obj["url"], text=obj["text"]))
    return docs


_ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "prof", "st", "no", "vs", "etc", "e.g", "i.e", "u.s", "u.k",
}
_SENTENCE_END_RE = re.compile(r"([.!?])\s+")


def split_sentences(text: str) -> list[str]:
    """Period / question / exclamation splitting with an abbreviation guard."""
    out = []
    start = 0
    for m in _SENTENCE_END_RE.finditer(text):
        candidate = text[start : m.end(1)].strip()
        last_word = candidate[:-1].rsplit(None, 1)[-1].lower() if candidate[:-1].strip() else ""
        if last_word.rstrip(".") in _ABBREVIATIONS or (len(last_word) == 1 and last_word.isalpha()):
            continue
        if candidate:
            out.append(candidate)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        out.append(tail)
    return out


def collect_sentences(documents: Sequence[RankedDocument], config: EnrichConfig) -> list[str]:
    """Deduplicated sentences with at least the minimum word count."""
    seen = set()
    kept = []
    for doc in documents:
        for sentence in split_sentences(doc.text):
            if len(sentence.split()) < config.min_words_per_sentence:
                continue
            if sentence in seen:
                continue
            seen.add(sentence)
            kept.append(sentence)
    return kept


def build_corpus(sentences: Sequence[str], config: EnrichConfig) -> CorpusResult:
    """Greedy corpus packing: longest sentences first, hard cap, early stop.

    Sentences are sorted by character length descending (ties lexicographic)
    and appended greedily; any sentence that would push the newline-joined
    total past max_chars is skipped, and packing stops once the total
    reaches min_chars or the list is exhausted.
    """
    ordered = sorted(sentences, key=lambda s: (-len(s), s))
    parts: list[str] = []
    total = 0
    skipped = 0
    for sentence in ordered:
        if total >= config.min_chars:
            break
        cost = len(sentence) if not parts else len(sentence) + 1
        if total + cost > config.max_chars:
            skipped += 1
            continue
        parts.append(sentence)
        total += cost
    text = "\n".join(parts)
    return CorpusResult(
        text=text,
        length=len(text),
        underfilled=len(text) < config.min_chars,
        skipped=skipped,
    )


# crude verb lexicon for the fallback splitter; the real extractor is external
_FALLBACK_VERBS = {
    "is", "are", "was", "were", "has", "have", "had", "can", "could", "will",
    "would", "do", "does", "did", "makes", "make", "made", "gives", "give",
    "needs", "need", "uses", "use", "holds", "hold", "takes", "take",
    "creates", "create", "causes", "cause", "brings", "bring", "keeps",
    "keep", "demands", "demand", "supports", "support", "reduces", "reduce",
}


def _fallback_extract(corpus: str) -> list[TripleAnnotation]:
    """Subject-verb-object split on simple declarative sentences.

    Lower fidelity than the external extractor by design: the first verb
    from a small lexicon splits the sentence; anything without such a verb
    or with an empty side is dropped.
    """
    triples = []
    for sentence in corpus.splitlines():
        words = sentence.strip().rstrip(".!?").split()
        verb_at = next((i for i, w in enumerate(words) if w.lower() in _FALLBACK_VERBS), None)
        if verb_at is None or verb_at == 0 or verb_at == len(words) - 1:
            continue
        triples.append(
            TripleAnnotation(
                confidence=0.5,
                subject=" ".join(words[:verb_at]),
                predicate=words[verb_at],
                object=" ".join(words[verb_at + 1 :]),
            )
        )
    return triples


def ingest_triples(
    source: str | Path,
    config: EnrichConfig,
    from_corpus: bool = False,
) -> tuple[list[TripleAnnotation], int]:
    """Triples from the extractor's TSV file, or from a corpus via the fallback.

    TSV rows are ``confidence<TAB>subject<TAB>predicate<TAB>object``;
    malformed rows are skipped and counted.  Duplicates collapse onto the
    first occurrence, then the list is truncated to max_annotations.
    """
    skipped = 0
    raw: list[TripleAnnotation] = []
    if from_corpus:
        raw = _fallback_extract(str(source))
    else:
        for line in Path(source).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                skipped += 1
                continue
            try:
                raw.append(
                    TripleAnnotation(
                        confidence=float(parts[0]),
                        subject=parts[1],
                        predicate=parts[2],
                        object=parts[3],
                    )
                )
            except ValueError:
                skipped += 1
    seen = set()
    unique = []
    for t in raw:
        key = (t.subject, t.predicate, t.object)
        if key in seen:
            continue
        seen.add(key)
        unique.append(t)
    return unique[: config.max_annotations], skipped


def phrase_node(phrase: str) -> EntityRef:
    return EntityRef(
        id="oie:" + " ".join(tokenize(phrase)),
        label=phrase,
        tokens=tuple(label_tokens(phrase)),
        origin=Origin.UNSTRUCTURED,
    )


def enrich(
    graph: KnowledgeGraph,
    documents: Sequence[RankedDocument],
    config: EnrichConfig,
    stopwords: frozenset[str] | set[str],
    triples_path: Optional[str | Path] = None,
) -> tuple[KnowledgeGraph, EnrichStats]:
    """Merge the triple graph of the top-ranked documents into ``graph``.

    Pre-extracted triples are used when ``triples_path`` is given; otherwise
    the corpus is built from the documents and run through the fallback
    extractor.  Every pre-existing node is tested against each new subject
    and object node; matches produce MATCH edges in both directions, tagged
    with "openied" provenance.
    """
    stats = EnrichStats()
    chosen = sorted(documents, key=lambda d: d.rank)[: config.max_urls]
    sentences = collect_sentences(chosen, config)
    stats.sentences_collected = len(sentences)
    corpus = build_corpus(sentences, config)
    stats.corpus_chars = corpus.length
    stats.corpus_underfilled = corpus.underfilled

    if triples_path is not None:
        triples, skipped = ingest_triples(triples_path, config)
    else:
        triples, skipped = ingest_triples(corpus.text, config, from_corpus=True)
    stats.triples_used = len(triples)
    stats.triples_skipped_malformed = skipped

    merged = graph.copy()
    # snapshot before any additions; matching is strictly cross-source
    structured_side = [n for n in merged.nodes.values() if n.origin is not Origin.UNSTRUCTURED]
    match_prop = PropertyRef(MATCH, MATCH)
    new_nodes: dict[str, EntityRef] = {}
    for triple in triples:
        subject = phrase_node(triple.subject)
        obj = phrase_node(triple.object)
        merged.add_statement(
            Statement(subject.id, triple.predicate, obj.id),
            subject,
            obj,
            PropertyRef(triple.predicate, triple.predicate),
        )
        new_nodes.setdefault(subject.id, subject)
        new_nodes.setdefault(obj.id, obj)

    for existing in structured_side:
        for fresh in new_nodes.values():
            if match_nodes(existing, fresh, stopwords):
                merged.add_statement(
                    Statement(existing.id, MATCH, fresh.id, provenance="openied"),
                    existing,
                    fresh,
                    match_prop,
                )
                merged.add_statement(
                    Statement(fresh.id, MATCH, existing.id, provenance="openied"),
                    fresh,
                    existing,
                    match_prop,
                )
                stats.match_edges += 2
    stats.unstructured_nodes = len(new_nodes)
    return merged, stats
