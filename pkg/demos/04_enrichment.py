"""Unstructured enrichment: pack ranked documents into a bounded corpus,
ingest extracted triples, and join the triple graph to the structured one
with MATCH edges so cross-source paths appear.

Run:  python demos/04_enrichment.py
"""

from evidencegraph import (
    EnrichConfig,
    EntityRef,
    KnowledgeGraph,
    Origin,
    RankedDocument,
    Statement,
    build_corpus,
    collect_sentences,
    enrich,
    ingest_triples,
    shortest_path,
)

stopwords = frozenset("a an and are the of to has have in is".split())

documents = [
    RankedDocument(1, "https://example.org/1",
                   "Donald Trump has a lot of power. Yes. "
                   "Members of politics in general have power."),
    RankedDocument(2, "https://example.org/2",
                   "Short. People demand real answers now."),
]

config = EnrichConfig(max_urls=3, max_annotations=10, max_chars=500, min_chars=400)

sentences = collect_sentences(documents, config)
print(f"sentences kept (>= 3 words, deduplicated): {len(sentences)}")
for s in sentences:
    print(f"  - {s}")

corpus = build_corpus(sentences, config)
print(f"\ncorpus: {corpus.length} chars, underfilled={corpus.underfilled}")

triples, skipped = ingest_triples(corpus.text, config, from_corpus=True)
print(f"\nfallback extractor found {len(triples)} triple(s):")
for t in triples:
    print(f"  ({t.subject} | {t.predicate} | {t.object})")

# structured side: one annotated concept anchored to its entity
g = KnowledgeGraph()
concept = EntityRef("concept:donald trump", "Donald Trump", ("donald", "trump"), Origin.CONCEPT)
entity = EntityRef("Q22686", "Donald Trump", ("donald", "trump"), Origin.STRUCTURED)
g.add_statement(Statement(concept.id, "WIKIFIERED", entity.id), concept, entity)

merged, stats = enrich(g, documents, config, stopwords)
print(f"\nmerged graph: {merged.num_nodes} nodes, {stats.match_edges} MATCH edges")
path = shortest_path(merged, "concept:donald trump", "oie:power")
if path:
    print("cross-source path to the triple graph:")
    print("  " + " -> ".join(path.elements))
