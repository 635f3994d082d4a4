"""Select context-specific knowledge-base properties for a topic: train a
topic model on entity articles, rank its words against property
descriptions with TF-IDF, keep the best-matched frequent properties.

Run:  python demos/02_property_selection.py
"""

import tempfile
from pathlib import Path

from evidencegraph import EntityRef, SelectionConfig, select_properties, train_lda
from evidencegraph.datasets import ARTICLES, ENTITY_LABELS, PROPERTY_ROWS, STOPWORD_LINES
from evidencegraph.text import preprocess
from evidencegraph.topics import PropertyDescription, rank_by_tfidf, top_topic_words

stopwords = frozenset(STOPWORD_LINES)
descriptions = [
    PropertyDescription(pid, label, desc, count) for pid, count, label, desc in PROPERTY_ROWS
]

# articles for the gun-cluster entities, staged on disk as the loader expects
article_dir = Path(tempfile.mkdtemp(prefix="articles_"))
entity_ids = [f"Q80{i}" for i in range(1, 10)] + ["Q810"]
for eid in entity_ids:
    (article_dir / f"{eid}.txt").write_text(ARTICLES[eid])
entities = [EntityRef(eid, ENTITY_LABELS[eid], (ENTITY_LABELS[eid],)) for eid in entity_ids]

config = SelectionConfig(
    tfidf_threshold=2.0,
    count_threshold=1000,
    num_topics=3,
    num_properties=6,
    lda_iterations=100,
    seed=7,
)

# step by step, to show the intermediate artifacts ----------------------
corpus = [preprocess((article_dir / f"{e.id}.txt").read_text(), stopwords) for e in entities]
model = train_lda(corpus, config)
print("top words per topic:")
for k in range(config.num_topics):
    order = model.topic_word[k].argsort()[::-1][:6]
    print(f"  topic {k}: " + ", ".join(model.vocabulary[i] for i in order))

words = top_topic_words(model, config.words_per_topic, stopwords)
ranked = rank_by_tfidf(words, descriptions, config.tfidf_threshold)
print(f"\nwords clearing the TF-IDF threshold ({config.tfidf_threshold}): {ranked}")

selected = select_properties(entities, descriptions, config, article_dir, stopwords)
print("\nselected properties:")
for pid in selected:
    desc = next(d for d in descriptions if d.id == pid)
    print(f"  {pid:6s} {desc.label:12s} (usage count {desc.count})")
print("\nproperties failing the usage-count floor are never selected,"
      "\nno matter how well their description matches.")
