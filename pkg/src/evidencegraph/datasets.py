"""Deterministic offline demo world: a tiny knowledge base, articles, vectors,
ranked documents, extracted triples, and a 20-sentence labeled dataset.

Everything is fabricated so the whole pipeline runs with no network access:
the knowledge base lives in a dict served through an in-memory SPARQL
transport, and ``build_workspace`` records every query each pipeline variant
will make, so later runs replay bit-identically.  Word vectors are built
from per-cluster axes plus hash-derived noise, which keeps every cosine
decision stable across platforms.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path

import numpy as np

from .annotate import AnnotationSource, naive_link, write_annotation_file
from .vectors import EmbeddingTable

VECTOR_DIM = 16

GUN_TOPIC = "gun control"
SCHOOL_TOPIC = "school uniforms"

ENTITY_LABELS = {
    "Q801": "gun",
    "Q802": "weapon",
    "Q803": "firearm",
    "Q804": "law",
    "Q805": "crime",
    "Q806": "police",
    "Q807": "safety",
    "Q808": "violence",
    "Q809": "regulation",
    "Q810": "control",
    "Q851": "market",
    "Q852": "commerce",
    "Q901": "uniform",
    "Q902": "school",
    "Q903": "dress",
    "Q904": "student",
    "Q905": "discipline",
    "Q906": "clothing",
    "Q907": "teacher",
    "Q908": "education",
    "Q951": "fashion",
    "Q952": "industry",
}

# label -> entity id table for the fallback linker (plural aliases included)
LINKER_TABLE = {
    "gun": "Q801", "guns": "Q801",
    "weapon": "Q802", "weapons": "Q802",
    "firearm": "Q803",
    "law": "Q804", "laws": "Q804",
    "crime": "Q805",
    "police": "Q806",
    "safety": "Q807",
    "violence": "Q808",
    "regulation": "Q809",
    "control": "Q810",
    "uniform": "Q901", "uniforms": "Q901",
    "school": "Q902", "schools": "Q902",
    "dress": "Q903",
    "student": "Q904", "students": "Q904",
    "discipline": "Q905",
    "clothing": "Q906",
    "teacher": "Q907", "teachers": "Q907",
    "education": "Q908",
}

# outgoing statements: subject -> [(property, object, object label)]
WORLD = {
    "Q801": [("P279", "Q802", "weapon")],
    "Q802": [("P31", "Q851", "market")],
    "Q803": [("P279", "Q802", "weapon")],
    "Q804": [("P527", "Q809", "regulation")],
    "Q805": [("P31", "Q808", "violence")],
    "Q806": [("P361", "Q804", "law")],
    "Q807": [("P361", "Q809", "regulation")],
    "Q808": [],
    "Q809": [("P361", "Q810", "control")],
    "Q810": [],
    "Q851": [("P361", "Q810", "control")],
    "Q852": [],
    "Q901": [("P279", "Q906", "clothing"), ("P1542", "Q905", "discipline")],
    "Q902": [("P31", "Q908", "education")],
    "Q903": [("P279", "Q906", "clothing")],
    "Q904": [("P361", "Q902", "school")],
    "Q905": [("P361", "Q908", "education")],
    "Q906": [("P31", "Q951", "fashion")],
    "Q907": [("P361", "Q902", "school")],
    "Q908": [],
    "Q951": [("P361", "Q952", "industry")],
    "Q952": [],
}

# (sentence, label, split) per topic; both labels appear in both splits
SENTENCES = [
    (GUN_TOPIC, "Guns are weapons.", "Argument", "train"),
    (GUN_TOPIC, "A firearm is a weapon.", "Argument", "train"),
    (GUN_TOPIC, "Safety needs regulation.", "NoArgument", "train"),
    (GUN_TOPIC, "The law demands regulation.", "Argument", "train"),
    (GUN_TOPIC, "Police serve the law.", "NoArgument", "train"),
    (GUN_TOPIC, "Crime causes violence.", "NoArgument", "train"),
    (GUN_TOPIC, "Weapons need control.", "Argument", "train"),
    (GUN_TOPIC, "Violence follows crime everywhere.", "NoArgument", "test"),
    (GUN_TOPIC, "Gun owners value safety.", "Argument", "test"),
    (GUN_TOPIC, "People debate control.", "NoArgument", "test"),
    (SCHOOL_TOPIC, "Uniforms are clothing.", "Argument", "train"),
    (SCHOOL_TOPIC, "Students wear a dress.", "NoArgument", "train"),
    (SCHOOL_TOPIC, "Uniforms bring discipline.", "Argument", "train"),
    (SCHOOL_TOPIC, "A school teaches education.", "NoArgument", "train"),
    (SCHOOL_TOPIC, "Teachers lead the school.", "NoArgument", "train"),
    (SCHOOL_TOPIC, "The dress is clothing.", "Argument", "train"),
    (SCHOOL_TOPIC, "Discipline shapes education.", "Argument", "train"),
    (SCHOOL_TOPIC, "Students respect teachers.", "NoArgument", "test"),
    (SCHOOL_TOPIC, "Clothing matters to students.", "Argument", "test"),
    (SCHOOL_TOPIC, "Education needs money today.", "NoArgument", "test"),
]

# cluster 0: gun context, cluster 1: school context, cluster 2: off-context
TOKEN_CLUSTERS = {
    0: [
        "gun", "guns", "weapon", "weapons", "firearm", "law", "laws", "crime",
        "police", "safety", "violence", "regulation", "control", "owners",
        "kill", "need", "needs", "demands", "serve", "causes", "follows",
        "value", "debate", "people", "everywhere",
    ],
    1: [
        "uniform", "uniforms", "school", "schools", "dress", "student",
        "students", "discipline", "clothing", "teacher", "teachers",
        "education", "wear", "bring", "teaches", "lead", "shapes", "respect",
        "matters", "money", "today",
    ],
    2: ["market", "commerce", "fashion", "industry"],
}

PROPERTY_ROWS = [
    ("P31", 9000, "instance of", "class or kind of which the item is an example"),
    ("P279", 8000, "subclass of", "next higher class in the item hierarchy"),
    ("P361", 7000, "part of", "larger whole the item belongs to"),
    ("P527", 6500, "has part", "smaller piece contained in the whole"),
    ("P1542", 6000, "has effect", "outcome the item brings about"),
    ("P9001", 5000, "color", "visible hue of the surface"),
    ("P9002", 4, "population", "number of people living in a place"),
    ("P9003", 5, "legacy link", "class hierarchy whole item"),
]

STOPWORD_LINES = [
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has",
    "have", "in", "is", "it", "its", "of", "on", "or", "the", "their",
    "this", "to", "was", "were", "will", "with",
]

_BRIDGE = "class kind item example hierarchy whole part piece outcome effect"

ARTICLES = {
    "Q801": f"The gun item belongs to a weapon class. {_BRIDGE}. {_BRIDGE}. Gun safety law.",
    "Q802": f"A weapon item of any kind. {_BRIDGE}. {_BRIDGE}. Weapon control law.",
    "Q803": f"A firearm item is a weapon class example. {_BRIDGE}. {_BRIDGE}.",
    "Q804": f"Law item in the legal hierarchy. {_BRIDGE}. {_BRIDGE}. Law and regulation.",
    "Q805": f"Crime item with a violent outcome. {_BRIDGE}. {_BRIDGE}. Crime and violence.",
    "Q806": f"Police item as part of the law whole. {_BRIDGE}. {_BRIDGE}.",
    "Q807": f"Safety item as an outcome of regulation. {_BRIDGE}. {_BRIDGE}.",
    "Q808": f"Violence item and its effect on people. {_BRIDGE}. {_BRIDGE}.",
    "Q809": f"Regulation item as part of control. {_BRIDGE}. {_BRIDGE}.",
    "Q810": f"Control item over the gun class whole. {_BRIDGE}. {_BRIDGE}. Control of weapons.",
    "Q901": f"The uniform item is clothing of a kind. {_BRIDGE}. {_BRIDGE}. Uniform discipline effect.",
    "Q902": f"School item in the education hierarchy. {_BRIDGE}. {_BRIDGE}. School education.",
    "Q903": f"Dress item as a clothing class example. {_BRIDGE}. {_BRIDGE}.",
    "Q904": f"Student item as part of the school whole. {_BRIDGE}. {_BRIDGE}.",
    "Q905": f"Discipline item as an outcome of uniforms. {_BRIDGE}. {_BRIDGE}.",
    "Q906": f"Clothing item class with many kinds. {_BRIDGE}. {_BRIDGE}.",
    "Q907": f"Teacher item as part of the school whole. {_BRIDGE}. {_BRIDGE}.",
    "Q908": f"Education item and its outcome for students. {_BRIDGE}. {_BRIDGE}.",
}

DOCUMENTS = {
    GUN_TOPIC: [
        (1, "https://example.org/gc/1",
         "Gun owners demand safety rules in every town hall meeting. "
         "Strict laws limit weapons according to recent polls. "
         "Strict control limits weapons across the market."),
        (2, "https://example.org/gc/2",
         "Gun laws have strict control in several countries. "
         "Violent crime brings public fear to many neighborhoods."),
        (3, "https://example.org/gc/3",
         "Communities keep debating regulation choices every year. "
         "Safety rules gain support after every incident."),
    ],
    SCHOOL_TOPIC: [
        (1, "https://example.org/su/1",
         "Students prefer dress codes that leave some freedom. "
         "Uniform policy builds discipline according to teachers."),
        (2, "https://example.org/su/2",
         "School teachers value education goals over appearances. "
         "Uniform rules save many families real money."),
        (3, "https://example.org/su/3",
         "Parents keep asking for cheaper clothing options. "
         "Discipline debates return every school year."),
    ],
}

TRIPLES = {
    GUN_TOPIC: [
        (1.0, "gun owners", "demand", "safety rules"),
        (1.0, "strict laws", "limit", "weapons"),
        (1.0, "strict control", "limits", "weapons"),
        (1.0, "gun laws", "have", "strict control"),
        (0.9, "violent crime", "brings", "public fear"),
    ],
    SCHOOL_TOPIC: [
        (1.0, "students", "prefer", "dress codes"),
        (1.0, "uniform policy", "builds", "discipline"),
        (0.9, "school teachers", "value", "education goals"),
    ],
}

EXPECTED_PROPERTY_SELECTION = {"P31", "P279", "P361", "P527", "P1542"}


def topic_slug(topic: str) -> str:
    return re.sub(r"\W+", "_", topic.strip().lower())


def token_vector(token: str, cluster: int, dim: int = VECTOR_DIM) -> np.ndarray:
    """Cluster axis plus small hash-derived noise; stable across platforms."""
    vec = np.zeros(dim)
    vec[cluster % dim] = 1.0
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    noise = np.array([(b / 255.0) * 2.0 - 1.0 for b in digest[:dim]])
    return vec + 0.08 * noise


def build_embedding_table(assignments: dict[str, int], dim: int = VECTOR_DIM) -> EmbeddingTable:
    return EmbeddingTable(
        dimension=dim,
        vectors={tok: token_vector(tok, cluster, dim) for tok, cluster in assignments.items()},
    )


def cluster_assignments() -> dict[str, int]:
    out: dict[str, int] = {}
    for cluster, tokens in TOKEN_CLUSTERS.items():
        for tok in tokens:
            out[tok] = cluster
    return out


def write_vectors_file(path: Path, assignments: dict[str, int], dim: int = VECTOR_DIM) -> None:
    lines = []
    for tok in sorted(assignments):
        vec = token_vector(tok, assignments[tok], dim)
        lines.append(tok + " " + " ".join(f"{v:.6f}" for v in vec))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def world_sparql_transport(world=None):
    """In-memory SPARQL endpoint over the WORLD dict (query text is parsed back)."""
    world = world if world is not None else WORLD
    entity_re = re.compile(r"wd:(\S+) \?p \?o")
    prop_re = re.compile(r"wdt:(\S+)")
    e_prefix = "http://www.wikidata.org/entity/"
    p_prefix = "http://www.wikidata.org/prop/direct/"

    def execute(query: str) -> dict:
        entity = entity_re.search(query).group(1)
        props = set(prop_re.findall(query))
        bindings = []
        for pid, oid, label in world.get(entity, []):
            if pid not in props:
                continue
            row = {
                "p": {"type": "uri", "value": p_prefix + pid},
                "o": {"type": "uri", "value": e_prefix + oid},
            }
            if label:
                row["oLabel"] = {"type": "literal", "value": label}
            bindings.append(row)
        return {"head": {"vars": ["p", "o", "oLabel"]}, "results": {"bindings": bindings}}

    return execute


FIXTURE_CONFIG = {
    "k_s": 5,
    "k_t": 2,
    "variant": "WD_LDA_GV_OIE",
    "mode": "replay",
    "jobs": 1,
    "seeds": [11, 12],
    "selection": {
        "tfidf_threshold": 2.0,
        "count_threshold": 1000,
        "num_topics": 2,
        "num_properties": 6,
        "lda_iterations": 60,
        "words_per_topic": 12,
        "seed": 13,
    },
    "traversal": {
        "cosine_threshold": 0.4,
        "max_nodes": 50,
        "max_depth": 6,
        "per_entity_result_limit": 100,
    },
    "enrich": {
        "max_urls": 3,
        "max_annotations": 50,
        "max_chars": 2000,
        "min_chars": 200,
        "min_words_per_sentence": 3,
    },
    "classifier": {
        "dropout": 0.2,
        "hidden_size": 6,
        "batch_size": 8,
        "learning_rate": 0.01,
        "epochs": 3,
        "attention_size": 6,
        "max_paths": 10,
        "max_path_len": 15,
        "element_dim": 6,
        "seed": 0,
    },
    "endpoint": {"min_delay_ms": 0},
    "paths": {
        "dataset": "dataset.tsv",
        "annotations_dir": "annotations",
        "articles_dir": "articles",
        "cache_dir": "cache",
        "vectors": "vectors.txt",
        "stopwords": "stopwords.txt",
        "property_descriptions": "properties.tsv",
        "documents_dir": "documents",
        "triples_dir": "triples",
        "output_dir": "out",
    },
}


def build_workspace(root: str | Path, record_caches: bool = True) -> Path:
    """Write the complete offline workspace under ``root``.

    With ``record_caches`` the graph stages of every variant are executed
    once against the in-memory knowledge base in record mode, so the
    workspace replays without any transport afterwards.
    """
    root = Path(root)
    paths = FIXTURE_CONFIG["paths"]
    for key in ("annotations_dir", "articles_dir", "cache_dir", "documents_dir", "triples_dir", "output_dir"):
        (root / paths[key]).mkdir(parents=True, exist_ok=True)

    (root / "config.json").write_text(json.dumps(FIXTURE_CONFIG, indent=1, sort_keys=True), encoding="utf-8")

    rows = []
    for topic, sentence, label, split in SENTENCES:
        rows.append(f"{topic}\t{sentence}\t{label}\t{split}")
    (root / paths["dataset"]).write_text("\n".join(rows) + "\n", encoding="utf-8")

    (root / paths["stopwords"]).write_text("\n".join(STOPWORD_LINES) + "\n", encoding="utf-8")
    write_vectors_file(root / paths["vectors"], cluster_assignments())

    prop_lines = ["\t".join([pid, str(count), label, desc]) for pid, count, label, desc in PROPERTY_ROWS]
    (root / paths["property_descriptions"]).write_text("\n".join(prop_lines) + "\n", encoding="utf-8")

    for eid, text in ARTICLES.items():
        (root / paths["articles_dir"] / f"{eid}.txt").write_text(text, encoding="utf-8")

    for instance_id, (topic, sentence, _label, _split) in zip(instance_ids(), SENTENCES):
        topic_concepts = naive_link(topic, LINKER_TABLE, AnnotationSource.TOPIC)
        sentence_concepts = naive_link(sentence, LINKER_TABLE, AnnotationSource.SENTENCE)
        write_annotation_file(
            root / paths["annotations_dir"] / f"{instance_id}.json",
            topic_concepts,
            sentence_concepts,
        )

    for topic, docs in DOCUMENTS.items():
        lines = [
            json.dumps({"rank": rank, "url": url, "text": text}, sort_keys=True)
            for rank, url, text in docs
        ]
        (root / paths["documents_dir"] / f"{topic_slug(topic)}.jsonl").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )
    for topic, triples in TRIPLES.items():
        lines = ["\t".join([f"{c:.1f}", s, p, o]) for c, s, p, o in triples]
        (root / paths["triples_dir"] / f"{topic_slug(topic)}.tsv").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )

    if record_caches:
        record_all_variants(root)
    return root


def instance_ids() -> list[str]:
    return [f"s{i:03d}" for i in range(len(SENTENCES))]


def record_all_variants(root: Path) -> None:
    """Run the graph stages of every graph variant once in record mode."""
    from .pipeline import Variant, load_config, run_pipeline

    for variant in (Variant.WD, Variant.WD_LDA, Variant.WD_LDA_GV, Variant.WD_LDA_GV_OIE):
        config = load_config(root / "config.json")
        config.variant = variant
        config.mode = "record"
        config.seeds = []  # classifier not needed to build the cache
        run_pipeline(config, transport=world_sparql_transport())


# ----------------------------------------------------------------------
# the noisy-chain miniature: two anchored concepts joined by a six-entity
# chain whose middle entity is out of context


CHAIN_SENTENCE = "In these days and times, a lot of us do not feel safe in our own homes or offices."

CHAIN_WORLD = {
    "Q12823105": [("P279", "Q180516", "room")],
    "Q180516": [("P279", "Q17334923", "location")],
    "Q17334923": [("P361", "Q107", "space")],
    "Q107": [("P361", "Q133327", "spacetime")],
    "Q133327": [("P527", "Q11471", "Time")],
    "Q11471": [],
}

CHAIN_ANNOTATIONS = [
    ("offices", "Q12823105"),
    ("times", "Q11471"),
]

CHAIN_PROPERTIES = ["P279", "P361", "P527"]


def chain_embedding_table() -> EmbeddingTable:
    """Vectors where every chain label but 'spacetime' shares the sentence context."""
    assignments = {
        tok: 0
        for tok in (
            "in these days and times a lot of us do not feel safe our own homes or offices".split()
        )
    }
    for label in ("office", "room", "location", "space", "time"):
        assignments[label] = 0
    assignments["spacetime"] = 2
    return build_embedding_table(assignments)
