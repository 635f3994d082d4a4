"""Evidence-path extraction over structured and unstructured knowledge graphs.

The package builds a sentence/topic-specific knowledge graph from a
structured knowledge base and ranked topic documents, prunes its growth
with topic-model property selection and a word-embedding cosine gate,
extracts shortest evidence paths between annotated concepts, and classifies
(topic, sentence) pairs as argument / no-argument.
"""

from .annotate import AnnotationSource, ConceptAnnotation, load_annotations, naive_link
from .classifier import (
    AnchoredPath,
    ClassifierHyperparams,
    ClassifierMode,
    ClassifierParams,
    Label,
    LabeledInstance,
    evaluate,
    forward,
    train,
)
from .enrichment import (
    EnrichConfig,
    RankedDocument,
    TripleAnnotation,
    build_corpus,
    collect_sentences,
    enrich,
    ingest_triples,
)
from .errors import EvidenceGraphError
from .graph import (
    EntityRef,
    EvidencePath,
    KnowledgeGraph,
    Origin,
    PathKind,
    PropertyRef,
    Statement,
    extract_evidence,
    match_nodes,
    merge_graphs,
    shortest_path,
)
from .pipeline import PipelineConfig, RunReport, Variant, compute_stats, load_config, run_pipeline
from .sparql import ClientMode, EntityNeighborhood, SparqlClient, SparqlEndpointConfig, build_entity_query
from .topics import PropertyDescription, SelectionConfig, TopicModel, rank_by_tfidf, select_properties, train_lda
from .traversal import TraversalConfig, TraversalStats, dynamic_bfs
from .vectors import EmbeddingTable, GateDecision, GateOutcome, gate, load_vectors, sentence_vector

__version__ = "0.1.0"
