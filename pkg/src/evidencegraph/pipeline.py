"""End-to-end orchestration: per-sentence graph jobs, ablation variants,
classifier training, and report assembly.

A run walks the dataset sentence by sentence: concept annotations are
loaded, a property set is chosen (fixed pair or topic-model selection), the
gated traversal grows the structured graph, the unstructured triple graph
is merged in for the full variant, and evidence paths are extracted and
cached.  The classifier then trains and evaluates once per configured seed,
and the aggregate table plus a per-sentence JSON sidecar are written.

In replay mode the whole run is deterministic: per-sentence wall times are
reported as zero (timings of cache reads carry no information), so repeated
runs produce byte-identical report files.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import classifier as clf
from .annotate import ConceptAnnotation, AnnotationSource, concept_node_id, load_annotations
from .enrichment import EnrichConfig, enrich, load_ranked_documents
from .errors import ConfigError, EvidenceGraphError
from .graph import EntityRef, EvidencePath, KnowledgeGraph, Origin, PathKind, PropertyRef, Statement
from .sparql import ClientMode, SparqlClient, SparqlEndpointConfig, failing_transport
from .text import label_tokens, load_stopwords, tokenize
from .topics import SelectionConfig, load_property_descriptions, select_properties
from .traversal import GATE_DISABLED, TraversalConfig, dynamic_bfs
from .vectors import load_vectors

logger = logging.getLogger(__name__)

# the two most frequent knowledge-base properties, used when selection is off
FIXED_PROPERTIES = ["P279", "P31"]


class Variant(str, Enum):
    BASELINE = "Baseline"
    WD = "WD"
    WD_LDA = "WD_LDA"
    WD_LDA_GV = "WD_LDA_GV"
    WD_LDA_GV_OIE = "WD_LDA_GV_OIE"

    @property
    def runs_graph_stages(self) -> bool:
        return self is not Variant.BASELINE

    @property
    def uses_property_selection(self) -> bool:
        return self in (Variant.WD_LDA, Variant.WD_LDA_GV, Variant.WD_LDA_GV_OIE)

    @property
    def gate_active(self) -> bool:
        return self in (Variant.WD_LDA_GV, Variant.WD_LDA_GV_OIE)

    @property
    def uses_enrichment(self) -> bool:
        return self is Variant.WD_LDA_GV_OIE


@dataclass
class DatasetRow:
    instance_id: str
    topic: str
    sentence: str
    label: clf.Label
    split: str


@dataclass
class PipelineConfig:
    base_dir: Path
    k_s: int = 5
    k_t: int = 2
    variant: Variant = Variant.WD_LDA_GV_OIE
    mode: str = "replay"
    jobs: int = 1
    seeds: list[int] = field(default_factory=lambda: [0])
    per_sentence_properties: bool = False
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    traversal: TraversalConfig = field(default_factory=TraversalConfig)
    enrich: EnrichConfig = field(default_factory=EnrichConfig)
    classifier: clf.ClassifierHyperparams = field(default_factory=clf.ClassifierHyperparams)
    endpoint_overrides: dict = field(default_factory=dict)
    paths: dict[str, Path] = field(default_factory=dict)


_PATH_KEYS = (
    "dataset", "annotations_dir", "articles_dir", "cache_dir", "vectors",
    "stopwords", "property_descriptions", "documents_dir", "triples_dir",
    "output_dir",
)


def load_config(path: str | Path) -> PipelineConfig:
    """Parse the JSON config document; relative paths resolve next to it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    base = path.parent
    try:
        raw_paths = doc.get("paths", {})
        resolved = {k: (base / raw_paths[k]) for k in _PATH_KEYS if k in raw_paths}
        config = PipelineConfig(
            base_dir=base,
            k_s=int(doc.get("k_s", 5)),
            k_t=int(doc.get("k_t", 2)),
            variant=Variant(doc.get("variant", "WD_LDA_GV_OIE")),
            mode=doc.get("mode", "replay"),
            jobs=int(doc.get("jobs", 1)),
            seeds=[int(s) for s in doc.get("seeds", [0])],
            per_sentence_properties=bool(doc.get("per_sentence_properties", False)),
            selection=SelectionConfig(**doc.get("selection", {})),
            traversal=TraversalConfig(**doc.get("traversal", {})),
            enrich=EnrichConfig(**doc.get("enrich", {})),
            classifier=clf.ClassifierHyperparams(**doc.get("classifier", {})),
            endpoint_overrides=doc.get("endpoint", {}),
            paths=resolved,
        )
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"bad config {path}: {exc}") from exc
    return config


def load_dataset(path: str | Path) -> list[DatasetRow]:
    """Parse the TSV: topic, sentence, label, split; Pro/Con collapse on load."""
    rows = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ConfigError(f"dataset line {i + 1}: expected 4 tab-separated fields")
        topic, sentence, label, split = parts
        rows.append(
            DatasetRow(
                instance_id=f"s{i:03d}",
                topic=topic,
                sentence=sentence,
                label=clf.Label.parse(label),
                split=split,
            )
        )
    return rows


def topic_slug(topic: str) -> str:
    import re

    return re.sub(r"\W+", "_", topic.strip().lower())


# ----------------------------------------------------------------------
# per-sentence results


@dataclass
class SentenceResult:
    instance_id: str
    topic: str
    n_sen_sen: int = 0
    n_sen_top: int = 0
    depth_reached: int = 0
    nodes_visited: int = 0
    queries_issued: int = 0
    path_edges: list[int] = field(default_factory=list)
    runtime: float = 0.0
    skipped: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "topic": self.topic,
            "n_sen_sen": self.n_sen_sen,
            "n_sen_top": self.n_sen_top,
            "depth_reached": self.depth_reached,
            "nodes_visited": self.nodes_visited,
            "queries_issued": self.queries_issued,
            "path_edges": self.path_edges,
            "runtime": round(self.runtime, 6),
            "skipped": self.skipped,
        }


def compute_stats(rows: list[SentenceResult]) -> dict:
    """Aggregate columns over all processed sentences.

    Fractions count sentences with at least one path of the kind; the
    count and hop columns are unweighted means over sentences; path length
    (in edges) is pooled over every extracted path.
    """
    if not rows:
        raise ConfigError("cannot aggregate an empty row set")
    n = len(rows)
    all_edges = [e for r in rows for e in r.path_edges]
    return {
        "sents_with_sen_sen": sum(1 for r in rows if r.n_sen_sen >= 1) / n,
        "sents_with_sen_top": sum(1 for r in rows if r.n_sen_top >= 1) / n,
        "avg_sen_sen": float(np.mean([r.n_sen_sen for r in rows])),
        "avg_sen_top": float(np.mean([r.n_sen_top for r in rows])),
        "avg_hops": float(np.mean([r.depth_reached for r in rows])),
        "avg_path_len": float(np.mean(all_edges)) if all_edges else 0.0,
        "avg_runtime": float(np.mean([r.runtime for r in rows])),
    }


# ----------------------------------------------------------------------
# graph serialization (JSON and DOT)


def graph_to_json(graph: KnowledgeGraph) -> dict:
    return {
        "nodes": [
            {
                "id": node.id,
                "label": node.label,
                "tokens": list(node.tokens),
                "origin": node.origin.value,
            }
            for node in sorted(graph.nodes.values(), key=lambda n: n.id)
        ],
        "edges": [
            {
                "subject": e.subject,
                "predicate": e.predicate,
                "object": e.object,
                "provenance": e.provenance,
            }
            for e in graph.edges
        ],
        "properties": [
            {"id": p.id, "label": p.label}
            for p in sorted(graph.properties.values(), key=lambda p: p.id)
        ],
    }


def graph_from_json(doc: dict) -> KnowledgeGraph:
    graph = KnowledgeGraph()
    for n in doc["nodes"]:
        graph.ensure_node(
            EntityRef(id=n["id"], label=n["label"], tokens=tuple(n["tokens"]), origin=Origin(n["origin"]))
        )
    for p in doc.get("properties", []):
        graph.properties.setdefault(p["id"], PropertyRef(p["id"], p["label"]))
    for e in doc["edges"]:
        graph.add_statement(
            Statement(e["subject"], e["predicate"], e["object"], provenance=e.get("provenance")),
            graph.nodes[e["subject"]],
            graph.nodes[e["object"]],
        )
    return graph


def graph_to_dot(graph: KnowledgeGraph) -> str:
    lines = ["digraph evidence {"]
    for node in sorted(graph.nodes.values(), key=lambda n: n.id):
        shape = {"concept": "box", "unstructured": "ellipse"}.get(node.origin.value, "oval")
        lines.append(f'  "{node.id}" [label="{node.label}", shape={shape}];')
    for e in graph.edges:
        lines.append(f'  "{e.subject}" -> "{e.object}" [label="{e.predicate}"];')
    lines.append("}")
    return "\n".join(lines)


# ----------------------------------------------------------------------
# path cache files


def path_to_json(path: EvidencePath, anchors: list[int]) -> dict:
    return {
        "kind": path.kind.value,
        "elements": list(path.elements),
        "directions": list(path.directions),
        "anchors": anchors,
    }


def anchored_paths_from_json(doc: list[dict]) -> list[clf.AnchoredPath]:
    return [clf.AnchoredPath(tuple(p["elements"]), tuple(p["anchors"])) for p in doc]


def compute_anchors(path: EvidencePath, sentence: str, surface_by_concept: dict[str, str]) -> list[int]:
    """Token indices the path attaches to: positions of its endpoint surfaces."""
    sentence_tokens = tokenize(sentence)
    anchors: set[int] = set()
    for endpoint in (path.elements[0], path.elements[-1]):
        surface = surface_by_concept.get(endpoint)
        if surface is None:
            continue
        span = tokenize(surface)
        for i in range(0, len(sentence_tokens) - len(span) + 1):
            if sentence_tokens[i : i + len(span)] == span:
                anchors.update(range(i, i + len(span)))
    return sorted(anchors)


# ----------------------------------------------------------------------
# the run itself


@dataclass
class RunReport:
    variant: Variant
    rows: list[SentenceResult]
    aggregates: dict
    classifier_metrics: dict
    report_path: Optional[Path] = None
    sidecar_path: Optional[Path] = None


class _Stage:
    """Shared read-only state for the per-sentence jobs."""

    def __init__(self, config: PipelineConfig, transport):
        self.config = config
        p = config.paths
        self.stopwords = load_stopwords(p["stopwords"])
        self.table = load_vectors(p["vectors"])
        self.descriptions = load_property_descriptions(p["property_descriptions"])
        self.dataset = load_dataset(p["dataset"])
        self.client: Optional[SparqlClient] = None
        if config.variant.runs_graph_stages:
            mode = ClientMode(config.mode)
            endpoint = SparqlEndpointConfig(
                mode=mode,
                cache_dir=p["cache_dir"],
                result_limit=config.traversal.per_entity_result_limit,
                **config.endpoint_overrides,
            )
            if transport is None and mode is ClientMode.REPLAY:
                transport = failing_transport
            self.client = SparqlClient(endpoint, transport=transport)
        self._topic_properties: dict[str, list[str]] = {}
        self._topic_documents: dict[str, list] = {}

    def properties_for(self, topic: str, annotations: list[ConceptAnnotation]) -> list[str]:
        if not self.config.variant.uses_property_selection:
            return list(FIXED_PROPERTIES)
        if self.config.per_sentence_properties:
            entities = [_annotation_entity(a) for a in annotations]
            return self._select(entities)
        if topic not in self._topic_properties:
            topic_entities = [
                _annotation_entity(a) for a in annotations if a.source is AnnotationSource.TOPIC
            ]
            self._topic_properties[topic] = self._select(topic_entities)
        return self._topic_properties[topic]

    def _select(self, entities: list[EntityRef]) -> list[str]:
        return select_properties(
            entities,
            self.descriptions,
            self.config.selection,
            self.config.paths["articles_dir"],
            self.stopwords,
        )

    def documents_for(self, topic: str):
        if topic not in self._topic_documents:
            doc_path = self.config.paths["documents_dir"] / f"{topic_slug(topic)}.jsonl"
            self._topic_documents[topic] = load_ranked_documents(doc_path)
        return self._topic_documents[topic]

    def triples_path_for(self, topic: str) -> Optional[Path]:
        path = self.config.paths["triples_dir"] / f"{topic_slug(topic)}.tsv"
        return path if path.exists() else None


def _annotation_entity(a: ConceptAnnotation) -> EntityRef:
    return EntityRef(
        id=a.entity_id, label=a.surface, tokens=tuple(label_tokens(a.surface)), origin=Origin.STRUCTURED
    )


def run_sentence_job(stage: _Stage, row: DatasetRow) -> tuple[SentenceResult, list[dict], Optional[KnowledgeGraph]]:
    """Graph stages for one sentence; returns the row stats, the path-cache
    payload, and the final graph (for the CLI's graph dumps)."""
    config = stage.config
    result = SentenceResult(instance_id=row.instance_id, topic=row.topic)
    if not config.variant.runs_graph_stages:
        return result, [], None

    started = time.perf_counter()
    ann_path = config.paths["annotations_dir"] / f"{row.instance_id}.json"
    if not ann_path.exists():
        result.skipped = "missing annotation file"
        return result, [], None
    annotations = load_annotations(ann_path, config.k_s, config.k_t)
    sentence_anns = [a for a in annotations if a.source is AnnotationSource.SENTENCE]
    if not sentence_anns:
        result.skipped = "no sentence concepts"
        return result, [], None

    properties = stage.properties_for(row.topic, annotations)
    if not properties:
        result.skipped = "empty property selection"
        return result, [], None

    traversal_config = config.traversal
    if not config.variant.gate_active:
        traversal_config = replace(traversal_config, cosine_threshold=GATE_DISABLED)
    graph, tstats = dynamic_bfs(
        row.sentence, annotations, properties, stage.table, stage.client, traversal_config
    )
    if config.variant.uses_enrichment:
        graph, _estats = enrich(
            graph,
            stage.documents_for(row.topic),
            config.enrich,
            stage.stopwords,
            triples_path=stage.triples_path_for(row.topic),
        )

    topic_ids: list[str] = []
    for a in annotations:
        if a.source is AnnotationSource.TOPIC:
            cid = concept_node_id(a.surface)
            if cid not in topic_ids:
                topic_ids.append(cid)
    sentence_ids: list[str] = []
    surface_by_concept: dict[str, str] = {}
    for a in sentence_anns:
        cid = concept_node_id(a.surface)
        surface_by_concept[cid] = a.surface
        if cid not in sentence_ids:
            sentence_ids.append(cid)

    from .graph import extract_evidence

    paths = extract_evidence(graph, topic_ids, sentence_ids)
    payload = [
        path_to_json(p, compute_anchors(p, row.sentence, surface_by_concept)) for p in paths
    ]
    result.n_sen_sen = sum(1 for p in paths if p.kind is PathKind.SENTENCE_TO_SENTENCE)
    result.n_sen_top = sum(1 for p in paths if p.kind is PathKind.SENTENCE_TO_TOPIC)
    result.depth_reached = tstats.depth_reached
    result.nodes_visited = tstats.nodes_visited
    result.queries_issued = tstats.queries_issued
    result.path_edges = [p.num_edges for p in paths]
    # replay timings measure cache reads, not retrieval; zero keeps runs comparable
    result.runtime = 0.0 if config.mode == "replay" else time.perf_counter() - started
    return result, payload, graph


def run_classifier_stage(config: PipelineConfig, stage: _Stage, payloads: dict[str, list[dict]]) -> dict:
    """Train and evaluate once per configured seed; returns metric summaries."""
    if not config.seeds:
        return {"seeds": [], "note": "classifier stage skipped (no seeds configured)"}
    mode = clf.ClassifierMode.BASELINE if config.variant is Variant.BASELINE else clf.ClassifierMode.WITH_PATHS
    instances = {}
    for row in stage.dataset:
        instances[row.instance_id] = clf.LabeledInstance(
            topic=row.topic,
            sentence=row.sentence,
            label=row.label,
            paths=anchored_paths_from_json(payloads.get(row.instance_id, [])),
        )
    train_set = [instances[r.instance_id] for r in stage.dataset if r.split == "train"]
    test_set = [instances[r.instance_id] for r in stage.dataset if r.split == "test"]
    if not train_set or not test_set:
        raise ConfigError("dataset must contain both train and test splits")

    per_seed = []
    for seed in config.seeds:
        hyper = replace(config.classifier, seed=seed)
        params, log = clf.train(train_set, hyper, mode, stage.table)
        result = clf.evaluate(params, test_set)
        per_seed.append(
            {
                "seed": seed,
                "accuracy": round(result.accuracy, 6),
                "macro_f1": round(result.macro_f1, 6),
                "positive_f1": round(result.positive_f1, 6),
                "final_loss": round(log.epoch_losses[-1], 6) if log.epoch_losses else None,
            }
        )
    acc = [m["accuracy"] for m in per_seed]
    f1 = [m["macro_f1"] for m in per_seed]

    def mean_sd(values):
        mean = float(np.mean(values))
        sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        return round(mean, 6), round(sd, 6)

    acc_mean, acc_sd = mean_sd(acc)
    f1_mean, f1_sd = mean_sd(f1)
    return {
        "seeds": list(config.seeds),
        "per_seed": per_seed,
        "acc_mean": acc_mean,
        "acc_sd": acc_sd,
        "f1_mean": f1_mean,
        "f1_sd": f1_sd,
    }


REPORT_COLUMNS = [
    "variant", "sents_with_sen_sen", "sents_with_sen_top", "avg_sen_sen",
    "avg_sen_top", "avg_hops", "avg_path_len", "avg_runtime",
    "acc_mean", "acc_sd", "f1_mean", "f1_sd",
]


def write_report(report: RunReport, output_dir: Path, split_sizes: dict) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    values: dict[str, str] = {"variant": report.variant.value}
    for key in REPORT_COLUMNS[1:8]:
        if report.variant.runs_graph_stages:
            values[key] = f"{report.aggregates[key]:.4f}"
        else:
            values[key] = ""
    metrics = report.classifier_metrics
    for key in ("acc_mean", "acc_sd", "f1_mean", "f1_sd"):
        values[key] = f"{metrics[key]:.4f}" if key in metrics else ""
    tsv = "\t".join(REPORT_COLUMNS) + "\n" + "\t".join(values[c] for c in REPORT_COLUMNS) + "\n"
    report.report_path = output_dir / "report.tsv"
    report.report_path.write_text(tsv, encoding="utf-8")

    sidecar = {
        "variant": report.variant.value,
        "split_sizes": split_sizes,
        "aggregates": {k: round(v, 6) for k, v in report.aggregates.items()} if report.aggregates else {},
        "classifier": report.classifier_metrics,
        "rows": [r.to_json() for r in report.rows],
        "skipped": [
            {"instance_id": r.instance_id, "reason": r.skipped}
            for r in report.rows
            if r.skipped is not None
        ],
    }
    report.sidecar_path = output_dir / "rows.json"
    report.sidecar_path.write_text(json.dumps(sidecar, indent=1, sort_keys=True), encoding="utf-8")


def run_pipeline(config: PipelineConfig, transport: Optional[Callable[[str], dict]] = None) -> RunReport:
    """Execute the configured variant over the whole dataset."""
    stage = _Stage(config, transport)
    rows: list[SentenceResult] = []
    payloads: dict[str, list[dict]] = {}
    paths_dir = config.paths["output_dir"] / "paths"
    paths_dir.mkdir(parents=True, exist_ok=True)

    if config.variant.uses_property_selection:
        # warm the per-topic selection cache serially so parallel jobs share it
        seen = set()
        for row in stage.dataset:
            if row.topic in seen:
                continue
            seen.add(row.topic)
            ann_path = config.paths["annotations_dir"] / f"{row.instance_id}.json"
            if ann_path.exists():
                stage.properties_for(row.topic, load_annotations(ann_path, config.k_s, config.k_t))

    def job(row: DatasetRow):
        try:
            return run_sentence_job(stage, row)
        except EvidenceGraphError as exc:
            result = SentenceResult(instance_id=row.instance_id, topic=row.topic, skipped=str(exc))
            return result, [], None

    if config.jobs > 1 and config.variant.runs_graph_stages:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(job, stage.dataset))
    else:
        outcomes = [job(row) for row in stage.dataset]

    for row, (result, payload, _graph) in zip(stage.dataset, outcomes):
        rows.append(result)
        payloads[row.instance_id] = payload
        (paths_dir / f"{row.instance_id}.json").write_text(
            json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8"
        )

    aggregates = compute_stats(rows) if config.variant.runs_graph_stages else {}
    classifier_metrics = run_classifier_stage(config, stage, payloads)
    report = RunReport(
        variant=config.variant,
        rows=rows,
        aggregates=aggregates,
        classifier_metrics=classifier_metrics,
    )
    split_sizes = {
        "train": sum(1 for r in stage.dataset if r.split == "train"),
        "test": sum(1 for r in stage.dataset if r.split == "test"),
    }
    write_report(report, config.paths["output_dir"], split_sizes)
    return report


def run_single_instance(
    config: PipelineConfig,
    instance_id: str,
    transport: Optional[Callable[[str], dict]] = None,
) -> tuple[SentenceResult, list[dict], Optional[KnowledgeGraph]]:
    """Graph stages for one dataset instance (CLI's build-graph / extract-paths)."""
    stage = _Stage(config, transport)
    for row in stage.dataset:
        if row.instance_id == instance_id:
            return run_sentence_job(stage, row)
    raise ConfigError(f"instance {instance_id} not present in the dataset")
