"""Command-line front end.

Subcommands cover the individual stages (select-properties, build-graph,
enrich, extract-paths, train, evaluate) plus the full run and report
regeneration.  All of them read the same JSON config document; --variant,
--mode, --seed and --jobs override its fields.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from . import classifier as clf
from .annotate import AnnotationSource, load_annotations
from .errors import EvidenceGraphError
from .pipeline import (
    PipelineConfig,
    Variant,
    _Stage,
    anchored_paths_from_json,
    graph_from_json,
    graph_to_dot,
    graph_to_json,
    load_config,
    run_pipeline,
    run_single_instance,
)
from .vectors import load_vectors


def _apply_overrides(config: PipelineConfig, args) -> PipelineConfig:
    if args.variant:
        config.variant = Variant(args.variant)
    if args.mode:
        config.mode = args.mode
    if args.seed is not None:
        config.seeds = [args.seed]
    if args.jobs is not None:
        config.jobs = args.jobs
    return config


def _add_common(parser):
    parser.add_argument("--config", required=True, help="path to the JSON config document")
    parser.add_argument("--variant", choices=[v.value for v in Variant], default=None)
    parser.add_argument("--mode", choices=["live", "record", "replay"], default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None)


def cmd_select_properties(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    stage = _Stage(config, None)
    for row in stage.dataset:
        if row.topic != args.topic:
            continue
        ann_path = config.paths["annotations_dir"] / f"{row.instance_id}.json"
        annotations = load_annotations(ann_path, config.k_s, config.k_t)
        selected = stage.properties_for(row.topic, annotations)
        print(json.dumps({"topic": args.topic, "properties": selected}, indent=1))
        return 0
    print(f"topic {args.topic!r} not found in the dataset", file=sys.stderr)
    return 1


def cmd_build_graph(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    if config.variant is Variant.WD_LDA_GV_OIE:
        # staged flow: the unstructured merge belongs to the `enrich` subcommand
        config.variant = Variant.WD_LDA_GV
    result, payload, graph = run_single_instance(config, args.instance)
    if graph is None:
        print(f"instance {args.instance} skipped: {result.skipped}", file=sys.stderr)
        return 1
    out_dir = config.paths["output_dir"] / "graphs"
    out_dir.mkdir(parents=True, exist_ok=True)
    out = out_dir / f"{args.instance}.json"
    out.write_text(json.dumps(graph_to_json(graph), indent=1, sort_keys=True), encoding="utf-8")
    if args.dot:
        (out_dir / f"{args.instance}.dot").write_text(graph_to_dot(graph), encoding="utf-8")
    print(f"graph for {args.instance}: {graph.num_nodes} nodes, {graph.num_edges} edges -> {out}")
    return 0


def cmd_enrich(args) -> int:
    from .enrichment import enrich
    from .pipeline import topic_slug
    from .text import load_stopwords

    config = _apply_overrides(load_config(args.config), args)
    graph_path = config.paths["output_dir"] / "graphs" / f"{args.instance}.json"
    if not graph_path.exists():
        print(f"no stored graph for {args.instance}; run build-graph first", file=sys.stderr)
        return 1
    graph = graph_from_json(json.loads(graph_path.read_text(encoding="utf-8")))
    stage = _Stage(replace(config, variant=Variant.BASELINE), None)
    row = next((r for r in stage.dataset if r.instance_id == args.instance), None)
    if row is None:
        print(f"instance {args.instance} not in dataset", file=sys.stderr)
        return 1
    stopwords = load_stopwords(config.paths["stopwords"])
    docs_path = config.paths["documents_dir"] / f"{topic_slug(row.topic)}.jsonl"
    from .enrichment import load_ranked_documents

    triples = config.paths["triples_dir"] / f"{topic_slug(row.topic)}.tsv"
    merged, stats = enrich(
        graph,
        load_ranked_documents(docs_path),
        config.enrich,
        stopwords,
        triples_path=triples if triples.exists() else None,
    )
    out = config.paths["output_dir"] / "graphs" / f"{args.instance}.enriched.json"
    out.write_text(json.dumps(graph_to_json(merged), indent=1, sort_keys=True), encoding="utf-8")
    print(
        f"enriched {args.instance}: +{stats.unstructured_nodes} nodes, "
        f"{stats.match_edges} match edges -> {out}"
    )
    return 0


def cmd_extract_paths(args) -> int:
    from .annotate import concept_node_id
    from .graph import PathKind, extract_evidence
    from .pipeline import compute_anchors, path_to_json

    config = _apply_overrides(load_config(args.config), args)
    graphs_dir = config.paths["output_dir"] / "graphs"
    enriched = graphs_dir / f"{args.instance}.enriched.json"
    base = graphs_dir / f"{args.instance}.json"
    source = enriched if enriched.exists() else base
    if not source.exists():
        print(f"no stored graph for {args.instance}; run build-graph first", file=sys.stderr)
        return 1
    graph = graph_from_json(json.loads(source.read_text(encoding="utf-8")))
    stage = _Stage(replace(config, variant=Variant.BASELINE), None)
    row = next((r for r in stage.dataset if r.instance_id == args.instance), None)
    annotations = load_annotations(
        config.paths["annotations_dir"] / f"{args.instance}.json", config.k_s, config.k_t
    )
    topic_ids, sentence_ids, surfaces = [], [], {}
    for a in annotations:
        cid = concept_node_id(a.surface)
        if a.source is AnnotationSource.TOPIC:
            if cid not in topic_ids:
                topic_ids.append(cid)
        else:
            surfaces[cid] = a.surface
            if cid not in sentence_ids:
                sentence_ids.append(cid)
    paths = extract_evidence(graph, topic_ids, sentence_ids)
    payload = [path_to_json(p, compute_anchors(p, row.sentence, surfaces)) for p in paths]
    out_dir = config.paths["output_dir"] / "paths"
    out_dir.mkdir(parents=True, exist_ok=True)
    out = out_dir / f"{args.instance}.json"
    out.write_text(json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8")
    kinds = {
        "sen_sen": sum(1 for p in paths if p.kind is PathKind.SENTENCE_TO_SENTENCE),
        "sen_top": sum(1 for p in paths if p.kind is PathKind.SENTENCE_TO_TOPIC),
    }
    print(f"paths for {args.instance}: {kinds} -> {out}")
    return 0


def _load_instances(config: PipelineConfig, stage: _Stage):
    paths_dir = config.paths["output_dir"] / "paths"
    instances = {}
    for row in stage.dataset:
        payload_file = paths_dir / f"{row.instance_id}.json"
        payload = json.loads(payload_file.read_text(encoding="utf-8")) if payload_file.exists() else []
        instances[row.instance_id] = clf.LabeledInstance(
            topic=row.topic,
            sentence=row.sentence,
            label=row.label,
            paths=anchored_paths_from_json(payload),
        )
    return instances


def cmd_train(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    stage = _Stage(replace(config, variant=Variant.BASELINE), None)
    instances = _load_instances(config, stage)
    train_set = [instances[r.instance_id] for r in stage.dataset if r.split == "train"]
    mode = clf.ClassifierMode.BASELINE if config.variant is Variant.BASELINE else clf.ClassifierMode.WITH_PATHS
    hyper = replace(config.classifier, seed=config.seeds[0] if config.seeds else config.classifier.seed)
    params, log = clf.train(train_set, hyper, mode, stage.table)
    out = config.paths["output_dir"] / f"model_{config.variant.value}_seed{hyper.seed}.npz"
    out.parent.mkdir(parents=True, exist_ok=True)
    clf.save_checkpoint(params, out)
    print(json.dumps({"checkpoint": str(out), "epoch_losses": [round(l, 6) for l in log.epoch_losses]}, indent=1))
    return 0


def cmd_evaluate(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    stage = _Stage(replace(config, variant=Variant.BASELINE), None)
    instances = _load_instances(config, stage)
    test_set = [instances[r.instance_id] for r in stage.dataset if r.split == "test"]
    table = load_vectors(config.paths["vectors"])
    params = clf.load_checkpoint(args.checkpoint, table)
    result = clf.evaluate(params, test_set)
    print(
        json.dumps(
            {
                "accuracy": round(result.accuracy, 6),
                "macro_f1": round(result.macro_f1, 6),
                "positive_f1": round(result.positive_f1, 6),
                "confusion": result.confusion.tolist(),
            },
            indent=1,
        )
    )
    return 0


def cmd_run(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    report = run_pipeline(config)
    print(f"report -> {report.report_path}")
    print(f"rows   -> {report.sidecar_path}")
    if report.aggregates:
        frac = report.aggregates["sents_with_sen_sen"]
        print(f"{config.variant.value}: {frac:.4f} of sentences have a sentence-pair path")
    return 0


def cmd_report(args) -> int:
    from .pipeline import RunReport, SentenceResult, compute_stats, write_report

    config = _apply_overrides(load_config(args.config), args)
    sidecar_path = config.paths["output_dir"] / "rows.json"
    doc = json.loads(sidecar_path.read_text(encoding="utf-8"))
    rows = []
    for r in doc["rows"]:
        rows.append(
            SentenceResult(
                instance_id=r["instance_id"],
                topic=r["topic"],
                n_sen_sen=r["n_sen_sen"],
                n_sen_top=r["n_sen_top"],
                depth_reached=r["depth_reached"],
                nodes_visited=r["nodes_visited"],
                queries_issued=r["queries_issued"],
                path_edges=r["path_edges"],
                runtime=r["runtime"],
                skipped=r["skipped"],
            )
        )
    variant = Variant(doc["variant"])
    report = RunReport(
        variant=variant,
        rows=rows,
        aggregates=compute_stats(rows) if variant.runs_graph_stages else {},
        classifier_metrics=doc.get("classifier", {}),
    )
    write_report(report, config.paths["output_dir"], doc.get("split_sizes", {}))
    print(f"report -> {report.report_path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="evidencegraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select-properties", help="context-specific property selection for one topic")
    _add_common(p)
    p.add_argument("--topic", required=True)
    p.set_defaults(func=cmd_select_properties)

    p = sub.add_parser("build-graph", help="run the graph stages for one instance")
    _add_common(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--dot", action="store_true", help="also write a DOT file")
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("enrich", help="merge the unstructured triple graph into a stored graph")
    _add_common(p)
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_enrich)

    p = sub.add_parser("extract-paths", help="extract evidence paths from a stored graph")
    _add_common(p)
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_extract_paths)

    p = sub.add_parser("train", help="train the classifier from cached paths")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a stored checkpoint on the test split")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="full pipeline: graphs, paths, classifier, report")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="regenerate the report TSV from the JSON sidecar")
    _add_common(p)
    p.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EvidenceGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
