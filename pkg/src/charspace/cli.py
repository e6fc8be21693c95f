"""Command-line interface.

Exit codes: 0 success, 1 domain/input errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import metrics as gm
from . import poincare
from . import report as rp
from . import stats as st
from .annotations import (
    build_registry,
    merge_clusters,
    parse_bundle,
    read_merge_map,
    registry_from_json,
    registry_to_json,
)
from .components import (
    COMPONENTS,
    VerbLexicon,
    full_window,
    read_spans_jsonl,
    score_document,
    windows_from_document,
    write_scores_csv,
    write_spans_jsonl,
)
from .config import load_run_config
from .errors import CharspaceError
from .ingest import Document, SegmentConfig, ingest_file
from .llm import (
    ALL_MODES,
    EndpointConfig,
    GranularityMode,
    HttpTransport,
    MockTransport,
    run_chapter_counts,
    telemetry_to_json,
)
from .networks import (
    build_cooccurrence,
    build_dialogue,
    build_discussion,
    export_adjacency_csv,
    export_graphml,
    import_graphml,
)
from .pipeline import run_corpus
from .resources import load_gender_pronouns, load_verbnet_overrides, load_wordlist


def _load_registry(path):
    return registry_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _require(path, kind="input"):
    if not Path(path).exists():
        raise CharspaceError(f"{kind} file not found: {path}")
    return Path(path)


def cmd_ingest(args) -> int:
    config = SegmentConfig(keep_preamble=args.keep_preamble)
    if args.chapter_pattern:
        config.chapter_pattern = args.chapter_pattern
    doc = ingest_file(_require(args.infile), config=config, doc_id=args.id)
    doc.save(args.out)
    print(f"wrote {args.out}: {len(doc.chapters)} chapters, "
          f"{sum(len(c.paragraphs) for c in doc.chapters)} paragraphs")
    return 0


def cmd_registry(args) -> int:
    bundle = parse_bundle(_require(args.bundle, "bundle dir"))
    pronouns = load_gender_pronouns(args.gender_pronouns) if args.gender_pronouns else None
    registry = build_registry(bundle, min_total=args.min_total,
                              min_proper=args.min_proper, pronoun_genders=pronouns)
    if args.merge_map:
        registry = merge_clusters(registry, read_merge_map(_require(args.merge_map), registry))
    Path(args.out).write_text(
        json.dumps(registry_to_json(registry), ensure_ascii=False, sort_keys=True, indent=1),
        encoding="utf-8",
    )
    print(f"wrote {args.out}: {len(registry)} characters")
    return 0


def _tag_common(args):
    bundle = parse_bundle(_require(args.bundle, "bundle dir"))
    if args.registry:
        registry = _load_registry(_require(args.registry))
    else:
        registry = build_registry(bundle)
    if args.doc:
        doc = Document.load(_require(args.doc))
        doc_paragraphs = sum(len(c.paragraphs) for c in doc.chapters)
        if doc_paragraphs == len(bundle.paragraph_ids):
            windows = windows_from_document(doc)
        else:
            print(
                f"warning: document has {doc_paragraphs} paragraphs but bundle has "
                f"{len(bundle.paragraph_ids)}; tagging as a single chapter",
                file=sys.stderr,
            )
            windows = [full_window(bundle)]
    else:
        windows = [full_window(bundle)]
    overrides = load_verbnet_overrides(args.verbnet_overrides) if args.verbnet_overrides else {}
    lexicon = VerbLexicon(verbnet_overrides=overrides)
    appearance = load_wordlist(args.appearance) if args.appearance else None
    return bundle, registry, lexicon, windows, appearance


def cmd_tag(args) -> int:
    bundle, registry, lexicon, windows, appearance = _tag_common(args)
    scores, spans = score_document(bundle, registry, lexicon, windows, appearance)
    write_scores_csv(args.out, bundle.novel_id, scores, registry)
    print(f"wrote {args.out}: {len(scores)} (character, chapter) rows")
    if args.spans:
        write_spans_jsonl(args.spans, spans)
        print(f"wrote {args.spans}: {len(spans)} spans")
    return 0


def cmd_graph(args) -> int:
    bundle = parse_bundle(_require(args.bundle, "bundle dir"))
    if args.registry:
        registry = _load_registry(_require(args.registry))
    else:
        registry = build_registry(bundle)
    if args.kind == "cooccurrence":
        graph = build_cooccurrence(bundle, registry)
    elif args.kind == "dialogue":
        graph = build_dialogue(bundle, registry, max_gap_paragraphs=args.max_gap)
    else:
        if args.spans:
            spans = read_spans_jsonl(_require(args.spans))
        else:
            lexicon = VerbLexicon()
            _scores, spans = score_document(bundle, registry, lexicon, [full_window(bundle)])
        dc_spans = [s for s in spans if s.component == "DC"]
        graph = build_discussion(dc_spans, registry)
        if graph.num_edges() == 0:
            print("warning: discussion graph has no attributed edges", file=sys.stderr)
    export_graphml(graph, args.out)
    if args.adjacency:
        export_adjacency_csv(graph, args.adjacency)
    print(f"wrote {args.out}: {graph.num_nodes()} nodes, {graph.num_edges()} edges")
    return 0


def cmd_metrics(args) -> int:
    graph = import_graphml(_require(args.graph))
    result = gm.all_metrics(graph, delta_seed=args.seed)
    Path(args.out).write_text(json.dumps(result, sort_keys=True, indent=1), encoding="utf-8")
    print(f"wrote {args.out}")
    if args.csv:
        import csv as _csv

        with open(args.csv, "w", encoding="utf-8", newline="") as handle:
            writer = _csv.writer(handle)
            writer.writerow(["scope", "measure", "node", "value"])
            for measure in sorted(result["per_node"]):
                for node, value in sorted(result["per_node"][measure].items(),
                                          key=lambda kv: int(kv[0])):
                    writer.writerow(["node", measure, node, repr(value)])
            for key in sorted(result["global"]):
                value = result["global"][key]
                writer.writerow(["global", key, "",
                                 "" if value is None else repr(value)])
        print(f"wrote {args.csv}")
    return 0


def cmd_eval(args) -> int:
    gold = st.ScoreTable.read_csv(_require(args.gold))
    pred = st.ScoreTable.read_csv(_require(args.pred))
    result: dict = {"per_component": {}, "average": {}}
    maes = []
    for tag in COMPONENTS:
        xs, ys = st.aligned_pairs(gold, pred, tag)
        entry = {
            "mae": st.mae(gold, pred, tag),
            "bias": st.bias(gold, pred, tag),
            "pearson": st.pearson(xs, ys),
            "spearman": st.spearman(xs, ys),
        }
        result["per_component"][tag] = entry
        maes.append(entry["mae"])
    result["average"]["mae"] = sum(maes) / len(maes)
    Path(args.out).write_text(json.dumps(result, sort_keys=True, indent=1), encoding="utf-8")
    print(f"wrote {args.out}: avg MAE {result['average']['mae']:.4f}")
    return 0


def cmd_corpus_stats(args) -> int:
    novels = rp.discover_novels(_require(args.indir, "run dir"))
    results = rp.collect_corpus(novels, delta_seed=args.seed)
    written = rp.emit_report(results, args.out)
    rp.write_manifest(Path(args.out), written)
    print(f"wrote {len(written)} report files to {args.out}")
    return 0


def cmd_gender(args) -> int:
    graph = import_graphml(_require(args.graph))
    if not graph.directed:
        raise CharspaceError("gender analysis expects the directed discussion graph")
    genders = {node: attrs.get("gender", "UNKNOWN")
               for node, attrs in graph.node_attrs.items()}
    vectors = {
        "in_strength": gm.degree_strength(graph)["IN_STRENGTH"].values,
        "out_strength": gm.degree_strength(graph)["OUT_STRENGTH"].values,
        "pagerank": gm.pagerank(graph).values,
    }
    out: dict = {"representation": {}, "edge_shares": None}
    for measure, values in vectors.items():
        try:
            ratio = st.representation_ratio(genders, values, k=args.top_k)
        except st.EvalError as exc:
            out["representation"][measure] = {"error": str(exc)}
            continue
        out["representation"][measure] = {
            "ratios": ratio.ratios, "k_used": ratio.k_used, "flagged": ratio.flagged,
        }
    try:
        shares = st.edge_gender_shares(graph)
        out["edge_shares"] = {"shares": shares.shares, "fm_mf_ratio": shares.fm_mf_ratio}
    except st.EvalError as exc:
        out["edge_shares"] = {"error": str(exc)}
    Path(args.out).write_text(json.dumps(out, sort_keys=True, indent=1), encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def cmd_embed(args) -> int:
    graph = import_graphml(_require(args.graph))
    config = poincare.EmbedConfig(
        dim=args.dim, negatives=args.negatives, epochs=args.epochs,
        learning_rate=args.lr, burn_in_epochs=args.burn_in, seed=args.seed,
    )
    trained = poincare.train(graph, config)
    poincare.write_embeddings_csv(args.out, trained)
    print(f"wrote {args.out}: {len(trained.points)} points, "
          f"final loss {trained.loss_trace[-1]:.4f}")
    if args.loss:
        poincare.write_loss_trace_csv(args.loss, trained)
    if args.svg:
        if args.dim != 2:
            raise CharspaceError("SVG rendering requires --dim 2")
        poincare.render_disk_svg(trained.points, graph, args.svg)
        print(f"wrote {args.svg}")
    return 0


def cmd_annotate_llm(args) -> int:
    doc = Document.load(_require(args.doc))
    registry = _load_registry(_require(args.registry))
    characters = sorted(c.canonical_name for c in registry)
    mode = GranularityMode.parse(args.mode)
    if args.mock:
        transport = MockTransport(_require(args.mock))
    elif args.endpoint:
        transport = HttpTransport(EndpointConfig(
            base_url=args.endpoint, model=args.model, temperature=args.temperature,
        ))
    else:
        raise CharspaceError("provide --mock SCRIPT or --endpoint URL")
    result = run_chapter_counts(
        doc, characters, mode, transport,
        model=args.model, temperature=args.temperature, parallelism=args.parallelism,
    )
    result.pred.write_csv(args.out)
    print(f"wrote {args.out}: {len(result.pred.cells)} rows, "
          f"{result.requests_sent} requests, {len(result.skipped)} chapters skipped")
    if args.telemetry:
        Path(args.telemetry).write_text(
            json.dumps(telemetry_to_json(result.telemetry), sort_keys=True, indent=1),
            encoding="utf-8",
        )
    return 0


def cmd_report(args) -> int:
    if args.config:
        config = load_run_config(args.config)
        manifest = run_corpus(config)
        print(f"wrote {manifest}")
        return 0
    novels = rp.discover_novels(_require(args.indir, "run dir"))
    results = rp.collect_corpus(novels, delta_seed=args.seed)
    written = rp.emit_report(results, args.out)
    rp.write_manifest(Path(args.out), written)
    print(f"wrote {len(written)} report files to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="charspace",
        description="Six-component character scores and character networks for novels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="segment a novel text file into a Document JSON")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--id", default=None, help="document id (default: file stem)")
    p.add_argument("--keep-preamble", action="store_true")
    p.add_argument("--chapter-pattern", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("registry", help="build the character registry from a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-total", type=int, default=1)
    p.add_argument("--min-proper", type=int, default=1)
    p.add_argument("--merge-map", default=None)
    p.add_argument("--gender-pronouns", default=None)
    p.set_defaults(func=cmd_registry)

    p = sub.add_parser("tag", help="score the six components per character and chapter")
    p.add_argument("--doc", default=None)
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--spans", default=None)
    p.add_argument("--registry", default=None)
    p.add_argument("--appearance", default=None)
    p.add_argument("--verbnet-overrides", default=None)
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("graph", help="build a character network and export GraphML")
    p.add_argument("--bundle", required=True)
    p.add_argument("--kind", choices=["cooccurrence", "dialogue", "discussion"], required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--registry", default=None)
    p.add_argument("--spans", default=None, help="spans.jsonl for the discussion graph")
    p.add_argument("--max-gap", type=int, default=1)
    p.add_argument("--adjacency", default=None, help="also write an edge-list CSV")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("metrics", help="centralities and global measures of a GraphML file")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", default=None, help="also write a flat CSV of every value")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("eval", help="MAE/bias/correlation of predicted vs gold scores")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("corpus-stats", help="aggregate per-novel artifacts into corpus tables")
    p.add_argument("--in", dest="indir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_corpus_stats)

    p = sub.add_parser("gender", help="gender representation and edge shares of a DC graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top-k", type=int, default=10)
    p.set_defaults(func=cmd_gender)

    p = sub.add_parser("embed", help="train a Poincare disk embedding of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None)
    p.add_argument("--loss", default=None)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--negatives", type=int, default=10)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--burn-in", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("annotate-llm", help="chapter-level counting via a chat endpoint")
    p.add_argument("--doc", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--mode", required=True,
                   help="granularity: {full|chunk}-{all|each}-{all|each} "
                        f"(choices: {', '.join(m.label() for m in ALL_MODES)})")
    p.add_argument("--out", required=True)
    p.add_argument("--telemetry", default=None)
    p.add_argument("--mock", default=None, help="JSONL script instead of a live endpoint")
    p.add_argument("--endpoint", default=None)
    p.add_argument("--model", default="gpt-4o-mini")
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--parallelism", type=int, default=4)
    p.set_defaults(func=cmd_annotate_llm)

    p = sub.add_parser("report", help="full corpus run from a config, or aggregate a run dir")
    p.add_argument("--config", default=None)
    p.add_argument("--in", dest="indir", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "report" and not args.config and not (args.indir and args.out):
            parser.error("report needs --config or both --in and --out")
        if args.command == "corpus-stats" and not (args.indir and args.out):
            parser.error("corpus-stats needs --in and --out")
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except CharspaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
