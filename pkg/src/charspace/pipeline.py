"""Per-novel pipeline and full-corpus orchestration used by `charspace report`."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import metrics as gm
from . import poincare
from . import report as rp
from .annotations import build_registry, merge_clusters, parse_bundle, read_merge_map
from .components import (
    VerbLexicon,
    full_window,
    score_document,
    windows_from_document,
    write_scores_csv,
    write_spans_jsonl,
)
from .config import NovelConfig, RunConfig
from .ingest import ingest_file
from .networks import (
    attach_component_totals,
    build_cooccurrence,
    build_dialogue,
    build_discussion,
    export_graphml,
)
from .resources import load_gender_pronouns, load_verbnet_overrides, load_wordlist
from .stats import ScoreTable


def _lexicons(config: RunConfig):
    appearance = (
        load_wordlist(config.appearance_path) if config.appearance_path else None
    )
    pronouns = (
        load_gender_pronouns(config.gender_pronouns_path)
        if config.gender_pronouns_path
        else None
    )
    overrides = (
        load_verbnet_overrides(config.verbnet_overrides_path)
        if config.verbnet_overrides_path
        else {}
    )
    return appearance, pronouns, VerbLexicon(verbnet_overrides=overrides)


def find_corpus_novels(corpus_dir: Path) -> list[tuple[str, Path, Path]]:
    """(novel_id, text path, bundle dir) for every <id>.txt with a matching
    <id>.bundle/ directory."""
    out = []
    for text_path in sorted(Path(corpus_dir).glob("*.txt")):
        bundle_dir = text_path.with_suffix(".bundle")
        if bundle_dir.is_dir():
            out.append((text_path.stem, text_path, bundle_dir))
    return out


def run_novel(
    novel_id: str,
    text_path: Path,
    bundle_dir: Path,
    out_dir: Path,
    novel_cfg: NovelConfig,
    verb_lexicon: VerbLexicon,
    appearance=None,
    pronouns=None,
    seed: int = 0,
    embed: bool = False,
) -> Path:
    """Ingest, tag, and graph one novel into ``out_dir/<novel_id>/``."""
    novel_dir = Path(out_dir) / novel_id
    novel_dir.mkdir(parents=True, exist_ok=True)

    doc = ingest_file(text_path, doc_id=novel_id)
    doc.save(novel_dir / "document.json")

    bundle = parse_bundle(bundle_dir, novel_id=novel_id)
    registry = build_registry(bundle, pronoun_genders=pronouns)
    if novel_cfg.merge_map is not None:
        registry = merge_clusters(registry, read_merge_map(novel_cfg.merge_map, registry))

    doc_paragraphs = sum(len(c.paragraphs) for c in doc.chapters)
    if doc_paragraphs == len(bundle.paragraph_ids):
        windows = windows_from_document(doc)
    else:
        windows = [full_window(bundle)]
    scores, spans = score_document(bundle, registry, verb_lexicon, windows, appearance)
    write_scores_csv(novel_dir / "scores.csv", novel_id, scores, registry)
    write_spans_jsonl(novel_dir / "spans.jsonl", spans)

    table = ScoreTable.read_csv(novel_dir / "scores.csv")
    totals_by_name = table.book_totals(novel_id)
    name_to_id = {c.canonical_name: c.char_id for c in registry}
    totals_by_id = {
        name_to_id[name]: tags for name, tags in totals_by_name.items() if name in name_to_id
    }

    graphs = {
        "cooccurrence": build_cooccurrence(bundle, registry),
        "dialogue": build_dialogue(bundle, registry),
        "discussion": build_discussion(
            [s for s in spans if s.component == "DC"], registry
        ),
    }
    for kind, graph in graphs.items():
        attach_component_totals(graph, totals_by_id)
        export_graphml(graph, novel_dir / f"{kind}.graphml")
        metrics_json = gm.all_metrics(graph, delta_seed=seed)
        (novel_dir / f"metrics_{kind}.json").write_text(
            json.dumps(metrics_json, sort_keys=True, indent=1), encoding="utf-8"
        )

    rp.component_bars_svg(totals_by_name, novel_dir / "components.svg")
    rp.network_summary_svg(
        {k: json.loads((novel_dir / f"metrics_{k}.json").read_text())["global"]
         for k in graphs},
        novel_dir / "networks.svg",
    )

    if embed and graphs["cooccurrence"].num_edges() > 0:
        trained = poincare.train(
            graphs["cooccurrence"], poincare.EmbedConfig(seed=seed)
        )
        poincare.write_embeddings_csv(novel_dir / "embeddings.csv", trained)
        poincare.write_loss_trace_csv(novel_dir / "loss_trace.csv", trained)
        poincare.render_disk_svg(
            trained.points, graphs["cooccurrence"], novel_dir / "poincare.svg"
        )

    if novel_cfg.first_person:
        (novel_dir / "first_person.flag").write_text("excluded from corpus statistics\n")
    return novel_dir


def run_corpus(config: RunConfig) -> Path:
    """Full corpus run: per-novel pipelines, aggregation, manifest."""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    appearance, pronouns, verb_lexicon = _lexicons(config)
    novels = find_corpus_novels(config.corpus_dir)

    def job(entry):
        novel_id, text_path, bundle_dir = entry
        return run_novel(
            novel_id, text_path, bundle_dir, config.out_dir, config.novel(novel_id),
            verb_lexicon, appearance, pronouns, seed=config.seed, embed=config.embed,
        )

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            list(pool.map(job, novels))
    else:
        for entry in novels:
            job(entry)

    artifacts = rp.discover_novels(config.out_dir)
    results = rp.collect_corpus(artifacts, delta_seed=config.seed)
    written = rp.emit_report(results, config.out_dir / "report")

    all_paths = list(written)
    for sub in sorted(config.out_dir.iterdir()):
        if sub.is_dir() and sub.name != "report":
            all_paths.extend(p for p in sorted(sub.iterdir()) if p.is_file())
    return rp.write_manifest(config.out_dir, all_paths)
