"""Corpus aggregation, report tables, SVG figures, and the artifact manifest.

Every writer here is deterministic: fixed orderings, fixed float formats,
no timestamps, so identical inputs produce byte-identical outputs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from . import metrics as gm
from . import stats as st
from .errors import ReportError
from .components import COMPONENTS
from .networks import CharGraph, import_graphml

NETWORK_KINDS = ("cooccurrence", "dialogue", "discussion")


@dataclass
class NovelArtifacts:
    """Paths of one novel's per-novel outputs inside a run directory."""

    novel_id: str
    directory: Path
    first_person: bool = False

    @property
    def scores_csv(self) -> Path:
        return self.directory / "scores.csv"

    def graph_path(self, kind: str) -> Path:
        return self.directory / f"{kind}.graphml"

    def has_graphs(self) -> bool:
        return all(self.graph_path(k).exists() for k in NETWORK_KINDS)


def discover_novels(run_dir) -> list[NovelArtifacts]:
    run_dir = Path(run_dir)
    novels = []
    for sub in sorted(p for p in run_dir.iterdir() if p.is_dir()):
        if (sub / "scores.csv").exists():
            first_person = (sub / "first_person.flag").exists()
            novels.append(NovelArtifacts(sub.name, sub, first_person=first_person))
    return novels


def _fmt(value, digits: int = 4) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.{digits}f}"
    return str(value)


def _load_novel(novel: NovelArtifacts):
    table = st.ScoreTable.read_csv(novel.scores_csv)
    graphs: dict[str, CharGraph] = {}
    for kind in NETWORK_KINDS:
        path = novel.graph_path(kind)
        if path.exists():
            graphs[kind] = import_graphml(path)
    return table, graphs


def _name_keyed(values: dict[int, float], graph: CharGraph) -> dict[str, float]:
    out = {}
    for node, value in values.items():
        name = str(graph.node_attrs.get(node, {}).get("name", node))
        out[name] = value
    return out


def _top_name(values: dict[str, float]) -> str:
    return sorted(values, key=lambda k: (-values[k], k))[0]


@dataclass
class CorpusResults:
    """Everything the report tables need, computed once per corpus."""

    novels: list[str]
    excluded: list[str]
    global_stats: dict[str, dict[str, dict]]  # novel -> kind -> metrics.json global block
    protagonist_by: dict[str, dict[str, str]]  # measure -> novel -> top character name
    tag_records: list[dict]  # input rows of stats.tag_centrality_table
    concentration_values: dict[str, dict[str, st.Concentration]]  # measure -> novel -> c14n
    cross_network_rhos: dict[str, dict[str, float]]  # centrality -> novel -> spearman
    gender_ratios: dict[str, dict[str, dict[str, float]]]  # measure -> novel -> {M, F}
    edge_shares: dict[str, st.EdgeGenderShares]  # novel -> shares
    provenance: dict[str, list[str]]


def collect_corpus(novels: list[NovelArtifacts], delta_seed: int = 0) -> CorpusResults:
    """Per-novel metrics and the cross-novel records behind every table."""
    included = [n for n in novels if not n.first_person]
    if not included:
        raise ReportError("no novels to aggregate (all excluded or none found)")
    excluded = [n.novel_id for n in novels if n.first_person]

    results = CorpusResults(
        novels=[n.novel_id for n in included],
        excluded=excluded,
        global_stats={},
        protagonist_by={m: {} for m in (
            "N", "C", "PR_co", "EV_co", "PR_di", "EV_di")},
        tag_records=[],
        concentration_values={m: {} for m in (
            "N", "C", "I", "A", "DC", "DN", "PR_co", "PR_di")},
        cross_network_rhos={m: {} for m in ("PageRank", "Eigenvector", "Degree", "Betweenness")},
        gender_ratios={m: {} for m in ("in_strength", "out_strength", "pagerank")},
        edge_shares={},
        provenance={},
    )

    for novel in included:
        table, graphs = _load_novel(novel)
        novel_id = novel.novel_id
        totals = table.book_totals(novel_id)
        tag_values = {
            tag: {name: counts[tag] for name, counts in totals.items() if name != "UNATTRIBUTED"}
            for tag in COMPONENTS
        }

        results.global_stats[novel_id] = {}
        centralities: dict[str, dict[str, float]] = {}
        for kind, graph in graphs.items():
            all_m = gm.all_metrics(graph, delta_seed=delta_seed)
            results.global_stats[novel_id][kind] = all_m["global"] | {
                "flags": all_m["flags"], "directed": all_m["directed"],
            }
            short = {"cooccurrence": "co", "dialogue": "di", "discussion": "dc"}[kind]
            if graph.num_edges() == 0:
                continue
            if not graph.directed:
                pr = _name_keyed(gm.pagerank(graph).values, graph)
                ev_vec = all_m["per_node"].get("EIGENVECTOR")
                centralities[f"PR_{short}"] = pr
                if ev_vec is not None:
                    centralities[f"EV_{short}"] = _name_keyed(
                        {int(k): v for k, v in ev_vec.items()}, graph)
                centralities[f"DEG_{short}"] = _name_keyed(gm.degree_strength(graph)["DEGREE"].values, graph)
                centralities[f"BET_{short}"] = _name_keyed(gm.betweenness(graph).values, graph)

        for tag in ("N", "C"):
            if tag_values[tag]:
                results.protagonist_by[tag][novel_id] = _top_name(tag_values[tag])
        for measure in ("PR_co", "EV_co", "PR_di", "EV_di"):
            if measure in centralities:
                results.protagonist_by[measure][novel_id] = _top_name(centralities[measure])

        record_centralities = {
            key: centralities[key]
            for key in ("PR_co", "EV_co", "PR_di", "EV_di")
            if key in centralities
        }
        if record_centralities:
            results.tag_records.append({
                "novel": novel_id, "tags": tag_values, "centralities": record_centralities,
            })

        for tag in COMPONENTS:
            vals = [v for v in tag_values[tag].values()]
            if vals and sum(vals) > 0:
                results.concentration_values[tag][novel_id] = st.concentration(vals)
        for measure in ("PR_co", "PR_di"):
            if measure in centralities and centralities[measure]:
                results.concentration_values[measure][novel_id] = st.concentration(
                    centralities[measure].values())

        for name, rho_key in (("PageRank", "PR"), ("Eigenvector", "EV"),
                              ("Degree", "DEG"), ("Betweenness", "BET")):
            co = centralities.get(f"{rho_key}_co")
            di = centralities.get(f"{rho_key}_di")
            if co and di:
                common = sorted(set(co) & set(di))
                if len(common) >= 3:
                    rho = st.spearman([co[k] for k in common], [di[k] for k in common])
                    if rho is not None:
                        results.cross_network_rhos[name][novel_id] = rho

        dc_graph = graphs.get("discussion")
        if dc_graph is not None and dc_graph.num_edges() > 0:
            genders = {node: attrs.get("gender", "UNKNOWN")
                       for node, attrs in dc_graph.node_attrs.items()}
            has_gender = any(g in ("M", "F") for g in genders.values())
            if has_gender:
                vectors = {
                    "in_strength": gm.degree_strength(dc_graph)["IN_STRENGTH"].values,
                    "out_strength": gm.degree_strength(dc_graph)["OUT_STRENGTH"].values,
                    "pagerank": gm.pagerank(dc_graph).values,
                }
                for measure, values in vectors.items():
                    try:
                        ratio = st.representation_ratio(genders, values)
                    except st.EvalError:
                        continue
                    cleaned = {g: r for g, r in ratio.ratios.items() if r is not None}
                    if {"M", "F"} <= set(cleaned):
                        results.gender_ratios[measure][novel_id] = cleaned
                try:
                    results.edge_shares[novel_id] = st.edge_gender_shares(dc_graph)
                except st.EvalError:
                    pass

        # Provenance keys are run-dir-relative so reruns stay byte-identical.
        results.provenance[novel_id] = [f"{novel_id}/scores.csv"] + [
            f"{novel_id}/{kind}.graphml" for kind in NETWORK_KINDS
            if novel.graph_path(kind).exists()
        ]
    return results


# ---------------------------------------------------------------------------
# Table emission


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def emit_report(results: CorpusResults, out_dir) -> list[Path]:
    """Write the corpus tables (CSV + JSON) and figure SVGs; returns paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    report_json: dict = {
        "novels": results.novels,
        "excluded_first_person": results.excluded,
        "footnotes": [
            "All '+/-' cells are mean +/- sample (n-1) standard deviation across novels.",
            "Representation ratio = top-k share of a gender divided by its share of the "
            "gendered cast; ratios are averaged per novel.",
        ],
        "tables": {},
    }

    report_json["provenance"] = results.provenance  # novel -> per-novel artifacts

    # Corpus-averaged global network statistics.
    rows = []
    stat_keys = ["nodes", "edges", "density", "gini_degree", "gini_strength",
                 "gini_in_strength", "gini_out_strength", "centralization",
                 "assortativity", "clustering", "avg_path_length",
                 "delta_hyperbolicity", "reciprocity"]
    summary_cells = {}
    for kind in NETWORK_KINDS:
        for key in stat_keys:
            contributing = sorted(
                n for n in results.novels
                if kind in results.global_stats.get(n, {})
                and results.global_stats[n][kind].get(key) is not None
            )
            values = [results.global_stats[n][kind][key] for n in contributing]
            if not values:
                continue
            ms = st.mean_sd(values)
            cell = f"{kind}/{key}"
            summary_cells[cell] = {"mean": ms.mean, "sd": ms.sd, "n": ms.n,
                                   "novels": contributing}
            rows.append([kind, key, _fmt(ms.mean), _fmt(ms.sd), ms.n])
    path = out_dir / "corpus_summary.csv"
    _write_csv(path, ["network", "metric", "mean", "sd", "n"], rows)
    written.append(path)
    report_json["tables"]["corpus_summary"] = {"cells": summary_cells}

    # Protagonist agreement.
    comparisons = [
        ("N", "PR_co"), ("N", "EV_co"), ("C", "PR_di"), ("C", "EV_di"),
        ("N", "C"), ("PR_co", "PR_di"),
    ]
    rows = []
    agreement_cells = {}
    for a, b in comparisons:
        tops_a = results.protagonist_by.get(a, {})
        tops_b = results.protagonist_by.get(b, {})
        common = sorted(set(tops_a) & set(tops_b))
        if not common:
            continue
        pct = st.protagonist_agreement(
            {n: tops_a[n] for n in common}, {n: tops_b[n] for n in common})
        rows.append([f"{a} vs {b}", _fmt(pct, 1), len(common)])
        agreement_cells[f"{a}_vs_{b}"] = {"match_pct": pct, "n": len(common),
                                          "novels": common}
    path = out_dir / "protagonist_agreement.csv"
    _write_csv(path, ["comparison", "match_pct", "n"], rows)
    written.append(path)
    report_json["tables"]["protagonist_agreement"] = {"cells": agreement_cells}

    # Cross-network centrality correlation.
    rows = []
    cross_cells = {}
    for name in ("PageRank", "Eigenvector", "Degree", "Betweenness"):
        per_novel = results.cross_network_rhos.get(name, {})
        if not per_novel:
            continue
        ms = st.mean_sd(list(per_novel.values()))
        rows.append([name, _fmt(ms.mean), _fmt(ms.sd), ms.n])
        cross_cells[name] = {"rho": ms.mean, "sd": ms.sd, "n": ms.n,
                             "novels": sorted(per_novel)}
    path = out_dir / "cross_network_correlation.csv"
    _write_csv(path, ["centrality", "rho_mean", "rho_sd", "n"], rows)
    written.append(path)
    report_json["tables"]["cross_network_correlation"] = {"cells": cross_cells}

    # Tag x centrality Spearman means.
    table = st.tag_centrality_table(results.tag_records)
    cent_names = sorted({name for row in table.values() for name in row})
    rows = []
    tag_cells = {}
    for tag in COMPONENTS:
        row = [tag]
        for name in cent_names:
            cell = table[tag].get(name)
            row.append(_fmt(cell.mean) if cell else "")
            row.append(cell.n if cell else 0)
            if cell and cell.mean is not None:
                tag_cells[f"{tag}/{name}"] = {"rho": cell.mean, "n": cell.n,
                                              "novels": list(cell.novels)}
        rows.append(row)
    header = ["tag"]
    for name in cent_names:
        header.extend([name, f"{name}_n"])
    path = out_dir / "tag_centrality.csv"
    _write_csv(path, header, rows)
    written.append(path)
    report_json["tables"]["tag_centrality"] = {"cells": tag_cells}

    # Concentration of character importance.
    rows = []
    conc_cells = {}
    for measure in ("N", "C", "I", "A", "DC", "DN", "PR_co", "PR_di"):
        per_novel = results.concentration_values.get(measure, {})
        if not per_novel:
            continue
        ginis = [c.gini for c in per_novel.values()]
        shares = [c.top1_share for c in per_novel.values()]
        ratios = [c.top1_vs_2 for c in per_novel.values() if c.top1_vs_2 is not None]
        row = [measure, _fmt(st.mean_sd(ginis).mean), _fmt(st.mean_sd(shares).mean)]
        row.append(_fmt(st.mean_sd(ratios).mean) if ratios else "")
        row.append(len(per_novel))
        rows.append(row)
        conc_cells[measure] = {
            "gini": st.mean_sd(ginis).mean,
            "top1": st.mean_sd(shares).mean,
            "top1_vs_2": st.mean_sd(ratios).mean if ratios else None,
            "n": len(per_novel),
            "novels": sorted(per_novel),
        }
    path = out_dir / "concentration.csv"
    _write_csv(path, ["measure", "gini", "top1_share", "top1_vs_2", "n"], rows)
    written.append(path)
    report_json["tables"]["concentration"] = {"cells": conc_cells}

    # Gender tables (skipped with a note when no gendered novels exist).
    gender_rows = []
    gender_cells = {}
    any_gender = any(results.gender_ratios[m] for m in results.gender_ratios)
    if any_gender:
        for measure in ("in_strength", "out_strength", "pagerank"):
            per_novel = results.gender_ratios.get(measure, {})
            paired = [(r["F"], r["M"]) for r in per_novel.values()]
            if not paired:
                continue
            f_vals = [p[0] for p in paired]
            m_vals = [p[1] for p in paired]
            ms_f = st.mean_sd(f_vals)
            ms_m = st.mean_sd(m_vals)
            if len(paired) >= 2:
                test = st.paired_t_test(f_vals, m_vals)
                p_value = test.p_two_sided
            else:
                p_value = None
            gender_rows.append([
                measure, _fmt(ms_m.mean), _fmt(ms_m.sd),
                _fmt(ms_f.mean), _fmt(ms_f.sd), _fmt(p_value, 6), len(paired),
            ])
            gender_cells[measure] = {
                "M_mean": ms_m.mean, "M_sd": ms_m.sd,
                "F_mean": ms_f.mean, "F_sd": ms_f.sd,
                "p_F_vs_M": p_value, "n": len(paired),
                "novels": sorted(per_novel),
            }
        path = out_dir / "gender_representation.csv"
        _write_csv(path, ["measure", "M_mean", "M_sd", "F_mean", "F_sd", "p_F_vs_M", "n"],
                   gender_rows)
        written.append(path)
        report_json["tables"]["gender_representation"] = {"cells": gender_cells}

        share_rows = []
        share_cells = {}
        shares_by_type = {key: [] for key in ("FF", "FM", "MF", "MM")}
        ratios = []
        fm_list, mf_list = [], []
        for novel_id in sorted(results.edge_shares):
            shares = results.edge_shares[novel_id]
            for key in shares_by_type:
                shares_by_type[key].append(shares.shares[key])
            fm_list.append(shares.shares["FM"])
            mf_list.append(shares.shares["MF"])
            if shares.fm_mf_ratio is not None:
                ratios.append(shares.fm_mf_ratio)
        if fm_list:
            share_novels = sorted(results.edge_shares)
            for key in ("FF", "FM", "MF", "MM"):
                ms = st.mean_sd(shares_by_type[key])
                share_rows.append([key, _fmt(ms.mean), _fmt(ms.sd), ms.n])
                share_cells[key] = {"mean": ms.mean, "sd": ms.sd, "n": ms.n,
                                    "novels": share_novels}
            if ratios:
                ms = st.mean_sd(ratios)
                p_value = (st.paired_t_test(fm_list, mf_list).p_two_sided
                           if len(fm_list) >= 2 else None)
                share_rows.append(["FM_over_MF", _fmt(ms.mean), _fmt(ms.sd), ms.n])
                share_cells["FM_over_MF"] = {
                    "mean": ms.mean, "sd": ms.sd, "n": ms.n, "p_FM_vs_MF": p_value,
                }
            path = out_dir / "edge_gender.csv"
            _write_csv(path, ["edge_type", "mean_share", "sd", "n"], share_rows)
            written.append(path)
            report_json["tables"]["edge_gender"] = {"cells": share_cells}
    else:
        report_json["footnotes"].append(
            "Gender tables skipped: no novels carried gender labels."
        )

    path = out_dir / "report.json"
    path.write_text(json.dumps(report_json, ensure_ascii=False, sort_keys=True, indent=1),
                    encoding="utf-8")
    written.append(path)
    return written


# ---------------------------------------------------------------------------
# Figures


def component_bars_svg(totals: dict[str, dict[str, int]], path, top_n: int = 10,
                       width: int = 720, height: int = 360) -> None:
    """Stacked per-component total-score bars for the top characters."""
    ranked = sorted(
        (name for name in totals if name != "UNATTRIBUTED"),
        key=lambda name: (-sum(totals[name].values()), name),
    )[:top_n]
    if not ranked:
        ranked = []
    max_total = max((sum(totals[name].values()) for name in ranked), default=1) or 1
    colors = {"N": "#4c78a8", "A": "#f58518", "C": "#54a24b",
              "I": "#e45756", "DC": "#72b7b2", "DN": "#b279a2"}
    margin = 40
    plot_h = height - 2 * margin
    bar_w = (width - 2 * margin) / max(len(ranked), 1)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'  <line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="#333333"/>',
    ]
    for i, name in enumerate(ranked):
        x = margin + i * bar_w + 2
        y = height - margin
        for tag in COMPONENTS:
            value = totals[name].get(tag, 0)
            if value <= 0:
                continue
            h = plot_h * value / max_total
            y -= h
            lines.append(
                f'  <rect x="{x:.2f}" y="{y:.2f}" width="{bar_w - 4:.2f}" '
                f'height="{h:.2f}" fill="{colors[tag]}"/>'
            )
        label = name if len(name) <= 12 else name[:11] + "…"
        lines.append(
            f'  <text x="{x + (bar_w - 4) / 2:.2f}" y="{height - margin + 14}" '
            f'font-size="10" font-family="sans-serif" text-anchor="middle">'
            f'{_xml(label)}</text>'
        )
    for j, tag in enumerate(COMPONENTS):
        lx = margin + j * 60
        lines.append(f'  <rect x="{lx}" y="8" width="12" height="12" fill="{colors[tag]}"/>')
        lines.append(
            f'  <text x="{lx + 16}" y="18" font-size="11" font-family="sans-serif">{tag}</text>'
        )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def network_summary_svg(global_stats: dict[str, dict], path,
                        width: int = 720, height: int = 300) -> None:
    """Bar panel of node counts and degree Gini per network kind."""
    kinds = [k for k in NETWORK_KINDS if k in global_stats]
    margin = 50
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    if kinds:
        max_nodes = max(global_stats[k].get("nodes", 0) for k in kinds) or 1
        bar_w = (width / 2 - 2 * margin) / len(kinds)
        for i, kind in enumerate(kinds):
            nodes = global_stats[kind].get("nodes", 0)
            h = (height - 2 * margin) * nodes / max_nodes
            x = margin + i * bar_w
            lines.append(
                f'  <rect x="{x:.2f}" y="{height - margin - h:.2f}" '
                f'width="{bar_w - 6:.2f}" height="{h:.2f}" fill="#4c78a8"/>'
            )
            lines.append(
                f'  <text x="{x + (bar_w - 6) / 2:.2f}" y="{height - margin + 14}" '
                f'font-size="10" font-family="sans-serif" text-anchor="middle">{kind[:6]}</text>'
            )
            gini_val = global_stats[kind].get("gini_degree")
            if gini_val is not None:
                gx = width / 2 + margin + i * bar_w
                gh = (height - 2 * margin) * gini_val
                lines.append(
                    f'  <rect x="{gx:.2f}" y="{height - margin - gh:.2f}" '
                    f'width="{bar_w - 6:.2f}" height="{gh:.2f}" fill="#f58518"/>'
                )
                lines.append(
                    f'  <text x="{gx + (bar_w - 6) / 2:.2f}" y="{height - margin + 14}" '
                    f'font-size="10" font-family="sans-serif" text-anchor="middle">{kind[:6]}</text>'
                )
        lines.append(
            f'  <text x="{margin}" y="20" font-size="12" font-family="sans-serif">Nodes</text>'
        )
        lines.append(
            f'  <text x="{width / 2 + margin}" y="20" font-size="12" '
            'font-family="sans-serif">Degree Gini</text>'
        )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _xml(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ---------------------------------------------------------------------------
# Manifest


def write_manifest(out_dir, paths: list[Path]) -> Path:
    out_dir = Path(out_dir)
    entries = []
    for path in sorted(set(Path(p) for p in paths)):
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        entries.append({"path": str(path.relative_to(out_dir)), "sha256": digest})
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps({"artifacts": entries}, sort_keys=True, indent=1), encoding="utf-8"
    )
    return manifest_path
