import json
from pathlib import Path

import pytest

from charspace.cli import main
from charspace.stats import ScoreTable
from helpers.fixtures import FIXTURE_BUILDERS

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture()
def corpus(tmp_path):
    """pp_mini and hightown as <id>.txt + <id>.bundle dirs."""
    for name in ("pp_mini", "hightown", "monologue"):
        builder = FIXTURE_BUILDERS[name]()
        builder.write(tmp_path / f"{name}.bundle")
        builder.write_text(tmp_path / f"{name}.txt")
    return tmp_path


def test_unknown_subcommand_exits_2(capsys):
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_unknown_flag_exits_2(capsys):
    assert main(["ingest", "--does-not-exist", "x"]) == 2
    capsys.readouterr()


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    capsys.readouterr()


def test_missing_input_file_exits_1(tmp_path, capsys):
    code = main(["ingest", "--in", str(tmp_path / "nope.txt"),
                 "--out", str(tmp_path / "doc.json")])
    assert code == 1
    err = capsys.readouterr().err
    assert "nope.txt" in err


def test_ingest_tag_graph_metrics_eval_round(corpus, tmp_path, capsys):
    out = corpus / "out"
    out.mkdir()
    doc = out / "doc.json"
    assert main(["ingest", "--in", str(corpus / "pp_mini.txt"),
                 "--out", str(doc), "--id", "pp_mini"]) == 0
    assert doc.exists()

    registry = out / "registry.json"
    assert main(["registry", "--bundle", str(corpus / "pp_mini.bundle"),
                 "--out", str(registry)]) == 0
    names = {c["canonical_name"] for c in json.loads(registry.read_text())}
    assert names == {"Elizabeth", "Darcy", "Jane", "Mrs. Bennet", "Bingley"}

    scores = out / "scores.csv"
    spans = out / "spans.jsonl"
    assert main(["tag", "--doc", str(doc), "--bundle", str(corpus / "pp_mini.bundle"),
                 "--registry", str(registry), "--out", str(scores),
                 "--spans", str(spans)]) == 0
    got = ScoreTable.read_csv(scores)
    golden = ScoreTable.read_csv(FIXTURES / "golden_pp_mini.csv")
    assert got.cells == golden.cells

    for kind in ("cooccurrence", "dialogue", "discussion"):
        graph_path = out / f"{kind}.graphml"
        argv = ["graph", "--bundle", str(corpus / "pp_mini.bundle"),
                "--registry", str(registry), "--kind", kind, "--out", str(graph_path)]
        if kind == "discussion":
            argv += ["--spans", str(spans)]
        assert main(argv) == 0
        assert graph_path.exists()

    metrics_path = out / "metrics.json"
    assert main(["metrics", "--graph", str(out / "cooccurrence.graphml"),
                 "--out", str(metrics_path)]) == 0
    payload = json.loads(metrics_path.read_text())
    assert "PAGERANK" in payload["per_node"]
    assert payload["global"]["nodes"] == 5

    eval_path = out / "eval.json"
    assert main(["eval", "--gold", str(FIXTURES / "golden_pp_mini.csv"),
                 "--pred", str(scores), "--out", str(eval_path)]) == 0
    result = json.loads(eval_path.read_text())
    assert result["average"]["mae"] == 0.0
    for tag in ("N", "A", "C", "I", "DC", "DN"):
        assert result["per_component"][tag]["mae"] == 0.0
    capsys.readouterr()


def test_gender_command(corpus, tmp_path, capsys):
    out = corpus / "g"
    out.mkdir()
    registry = out / "registry.json"
    main(["registry", "--bundle", str(corpus / "hightown.bundle"), "--out", str(registry)])
    graph_path = out / "dc.graphml"
    main(["graph", "--bundle", str(corpus / "hightown.bundle"),
          "--registry", str(registry), "--kind", "discussion", "--out", str(graph_path)])
    gender_path = out / "gender.json"
    assert main(["gender", "--graph", str(graph_path), "--out", str(gender_path)]) == 0
    payload = json.loads(gender_path.read_text())
    assert "in_strength" in payload["representation"]
    shares = payload["edge_shares"]["shares"]
    assert sum(shares.values()) == pytest.approx(1.0)
    capsys.readouterr()


def test_gender_rejects_undirected(corpus, capsys):
    out = corpus / "g2"
    out.mkdir()
    graph_path = out / "co.graphml"
    main(["graph", "--bundle", str(corpus / "hightown.bundle"),
          "--kind", "cooccurrence", "--out", str(graph_path)])
    assert main(["gender", "--graph", str(graph_path),
                 "--out", str(out / "x.json")]) == 1
    capsys.readouterr()


def test_embed_command(corpus, capsys):
    out = corpus / "e"
    out.mkdir()
    graph_path = out / "co.graphml"
    main(["graph", "--bundle", str(corpus / "pp_mini.bundle"),
          "--kind", "cooccurrence", "--out", str(graph_path)])
    emb = out / "embeddings.csv"
    svg = out / "disk.svg"
    loss = out / "loss.csv"
    assert main(["embed", "--graph", str(graph_path), "--out", str(emb),
                 "--svg", str(svg), "--loss", str(loss),
                 "--epochs", "5", "--seed", "7"]) == 0
    assert emb.exists() and svg.exists() and loss.exists()
    capsys.readouterr()


def test_annotate_llm_with_mock(corpus, capsys):
    out = corpus / "llm"
    out.mkdir()
    doc = out / "doc.json"
    registry = out / "registry.json"
    main(["ingest", "--in", str(corpus / "pp_mini.txt"), "--out", str(doc),
          "--id", "pp_mini"])
    main(["registry", "--bundle", str(corpus / "pp_mini.bundle"), "--out", str(registry)])
    content = json.dumps({"Elizabeth": {"N": 2, "A": 1, "C": 0, "I": 0, "DN": 0, "DC": 0}})
    script = out / "script.jsonl"
    script.write_text("\n".join(json.dumps({"content": content}) for _ in range(2)))
    pred = out / "pred.csv"
    telemetry = out / "telemetry.json"
    assert main(["annotate-llm", "--doc", str(doc), "--registry", str(registry),
                 "--mode", "full-all-all", "--mock", str(script),
                 "--out", str(pred), "--telemetry", str(telemetry)]) == 0
    table = ScoreTable.read_csv(pred)
    assert table.get("pp_mini", 1, "Elizabeth", "N") == 2
    assert telemetry.exists()
    capsys.readouterr()


def test_annotate_llm_requires_transport(corpus, capsys):
    out = corpus / "llm2"
    out.mkdir()
    doc = out / "doc.json"
    registry = out / "registry.json"
    main(["ingest", "--in", str(corpus / "pp_mini.txt"), "--out", str(doc)])
    main(["registry", "--bundle", str(corpus / "pp_mini.bundle"), "--out", str(registry)])
    assert main(["annotate-llm", "--doc", str(doc), "--registry", str(registry),
                 "--mode", "full-all-all", "--out", str(out / "p.csv")]) == 1
    capsys.readouterr()


def write_run_config(corpus, out_dir, embed=False):
    config = corpus / "run.ini"
    config.write_text(
        "[run]\n"
        f"out_dir = {out_dir}\n"
        "seed = 11\n"
        f"embed = {'true' if embed else 'false'}\n"
        "[corpus]\n"
        f"dir = {corpus}\n"
        "[novel:monologue]\n"
        "first_person = true\n",
        encoding="utf-8",
    )
    return config


def test_full_report_run_and_exclusions(corpus, capsys):
    config = write_run_config(corpus, corpus / "run_out")
    assert main(["report", "--config", str(config)]) == 0
    out = corpus / "run_out"
    report = json.loads((out / "report" / "report.json").read_text())
    assert report["novels"] == ["hightown", "pp_mini"]
    assert report["excluded_first_person"] == ["monologue"]
    assert (out / "report" / "corpus_summary.csv").exists()
    assert (out / "report" / "gender_representation.csv").exists()
    assert (out / "manifest.json").exists()
    assert (out / "monologue" / "first_person.flag").exists()
    capsys.readouterr()


def test_report_requires_config_or_in_out(capsys):
    assert main(["report"]) == 2
    capsys.readouterr()


def test_worker_pool_matches_sequential_run(corpus, capsys):
    manifests = []
    for label, workers in (("seq", 1), ("par", 3)):
        out = corpus / f"run_{label}"
        config = corpus / f"{label}.ini"
        config.write_text(
            "[run]\n"
            f"out_dir = {out}\n"
            "seed = 11\n"
            f"workers = {workers}\n"
            "[corpus]\n"
            f"dir = {corpus}\n"
            "[novel:monologue]\n"
            "first_person = true\n",
            encoding="utf-8",
        )
        assert main(["report", "--config", str(config)]) == 0
        manifests.append(json.loads((out / "manifest.json").read_text()))
    assert manifests[0] == manifests[1]
    capsys.readouterr()


def test_zero_novels_is_a_report_error(tmp_path, capsys):
    empty = tmp_path / "empty_run"
    empty.mkdir()
    assert main(["report", "--in", str(empty), "--out", str(tmp_path / "r")]) == 1
    assert "no novels" in capsys.readouterr().err


def test_gender_free_corpus_skips_gender_tables(tmp_path, capsys):
    from helpers.bundle_builder import BundleBuilder

    # A cast without any gendered pronouns anywhere.
    b = BundleBuilder("plain")
    b.chapter()
    b.paragraph()
    b.sent("{Ash|c1} met {Bay|c2} .")
    with b.quote(speaker=1):
        b.sent("Q[ {Bay|c2} looks well . ]Q")
    with b.quote(speaker=2):
        b.sent("Q[ {Ash|c1} flatters . ]Q")
    b.write(tmp_path / "plain.bundle")
    b.write_text(tmp_path / "plain.txt")
    out = tmp_path / "out"
    config = tmp_path / "run.ini"
    config.write_text(
        f"[run]\nout_dir = {out}\n[corpus]\ndir = {tmp_path}\n", encoding="utf-8")
    assert main(["report", "--config", str(config)]) == 0
    report = json.loads((out / "report" / "report.json").read_text())
    assert "gender_representation" not in report["tables"]
    assert any("Gender tables skipped" in note for note in report["footnotes"])
    assert not (out / "report" / "gender_representation.csv").exists()
    capsys.readouterr()


def test_corpus_stats_aggregates_existing_run(corpus, capsys):
    config = write_run_config(corpus, corpus / "within")
    main(["report", "--config", str(config)])
    out = corpus / "agg"
    assert main(["corpus-stats", "--in", str(corpus / "within"),
                 "--out", str(out)]) == 0
    assert (out / "concentration.csv").exists()
    capsys.readouterr()
