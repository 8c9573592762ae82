"""End-to-end CLI runs in a temp workspace with the offline mock backend."""

import json

import pytest

from appmt.backends import MockTranslator
from appmt.cli import main
from appmt.corpus import load_app_corpus
from appmt.pipeline import load_run, run_app, save_run

from tests.conftest import IDIOMS, make_idiom_bitext


@pytest.fixture
def workspace(tmp_path):
    bitext, simplifier, backend = make_idiom_bitext(24, seed=13)
    tsv = tmp_path / "test.tsv"
    with open(tsv, "w", encoding="utf-8") as fh:
        for p in bitext.pairs:
            fh.write(f"{p.src}\t{p.tgt}\n")
    rules = tmp_path / "rules.tsv"
    with open(rules, "w", encoding="utf-8") as fh:
        fh.write("# idiom table\n")
        for pattern, replacement in IDIOMS:
            fh.write(f"{pattern}\t{replacement}\n")
    return tmp_path, tsv, rules


def test_backtranslate_and_build_corpus(workspace):
    tmp_path, tsv, _ = workspace
    out = tmp_path / "bt.jsonl"
    assert main([
        "backtranslate", "--bitext", str(tsv), "--format", "tsv",
        "--pair", "en-xx", "--out", str(out),
    ]) == 0
    corpus = load_app_corpus(out)
    assert len(corpus) == 24

    built = tmp_path / "corpus.jsonl"
    assert main([
        "build-corpus", "--bitext", str(tsv), "tsv", "en-xx",
        "--cache", str(tmp_path / "cache.jsonl"),
        "--min-len", "1", "--max-len", "80", "--out", str(built),
    ]) == 0
    assert len(load_app_corpus(built)) == 24


def test_simplify_file(workspace):
    tmp_path, _, rules = workspace
    infile = tmp_path / "in.txt"
    infile.write_text("I still think you're nuts\nplain sentence\n", encoding="utf-8")
    out = tmp_path / "out.txt"
    assert main([
        "simplify", "--in", str(infile), "--simplifier", "rules",
        "--rules", str(rules), "--out", str(out),
    ]) == 0
    assert out.read_text(encoding="utf-8").splitlines() == [
        "I still think you're crazy",
        "plain sentence",
    ]


def test_run_app_evaluate_report(workspace, capsys):
    tmp_path, tsv, rules = workspace
    run_path = tmp_path / "run.jsonl"
    assert main([
        "run-app", "--bitext", str(tsv), "--format", "tsv", "--pair", "en-xx",
        "--simplifier", "rules", "--rules", str(rules),
        "--cache", str(tmp_path / "cache.jsonl"),
        "--out", str(run_path),
    ]) == 0
    run = load_run(run_path)
    assert len(run.records) == 24

    prefix = tmp_path / "eval" / "tables"
    assert main([
        "evaluate", "--run", str(run_path), "--out-prefix", str(prefix),
    ]) == 0
    assert (tmp_path / "eval" / "tables.tsv").exists()
    payload = json.loads((tmp_path / "eval" / "tables.json").read_text(encoding="utf-8"))
    row = payload["rows"][0]
    assert row["bleu_simplified"] > row["bleu_original"]
    records = (tmp_path / "eval" / "tables.records.jsonl").read_text(encoding="utf-8")
    assert len(records.splitlines()) == 24

    report_dir = tmp_path / "report"
    assert main([
        "report", "--run", str(run_path), "--out-dir", str(report_dir),
    ]) == 0
    assert (report_dir / "tables.tsv").exists()
    assert (report_dir / "tables.json").exists()
    pngs = list(report_dir.glob("*.gleu.png"))
    assert len(pngs) == 1 and pngs[0].stat().st_size > 0


def test_gap_and_scope(workspace):
    tmp_path, tsv, _ = workspace
    gap_path = tmp_path / "gap.json"
    assert main([
        "backtranslation-gap", "--bitext", str(tsv), "--format", "tsv",
        "--pair", "en-xx", "--sample-n", "20", "--seed", "3",
        "--out", str(gap_path),
    ]) == 0
    payload = json.loads(gap_path.read_text(encoding="utf-8"))
    assert payload["bleu_backtrans"] > payload["bleu_direct"]

    prefix = tmp_path / "scope" / "fig"
    assert main([
        "scope", "--gap", str(gap_path), "--bin-width", "0.25",
        "--out-prefix", str(prefix),
    ]) == 0
    csv_lines = (tmp_path / "scope" / "fig.csv").read_text(encoding="utf-8").splitlines()
    assert csv_lines[0] == "bin_start,bin_end,count_direct,count_backtrans"
    assert len(csv_lines) == 5
    assert (tmp_path / "scope" / "fig.png").stat().st_size > 0
    dominance = json.loads((tmp_path / "scope" / "fig.json").read_text(encoding="utf-8"))
    assert 0.0 <= dominance["dominance_mass"] <= 1.0


def test_scope_from_score_files(tmp_path):
    direct = tmp_path / "direct.txt"
    backtrans = tmp_path / "bt.txt"
    direct.write_text("0.2\n0.2\n", encoding="utf-8")
    backtrans.write_text("0.2\n0.8\n", encoding="utf-8")
    prefix = tmp_path / "scope"
    assert main([
        "scope", "--direct", str(direct), "--backtrans", str(backtrans),
        "--bin-width", "0.5", "--out-prefix", str(prefix),
    ]) == 0
    payload = json.loads((tmp_path / "scope.json").read_text(encoding="utf-8"))
    assert payload["dominance_mass"] == pytest.approx(0.5)


def test_bench_simplification(workspace):
    tmp_path, _, rules = workspace
    sources = tmp_path / "sources.txt"
    sources.write_text("when i was marooned here\nsome plain line\n", encoding="utf-8")
    references = tmp_path / "refs.tsv"
    references.write_text(
        "when i was stranded here\twhen i was stuck here\nsome plain line\n",
        encoding="utf-8",
    )
    out = tmp_path / "bench.json"
    assert main([
        "bench-simplification", "--sources", str(sources),
        "--references", str(references), "--metric", "sari",
        "--simplifier", "rules", "--rules", str(rules), "--out", str(out),
    ]) == 0
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["metric"] == "sari"
    assert payload["n"] == 2
    assert 0 <= payload["score"] <= 100


def test_score_batch(tmp_path):
    infile = tmp_path / "scores.jsonl"
    rows = [
        {"id": 1, "hyp": "the cat sat", "ref": "the cat sat"},
        {"id": 2, "hyp": "a dog", "ref": "the dog ran", "src": "a dog runs",
         "refs": ["the dog ran"]},
    ]
    infile.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    out = tmp_path / "scored.jsonl"
    assert main(["score", "--in", str(infile), "--out", str(out)]) == 0
    lines = [json.loads(l) for l in out.read_text(encoding="utf-8").splitlines()]
    assert lines[0]["gleu"] == 1.0
    assert lines[0]["ter"] == 0.0
    assert "sari" in lines[1]
    assert lines[-1]["summary"] is True
    assert "bleu" in lines[-1] and "corpus_ter" in lines[-1]


def test_sample_humaneval_cli(workspace):
    tmp_path, tsv, rules = workspace
    bitext, simplifier, backend = make_idiom_bitext(24, seed=13)
    run = run_app(bitext, simplifier, backend)
    run_path = tmp_path / "run.jsonl"
    save_run(run, run_path)
    store_dir = tmp_path / "store"
    assert main([
        "sample-humaneval", "--run", str(run_path), "--n", "5",
        "--pos-threshold", "0.1", "--seed", "2", "--store", str(store_dir),
    ]) == 0
    items = (store_dir / "items.jsonl").read_text(encoding="utf-8").splitlines()
    assert items
    for line in items:
        obj = json.loads(line)
        assert obj["stratum"] in ("positive", "negative")


def test_version_and_help():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
