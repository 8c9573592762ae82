"""Command-line interface.

Subcommands cover the whole workflow: build back-translation corpora,
simplify text, run the preprocess-then-translate pipeline, evaluate and
report, analyze score distributions, benchmark simplifiers, batch-score
files, and sample/serve the human evaluation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .backends import (
    BackendConfig,
    HttpSimplifier,
    IdentitySimplifier,
    LangPair,
    MockTranslator,
    RuleSimplifier,
    Simplifier,
    TranslationCache,
    CachedTranslator,
    Translator,
    build_backend,
    load_rules_tsv,
)
from .corpus import (
    DEFAULT_MAX_LEN,
    DEFAULT_MIN_LEN,
    build_app_corpus,
    filter_pairs,
    load_bitext,
    sample_pairs,
    save_app_corpus,
)
from .humaneval import EvalStore, stratified_sample
from .pipeline import (
    backtranslation_gap,
    evaluate_run,
    load_run,
    run_app,
    scope_of_simplification,
    simplification_benchmark,
    save_run,
    EvalTables,
)

logger = logging.getLogger(__name__)


def _add_backend_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("translation backend")
    group.add_argument("--backend", choices=["mock", "http"], default="mock")
    group.add_argument("--endpoint", help="base URL for the http backend")
    group.add_argument("--engine-id", help="cache/report identity of the backend")
    group.add_argument("--batch-size", type=int, default=32)
    group.add_argument("--max-concurrency", type=int, default=4)
    group.add_argument("--max-retries", type=int, default=2)
    group.add_argument("--backoff-base", type=float, default=0.1)
    group.add_argument("--cache", help="persistent translation cache file (JSONL)")
    group.add_argument(
        "--mock-rules",
        help="TSV paraphrase rules applied by the mock on the reverse path of --pair",
    )


def _build_backend(args: argparse.Namespace, pair: LangPair | None = None) -> Translator:
    if args.backend == "mock":
        reverse_rules = None
        if args.mock_rules:
            if pair is None:
                raise SystemExit("--mock-rules needs --pair")
            reverse_rules = {(pair.source, pair.target): load_rules_tsv(args.mock_rules)}
        backend: Translator = MockTranslator(
            reverse_rules=reverse_rules, engine_id=args.engine_id or "mock"
        )
    else:
        if not args.endpoint:
            raise SystemExit("--backend http needs --endpoint")
        backend = build_backend(
            BackendConfig(
                kind="http",
                endpoint=args.endpoint,
                engine_id=args.engine_id,
                batch_size=args.batch_size,
                max_concurrency=args.max_concurrency,
                max_retries=args.max_retries,
                backoff_base=args.backoff_base,
            )
        )
    if args.cache:
        backend = CachedTranslator(backend, TranslationCache(args.cache))
    return backend


def _add_simplifier_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("simplifier")
    group.add_argument("--simplifier", choices=["identity", "rules", "http"], default="identity")
    group.add_argument("--rules", help="TSV paraphrase rules for the rule simplifier")
    group.add_argument("--simplifier-endpoint", help="base URL for the http simplifier")
    group.add_argument("--simplifier-lang", default="en", help="language the http simplifier works in")


def _build_simplifier(args: argparse.Namespace) -> Simplifier:
    if args.simplifier == "identity":
        return IdentitySimplifier()
    if args.simplifier == "rules":
        if not args.rules:
            raise SystemExit("--simplifier rules needs --rules")
        return RuleSimplifier(load_rules_tsv(args.rules))
    if not args.simplifier_endpoint:
        raise SystemExit("--simplifier http needs --simplifier-endpoint")
    return HttpSimplifier(args.simplifier_endpoint, language=args.simplifier_lang)


def _add_single_bitext_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--bitext", required=True, help="bitext path (moses: path prefix)")
    parser.add_argument("--format", choices=["tsv", "jsonl", "moses"], default="tsv")
    parser.add_argument("--pair", required=True, help="language pair, e.g. en-bg")


def _load_single_bitext(args: argparse.Namespace):
    pair = LangPair.parse(args.pair)
    return load_bitext(args.bitext, args.format, pair), pair


def cmd_backtranslate(args: argparse.Namespace) -> int:
    bitext, pair = _load_single_bitext(args)
    backend = _build_backend(args, pair)
    corpus = build_app_corpus([bitext], backend, min_len=1, max_len=10**9)
    save_app_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} back-translations to {args.out}")
    return 0


def cmd_build_corpus(args: argparse.Namespace) -> int:
    bitexts = []
    pair = None
    for path, fmt, pair_text in args.bitext:
        pair = LangPair.parse(pair_text)
        bitexts.append(load_bitext(path, fmt, pair))
    backend = _build_backend(args, pair)
    corpus = build_app_corpus(
        bitexts,
        backend,
        min_len=args.min_len,
        max_len=args.max_len,
        dedupe=args.dedupe,
    )
    save_app_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} records from {len(bitexts)} bitexts to {args.out}")
    return 0


def cmd_simplify(args: argparse.Namespace) -> int:
    simplifier = _build_simplifier(args)
    with open(args.infile, encoding="utf-8") as fh:
        texts = [line.rstrip("\n") for line in fh]
    simplified = simplifier.simplify_batch(texts) if texts else []
    with open(args.out, "w", encoding="utf-8") as fh:
        for line in simplified:
            fh.write(line + "\n")
    print(f"simplified {len(texts)} lines to {args.out}")
    return 0


def cmd_run_app(args: argparse.Namespace) -> int:
    bitext, pair = _load_single_bitext(args)
    if args.sample_n is not None:
        bitext = sample_pairs(bitext, args.sample_n, args.seed)
    if args.filter:
        bitext = filter_pairs(bitext, args.min_len, args.max_len)
    backend = _build_backend(args, pair)
    simplifier = _build_simplifier(args)
    run = run_app(bitext, simplifier, backend)
    save_run(run, args.out)
    print(f"run {run.run_id}: {len(run.records)} sentences -> {args.out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    from .reports import write_run_records_jsonl, write_tables_json, write_tables_tsv

    run = load_run(args.run)
    tables = evaluate_run(run, ter_mode=args.ter_mode)
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    write_tables_tsv(tables, prefix.with_suffix(".tsv"))
    write_tables_json(tables, prefix.with_suffix(".json"))
    write_run_records_jsonl(run, prefix.parent / (prefix.name + ".records.jsonl"), ter_mode=args.ter_mode)
    row = tables.rows[0]
    print(
        f"{row.pair}: BLEU {row.bleu_original:.2f} -> {row.bleu_simplified:.2f}, "
        f"TER {row.ter_original:.4f} -> {row.ter_simplified:.4f} ({row.ter_pct_delta:+.1f}%)"
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    from .reports import (
        render_run_figure,
        write_run_records_jsonl,
        write_tables_json,
        write_tables_tsv,
    )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    merged = EvalTables()
    for run_path in args.run:
        run = load_run(run_path)
        tables = evaluate_run(run, ter_mode=args.ter_mode)
        merged.rows.extend(tables.rows)
        stem = f"{run.pair}-{run.run_id}" if run.run_id else Path(run_path).stem
        write_run_records_jsonl(run, out_dir / f"{stem}.records.jsonl", ter_mode=args.ter_mode)
        render_run_figure(run, out_dir / f"{stem}.gleu.png", bin_width=args.bin_width)
    write_tables_tsv(merged, out_dir / "tables.tsv")
    write_tables_json(merged, out_dir / "tables.json")
    print(f"report for {len(merged.rows)} runs in {out_dir}")
    return 0


def _read_scores(path: str) -> list[float]:
    with open(path, encoding="utf-8") as fh:
        return [float(line) for line in fh if line.strip()]


def cmd_scope(args: argparse.Namespace) -> int:
    from .reports import render_scope_figure, write_json, write_scope_csv

    if args.gap:
        payload = json.loads(Path(args.gap).read_text(encoding="utf-8"))
        direct = payload["gleu_direct"]
        backtrans = payload["gleu_backtrans"]
    else:
        if not (args.direct and args.backtrans):
            raise SystemExit("scope needs --gap or both --direct and --backtrans")
        direct = _read_scores(args.direct)
        backtrans = _read_scores(args.backtrans)
    scope = scope_of_simplification(direct, backtrans, args.bin_width)
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    write_scope_csv(scope, prefix.with_suffix(".csv"))
    write_json(
        {
            "dominance_mass": scope.dominance_mass,
            "n_direct": scope.hist_direct.total,
            "n_backtrans": scope.hist_backtrans.total,
        },
        prefix.with_suffix(".json"),
    )
    render_scope_figure(scope, prefix.with_suffix(".png"))
    print(f"dominance mass {scope.dominance_mass:.4f}; wrote {prefix}.csv/.json/.png")
    return 0


def cmd_backtranslation_gap(args: argparse.Namespace) -> int:
    from .reports import write_json

    bitext, pair = _load_single_bitext(args)
    backend = _build_backend(args, pair)
    report = backtranslation_gap(bitext, backend, sample_n=args.sample_n, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_json(
        {
            "pair": report.pair,
            "n": report.n,
            "bleu_direct": report.bleu_direct,
            "bleu_backtrans": report.bleu_backtrans,
            "gleu_direct": report.gleu_direct,
            "gleu_backtrans": report.gleu_backtrans,
        },
        out,
    )
    print(
        f"{report.pair}: direct BLEU {report.bleu_direct:.2f}, "
        f"back-translation BLEU {report.bleu_backtrans:.2f} ({report.n} sentences)"
    )
    return 0


def cmd_bench_simplification(args: argparse.Namespace) -> int:
    from .reports import write_json

    with open(args.sources, encoding="utf-8") as fh:
        sources = [line.rstrip("\n") for line in fh]
    references = []
    with open(args.references, encoding="utf-8") as fh:
        for line in fh:
            references.append(line.rstrip("\n").split("\t"))
    simplifier = _build_simplifier(args)
    report = simplification_benchmark(simplifier, sources, references, metric=args.metric)
    write_json(
        {
            "metric": report.metric,
            "score": report.score,
            "n": report.n,
            "simplifier_id": report.simplifier_id,
        },
        args.out,
    )
    print(f"{report.metric} = {report.score:.2f} over {report.n} sentences")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    from .reports import score_jsonl

    summary = score_jsonl(args.infile, args.out, ter_mode=args.ter_mode)
    print(json.dumps(summary, ensure_ascii=False))
    return 0


def cmd_sample_humaneval(args: argparse.Namespace) -> int:
    run = load_run(args.run)
    items = stratified_sample(
        run,
        n_per_stratum=args.n,
        pos_threshold=args.pos_threshold,
        min_tokens=args.min_tokens,
        seed=args.seed,
    )
    store = EvalStore(args.store)
    store.add_items(items)
    by_stratum = {"positive": 0, "negative": 0}
    for item in items:
        by_stratum[item.stratum] += 1
    print(
        f"sampled {len(items)} items "
        f"({by_stratum['positive']} positive, {by_stratum['negative']} negative) "
        f"into {store.root}"
    )
    return 0


def cmd_serve_humaneval(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    store = EvalStore(args.store)
    app = create_app(store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="appmt",
        description="Simplify source text before black-box translation and measure the gain.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("backtranslate", help="back-translate the target side of one bitext")
    _add_single_bitext_args(p)
    _add_backend_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_backtranslate)

    p = sub.add_parser("build-corpus", help="build a simplification training corpus from bitexts")
    p.add_argument(
        "--bitext",
        nargs=3,
        metavar=("PATH", "FORMAT", "PAIR"),
        action="append",
        required=True,
        help="repeatable: bitext path, format (tsv|jsonl|moses), pair (e.g. en-fr)",
    )
    _add_backend_args(p)
    p.add_argument("--min-len", type=int, default=DEFAULT_MIN_LEN)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--dedupe", action="store_true", help="drop exact duplicate records")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_corpus)

    p = sub.add_parser("simplify", help="simplify a file of sentences, one per line")
    p.add_argument("--in", dest="infile", required=True)
    _add_simplifier_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("run-app", help="simplify, translate both variants, score per sentence")
    _add_single_bitext_args(p)
    _add_backend_args(p)
    _add_simplifier_args(p)
    p.add_argument("--sample-n", type=int, help="evaluate a uniform sample of this size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--filter", action="store_true", help="apply the length filter first")
    p.add_argument("--min-len", type=int, default=DEFAULT_MIN_LEN)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run_app)

    p = sub.add_parser("evaluate", help="summarize one run into before/after tables")
    p.add_argument("--run", required=True)
    p.add_argument("--ter-mode", choices=["shifts", "no_shifts"], default="shifts")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="tables, per-sentence records, and figures for runs")
    p.add_argument("--run", action="append", required=True, help="repeatable run file")
    p.add_argument("--ter-mode", choices=["shifts", "no_shifts"], default="shifts")
    p.add_argument("--bin-width", type=float, default=0.05)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("scope", help="compare direct vs back-translation score distributions")
    p.add_argument("--direct", help="file of scores, one per line")
    p.add_argument("--backtrans", help="file of scores, one per line")
    p.add_argument("--gap", help="JSON report from backtranslation-gap")
    p.add_argument("--bin-width", type=float, default=0.05)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_scope)

    p = sub.add_parser(
        "backtranslation-gap",
        help="score direct translations vs translations of back-translations",
    )
    _add_single_bitext_args(p)
    _add_backend_args(p)
    p.add_argument("--sample-n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_backtranslation_gap)

    p = sub.add_parser("bench-simplification", help="score a simplifier on a labelled test set")
    p.add_argument("--sources", required=True, help="one source sentence per line")
    p.add_argument(
        "--references", required=True, help="tab-separated references, one line per source"
    )
    p.add_argument("--metric", choices=["sari", "bleu"], default="sari")
    _add_simplifier_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench_simplification)

    p = sub.add_parser("score", help="batch-score a JSONL file of {id, hyp, ref} records")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--ter-mode", choices=["shifts", "no_shifts"], default="shifts")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("sample-humaneval", help="draw stratified rating items from a run")
    p.add_argument("--run", required=True)
    p.add_argument("--n", type=int, default=100, help="items per stratum")
    p.add_argument("--pos-threshold", type=float, default=0.4)
    p.add_argument("--min-tokens", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--store", required=True, help="evaluation store directory")
    p.set_defaults(func=cmd_sample_humaneval)

    p = sub.add_parser("serve-humaneval", help="serve the rating API over HTTP")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve_humaneval)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
