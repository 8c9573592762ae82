"""Report emission: delimited files for machines, figures for humans.

Every report path writes TSV/JSON/CSV next to a rendered PNG so results
can be both post-processed and eyeballed.  All figures go through the
non-interactive Agg backend.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .metrics import corpus_bleu, gleu_distribution, ter
from .pipeline import EvalRun, EvalTables, GapReport, ScopeReport
from .tokens import DEFAULT_TOKENIZER, TokenizerConfig, tokenize

__all__ = [
    "write_tables_tsv",
    "write_tables_json",
    "write_run_records_jsonl",
    "write_scope_csv",
    "render_scope_figure",
    "render_run_figure",
    "write_json",
    "score_jsonl",
]

TABLE_COLUMNS = [
    "pair",
    "n",
    "bleu_original",
    "bleu_simplified",
    "ter_original",
    "ter_simplified",
    "ter_pct_delta",
    "mean_gleu_original",
    "mean_gleu_simplified",
]


def write_tables_tsv(tables: EvalTables, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(TABLE_COLUMNS)
        for row in tables.rows:
            record = dataclasses.asdict(row)
            writer.writerow(
                [
                    record["pair"],
                    record["n"],
                    f"{record['bleu_original']:.2f}",
                    f"{record['bleu_simplified']:.2f}",
                    f"{record['ter_original']:.4f}",
                    f"{record['ter_simplified']:.4f}",
                    f"{record['ter_pct_delta']:.1f}",
                    f"{record['mean_gleu_original']:.4f}",
                    f"{record['mean_gleu_simplified']:.4f}",
                ]
            )


def write_tables_json(tables: EvalTables, path: str | Path) -> None:
    write_json({"rows": [dataclasses.asdict(r) for r in tables.rows]}, path)


def write_json(payload: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def write_run_records_jsonl(
    run: EvalRun,
    path: str | Path,
    cfg: TokenizerConfig = DEFAULT_TOKENIZER,
    ter_mode: str = "shifts",
) -> None:
    """Per-sentence report: the stored texts and scores plus sentence TER
    for both systems."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in run.records:
            ref = tokenize(r.y, cfg)
            record = {
                "id": r.id,
                "x": r.x,
                "x_star": r.x_star,
                "y": r.y,
                "y_hat": r.y_hat,
                "y_hat_star": r.y_hat_star,
                "gleu_orig": r.gleu_orig,
                "gleu_simple": r.gleu_simple,
                "delta_gleu": r.delta_gleu,
            }
            if ref:
                record["ter_orig"] = ter(tokenize(r.y_hat, cfg), ref, mode=ter_mode).ter
                record["ter_simple"] = ter(tokenize(r.y_hat_star, cfg), ref, mode=ter_mode).ter
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def write_scope_csv(scope: ScopeReport, path: str | Path) -> None:
    """CSV consumable by any plotting tool:
    bin_start, bin_end, count_direct, count_backtrans."""
    edges = scope.hist_direct.bin_edges
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_start", "bin_end", "count_direct", "count_backtrans"])
        for i, (start, end) in enumerate(zip(edges, edges[1:])):
            writer.writerow(
                [f"{start:.6g}", f"{end:.6g}", scope.hist_direct.counts[i], scope.hist_backtrans.counts[i]]
            )


def _bar_centers(edges: Sequence[float]) -> tuple[list[float], list[float]]:
    centers = [(a + b) / 2 for a, b in zip(edges, edges[1:])]
    widths = [(b - a) * 0.9 for a, b in zip(edges, edges[1:])]
    return centers, widths


def render_scope_figure(scope: ScopeReport, path: str | Path, title: str = "") -> None:
    """Two overlaid score histograms; the visible gap on the right is the
    headroom a simplifier could claim."""
    centers, widths = _bar_centers(scope.hist_direct.bin_edges)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(centers, scope.hist_direct.frequencies(), width=widths,
           alpha=0.55, color="tab:red", label="direct translation")
    ax.bar(centers, scope.hist_backtrans.frequencies(), width=widths,
           alpha=0.55, color="tab:blue", label="back-translation")
    ax.set_xlabel("sentence GLEU")
    ax.set_ylabel("fraction of sentences")
    ax.set_title(title or f"dominance mass = {scope.dominance_mass:.3f}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_run_figure(run: EvalRun, path: str | Path, bin_width: float = 0.05) -> None:
    """Before/after sentence-GLEU distributions for one pipeline run."""
    before = gleu_distribution([r.gleu_orig for r in run.records], bin_width)
    after = gleu_distribution([r.gleu_simple for r in run.records], bin_width)
    centers, widths = _bar_centers(before.bin_edges)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(centers, before.frequencies(), width=widths, alpha=0.55,
           color="tab:green", label="original source")
    ax.bar(centers, after.frequencies(), width=widths, alpha=0.55,
           color="tab:orange", label="simplified source")
    ax.set_xlabel("sentence GLEU")
    ax.set_ylabel("fraction of sentences")
    ax.set_title(f"{run.pair} ({run.simplifier_id})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def score_jsonl(
    in_path: str | Path,
    out_path: str | Path,
    cfg: TokenizerConfig = DEFAULT_TOKENIZER,
    ter_mode: str = "shifts",
) -> dict:
    """Batch scorer: read ``{id, hyp, ref}`` records (plus optional
    ``src``/``refs`` for SARI), write one scored record per line and a
    final corpus summary record; the summary is also returned.
    """
    from .metrics import sari as sari_metric
    from .metrics import sentence_gleu

    hyps: list[list[str]] = []
    refs: list[list[str]] = []
    gleus: list[float] = []
    saris: list[float] = []
    total_edits = 0
    total_ref_len = 0
    with open(in_path, encoding="utf-8") as fin, open(out_path, "w", encoding="utf-8") as fout:
        for lineno, line in enumerate(fin, 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            hyp = tokenize(obj["hyp"], cfg)
            ref = tokenize(obj["ref"], cfg)
            hyps.append(hyp)
            refs.append(ref)
            scored = {"id": obj.get("id", lineno)}
            scored["gleu"] = sentence_gleu(hyp, ref)
            gleus.append(scored["gleu"])
            if ref:
                report = ter(hyp, ref, mode=ter_mode)
                scored["ter"] = report.ter
                scored["ter_edits"] = report.edits
                total_edits += report.edits
                total_ref_len += report.ref_len
            if "src" in obj:
                reference_group = obj.get("refs") or [obj["ref"]]
                scored["sari"] = sari_metric(
                    tokenize(obj["src"], cfg), hyp, [tokenize(r, cfg) for r in reference_group]
                ).sari
                saris.append(scored["sari"])
            fout.write(json.dumps(scored, ensure_ascii=False) + "\n")
        summary: dict = {"summary": True, "n": len(hyps)}
        if hyps:
            summary["bleu"] = corpus_bleu(hyps, refs).bleu
            summary["mean_gleu"] = sum(gleus) / len(gleus)
            if total_ref_len:
                summary["corpus_ter"] = total_edits / total_ref_len
            if saris:
                summary["mean_sari"] = sum(saris) / len(saris)
        fout.write(json.dumps(summary, ensure_ascii=False) + "\n")
    return summary
