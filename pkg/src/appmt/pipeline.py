"""The preprocess-then-translate pipeline and its evaluation harness.

``run_app`` simplifies every source sentence, translates both the original
and the simplified text with the same backend, and scores each variant
against the reference with sentence GLEU.  ``evaluate_run`` condenses a
run into the before/after table row (BLEU, corpus TER, mean GLEU, percent
change).  ``scope_of_simplification`` compares direct-translation and
back-translation score distributions; the mass where the back-translation
histogram dominates is the headroom a simplifier could exploit.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .backends import LangPair, Simplifier, Translator
from .corpus import Bitext, bitext_digest, sample_pairs
from .errors import ContractViolation, ParseError, SizingError
from .metrics import (
    Histogram,
    corpus_bleu,
    gleu_distribution,
    percent_delta,
    sari,
    sentence_gleu,
    ter,
)
from .tokens import DEFAULT_TOKENIZER, TokenizerConfig, tokenize

__all__ = [
    "EvalRecord",
    "EvalRun",
    "EvalTableRow",
    "EvalTables",
    "run_app",
    "evaluate_run",
    "ScopeReport",
    "scope_of_simplification",
    "BenchmarkReport",
    "simplification_benchmark",
    "GapReport",
    "backtranslation_gap",
    "save_run",
    "load_run",
]

RUN_CHUNK_SIZE = 64


@dataclass
class EvalRecord:
    """One test sentence with both translation variants and their scores."""

    id: str
    x: str
    x_star: str
    y: str
    y_hat: str
    y_hat_star: str
    gleu_orig: float
    gleu_simple: float
    delta_gleu: float


@dataclass
class EvalRun:
    pair: LangPair
    records: list[EvalRecord]
    simplifier_id: str
    backend_id: str
    run_id: str = ""
    started_at: str = ""
    finished_at: str = ""


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def run_app(
    test_bitext: Bitext,
    simplifier: Simplifier,
    backend: Translator,
    cfg: TokenizerConfig = DEFAULT_TOKENIZER,
    chunk_size: int = RUN_CHUNK_SIZE,
) -> EvalRun:
    """Simplify, translate both variants, and score them per sentence.

    Both translation passes go through the same backend instance, so a
    cached backend shares hits between them and checkpoints progress one
    chunk at a time.  The run id is content-addressed from the bitext, the
    simplifier, and the backend engine.
    """
    started = _utcnow()
    sources = [p.src for p in test_bitext.pairs]
    records: list[EvalRecord] = []
    if sources:
        x_star = simplifier.simplify_batch(sources)
        if len(x_star) != len(sources):
            raise ContractViolation(
                f"simplifier returned {len(x_star)} texts for {len(sources)} inputs"
            )
        y_hat: list[str] = []
        y_hat_star: list[str] = []
        for start in range(0, len(sources), chunk_size):
            y_hat.extend(
                backend.translate_batch(sources[start : start + chunk_size], test_bitext.pair)
            )
            y_hat_star.extend(
                backend.translate_batch(x_star[start : start + chunk_size], test_bitext.pair)
            )
        for pair, xs, yh, yhs in zip(test_bitext.pairs, x_star, y_hat, y_hat_star):
            ref = tokenize(pair.tgt, cfg)
            gleu_orig = sentence_gleu(tokenize(yh, cfg), ref)
            gleu_simple = sentence_gleu(tokenize(yhs, cfg), ref)
            records.append(
                EvalRecord(
                    id=pair.id,
                    x=pair.src,
                    x_star=xs,
                    y=pair.tgt,
                    y_hat=yh,
                    y_hat_star=yhs,
                    gleu_orig=gleu_orig,
                    gleu_simple=gleu_simple,
                    delta_gleu=gleu_simple - gleu_orig,
                )
            )
    run_id = hashlib.sha256(
        "\x1f".join(
            (bitext_digest(test_bitext), simplifier.simplifier_id, backend.engine_id)
        ).encode("utf-8")
    ).hexdigest()[:16]
    return EvalRun(
        pair=test_bitext.pair,
        records=records,
        simplifier_id=simplifier.simplifier_id,
        backend_id=backend.engine_id,
        run_id=run_id,
        started_at=started,
        finished_at=_utcnow(),
    )


@dataclass
class EvalTableRow:
    pair: str
    n: int
    bleu_original: float
    bleu_simplified: float
    ter_original: float
    ter_simplified: float
    ter_pct_delta: float
    mean_gleu_original: float
    mean_gleu_simplified: float


@dataclass
class EvalTables:
    rows: list[EvalTableRow] = field(default_factory=list)


def evaluate_run(
    run: EvalRun,
    cfg: TokenizerConfig = DEFAULT_TOKENIZER,
    ter_mode: str = "shifts",
) -> EvalTables:
    """Summarize a run: corpus BLEU and corpus TER for both systems, mean
    sentence GLEU, and the percent TER change.

    Corpus TER is total edits over total reference length, not a mean of
    sentence rates.
    """
    if not run.records:
        raise SizingError("cannot evaluate an empty run")
    refs = [tokenize(r.y, cfg) for r in run.records]
    hyp_orig = [tokenize(r.y_hat, cfg) for r in run.records]
    hyp_simple = [tokenize(r.y_hat_star, cfg) for r in run.records]

    bleu_orig = corpus_bleu(hyp_orig, refs).bleu
    bleu_simple = corpus_bleu(hyp_simple, refs).bleu

    edits_orig = edits_simple = ref_len = 0
    for h, hs, r in zip(hyp_orig, hyp_simple, refs):
        if not r:
            raise ContractViolation(f"empty reference after tokenization in run {run.run_id}")
        edits_orig += ter(h, r, mode=ter_mode).edits
        edits_simple += ter(hs, r, mode=ter_mode).edits
        ref_len += len(r)
    ter_orig = edits_orig / ref_len
    ter_simple = edits_simple / ref_len

    n = len(run.records)
    row = EvalTableRow(
        pair=str(run.pair),
        n=n,
        bleu_original=bleu_orig,
        bleu_simplified=bleu_simple,
        ter_original=ter_orig,
        ter_simplified=ter_simple,
        ter_pct_delta=0.0 if ter_orig == 0 else percent_delta(ter_orig, ter_simple),
        mean_gleu_original=sum(r.gleu_orig for r in run.records) / n,
        mean_gleu_simplified=sum(r.gleu_simple for r in run.records) / n,
    )
    return EvalTables(rows=[row])


@dataclass
class ScopeReport:
    """Histograms of direct vs back-translation scores on a shared grid,
    plus the normalized mass where back-translation dominates."""

    hist_direct: Histogram
    hist_backtrans: Histogram
    dominance_mass: float


def scope_of_simplification(
    direct: Sequence[float],
    backtrans: Sequence[float],
    bin_width: float,
) -> ScopeReport:
    """Compare two sentence-score samples bin by bin.

    ``dominance_mass`` sums, over bins, how much the back-translation
    frequency exceeds the direct frequency; 0 means no headroom, 1 means
    the distributions are disjoint with back-translations on top.
    """
    if not direct or not backtrans:
        raise SizingError("scope analysis needs non-empty score lists on both sides")
    hist_direct = gleu_distribution(list(direct), bin_width)
    hist_backtrans = gleu_distribution(list(backtrans), bin_width)
    mass = sum(
        max(0.0, b - d)
        for d, b in zip(hist_direct.frequencies(), hist_backtrans.frequencies())
    )
    return ScopeReport(hist_direct=hist_direct, hist_backtrans=hist_backtrans, dominance_mass=mass)


@dataclass
class BenchmarkReport:
    metric: str
    score: float
    n: int
    simplifier_id: str
    per_sentence: list[float] = field(default_factory=list)


def simplification_benchmark(
    simplifier: Optional[Simplifier],
    sources: Sequence[str],
    references: Sequence[Sequence[str]],
    metric: str,
    outputs: Optional[Sequence[str]] = None,
    cfg: TokenizerConfig = DEFAULT_TOKENIZER,
) -> BenchmarkReport:
    """Score a simplifier on a labelled test set.

    ``sari`` accepts one or more references per source and reports the
    mean sentence score; ``bleu`` needs exactly one reference per source
    and reports corpus BLEU.  Precomputed ``outputs`` skip running the
    simplifier.
    """
    if metric not in ("sari", "bleu"):
        raise ContractViolation(f"unknown benchmark metric: {metric!r}")
    if len(references) != len(sources):
        raise ContractViolation(
            f"got {len(sources)} sources but {len(references)} reference groups"
        )
    if not sources:
        raise SizingError("benchmark needs at least one source sentence")
    for i, refs in enumerate(references):
        if len(refs) == 0:
            raise ContractViolation(f"source {i} has no references")
        if metric == "bleu" and len(refs) != 1:
            raise ContractViolation("bleu mode uses exactly one reference per source")
    if outputs is None:
        if simplifier is None:
            raise ContractViolation("need a simplifier or precomputed outputs")
        outputs = simplifier.simplify_batch(list(sources))
        simplifier_id = simplifier.simplifier_id
    else:
        simplifier_id = simplifier.simplifier_id if simplifier else "precomputed"
    if len(outputs) != len(sources):
        raise ContractViolation(f"{len(outputs)} outputs for {len(sources)} sources")

    if metric == "bleu":
        report = corpus_bleu(
            [tokenize(o, cfg) for o in outputs],
            [tokenize(refs[0], cfg) for refs in references],
        )
        return BenchmarkReport(metric="bleu", score=report.bleu, n=len(sources),
                               simplifier_id=simplifier_id)
    scores = [
        sari(
            tokenize(src, cfg),
            tokenize(out, cfg),
            [tokenize(r, cfg) for r in refs],
        ).sari
        for src, out, refs in zip(sources, outputs, references)
    ]
    return BenchmarkReport(
        metric="sari",
        score=sum(scores) / len(scores),
        n=len(sources),
        simplifier_id=simplifier_id,
        per_sentence=scores,
    )


@dataclass
class GapReport:
    """Direct vs back-translation quality gap on one sampled bitext."""

    pair: str
    n: int
    bleu_direct: float
    bleu_backtrans: float
    gleu_direct: list[float]
    gleu_backtrans: list[float]


def backtranslation_gap(
    bitext: Bitext,
    backend: Translator,
    sample_n: Optional[int] = None,
    seed: int = 0,
    cfg: TokenizerConfig = DEFAULT_TOKENIZER,
    chunk_size: int = RUN_CHUNK_SIZE,
) -> GapReport:
    """Measure how much easier back-translations are to translate than the
    natural source text.

    Translates the sampled sources directly, then translates the
    back-translations of the references, and scores both against the same
    references.  A large gap signals headroom for preprocessing.
    """
    if sample_n is not None:
        bitext = sample_pairs(bitext, sample_n, seed)
    if not bitext.pairs:
        raise SizingError("backtranslation gap needs a non-empty bitext")
    sources = [p.src for p in bitext.pairs]
    targets = [p.tgt for p in bitext.pairs]
    back_pair = bitext.pair.reversed()
    y_hat: list[str] = []
    backtrans: list[str] = []
    y_hat_bt: list[str] = []
    for start in range(0, len(sources), chunk_size):
        y_hat.extend(backend.translate_batch(sources[start : start + chunk_size], bitext.pair))
        chunk_bt = backend.translate_batch(targets[start : start + chunk_size], back_pair)
        backtrans.extend(chunk_bt)
        y_hat_bt.extend(backend.translate_batch(chunk_bt, bitext.pair))
    refs = [tokenize(t, cfg) for t in targets]
    hyp_direct = [tokenize(t, cfg) for t in y_hat]
    hyp_bt = [tokenize(t, cfg) for t in y_hat_bt]
    return GapReport(
        pair=str(bitext.pair),
        n=len(sources),
        bleu_direct=corpus_bleu(hyp_direct, refs).bleu,
        bleu_backtrans=corpus_bleu(hyp_bt, refs).bleu,
        gleu_direct=[sentence_gleu(h, r) for h, r in zip(hyp_direct, refs)],
        gleu_backtrans=[sentence_gleu(h, r) for h, r in zip(hyp_bt, refs)],
    )


def save_run(run: EvalRun, path: str | Path) -> None:
    """Persist a run as JSONL: a header object, then one record per line."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "kind": "run",
            "pair": str(run.pair),
            "simplifier_id": run.simplifier_id,
            "backend_id": run.backend_id,
            "run_id": run.run_id,
            "started_at": run.started_at,
            "finished_at": run.finished_at,
        }
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for r in run.records:
            fh.write(
                json.dumps(
                    {
                        "id": r.id,
                        "x": r.x,
                        "x_star": r.x_star,
                        "y": r.y,
                        "y_hat": r.y_hat,
                        "y_hat_star": r.y_hat_star,
                        "gleu_orig": r.gleu_orig,
                        "gleu_simple": r.gleu_simple,
                        "delta_gleu": r.delta_gleu,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_run(path: str | Path) -> EvalRun:
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh if line.strip()]
    if not lines:
        raise ParseError(f"{path}: empty run file")
    try:
        header = json.loads(lines[0])
        if header.get("kind") != "run":
            raise KeyError("kind")
        records = []
        for line in lines[1:]:
            obj = json.loads(line)
            records.append(
                EvalRecord(
                    id=str(obj["id"]),
                    x=obj["x"],
                    x_star=obj["x_star"],
                    y=obj["y"],
                    y_hat=obj["y_hat"],
                    y_hat_star=obj["y_hat_star"],
                    gleu_orig=float(obj["gleu_orig"]),
                    gleu_simple=float(obj["gleu_simple"]),
                    delta_gleu=float(obj["delta_gleu"]),
                )
            )
    except (ValueError, KeyError) as exc:
        raise ParseError(f"{path}: bad run file: {exc}") from exc
    return EvalRun(
        pair=LangPair.parse(header["pair"]),
        records=records,
        simplifier_id=header.get("simplifier_id", ""),
        backend_id=header.get("backend_id", ""),
        run_id=header.get("run_id", ""),
        started_at=header.get("started_at", ""),
        finished_at=header.get("finished_at", ""),
    )
