"""Bitext ingestion, filtering, splitting, and back-translation corpora.

A bitext is an ordered collection of aligned sentence pairs for one
language direction.  The corpus builder turns the target side of one or
more bitexts back into the source language through a translation backend,
pairing each original source sentence with the back-translation of its
reference; that pairing is the raw material for training a simplifier.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .backends import LangPair, Translator
from .errors import AlignmentError, ContractViolation, ParseError, SizingError, TransportError
from .tokens import TokenizerConfig, DEFAULT_TOKENIZER, token_count

logger = logging.getLogger(__name__)

__all__ = [
    "SentencePair",
    "Bitext",
    "AppRecord",
    "AppCorpus",
    "load_bitext",
    "filter_pairs",
    "build_app_corpus",
    "split_corpus",
    "sample_pairs",
    "save_app_corpus",
    "load_app_corpus",
    "bitext_digest",
    "DEFAULT_MIN_LEN",
    "DEFAULT_MAX_LEN",
]

# default length filter: drop pairs where either side has fewer than 3 or
# more than 50 tokens
DEFAULT_MIN_LEN = 3
DEFAULT_MAX_LEN = 50

# how many sentences go to the backend per call; one chunk is also the
# resume checkpoint granularity when the backend is cached
BUILD_CHUNK_SIZE = 64


@dataclass
class SentencePair:
    id: str
    src: str
    tgt: str


@dataclass
class Bitext:
    pair: LangPair
    pairs: list[SentencePair]
    provenance: str = ""

    def __post_init__(self) -> None:
        ids = set()
        for p in self.pairs:
            if p.id in ids:
                raise ContractViolation(f"duplicate sentence pair id: {p.id!r}")
            ids.add(p.id)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class AppRecord:
    id: str
    original_src: str
    backtranslation: str
    origin_pair: LangPair


@dataclass
class AppCorpus:
    source_lang: str
    records: list[AppRecord] = field(default_factory=list)

    def __post_init__(self) -> None:
        for r in self.records:
            if r.origin_pair.source != self.source_lang:
                raise ContractViolation(
                    f"record {r.id!r} has source language "
                    f"{r.origin_pair.source!r}, corpus is {self.source_lang!r}"
                )

    def __len__(self) -> int:
        return len(self.records)


def load_bitext(path: str | Path, format: str, pair: LangPair) -> Bitext:
    """Load a bitext from ``tsv`` (src<TAB>tgt), ``jsonl`` ({"src", "tgt"}
    with optional "id"), or ``moses`` (two one-sentence-per-line files
    ``path.<src>`` / ``path.<tgt>``).

    Missing ids become 1-based line numbers.  Input must be UTF-8.
    """
    path = Path(path)
    if format == "tsv":
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                columns = line.split("\t")
                if len(columns) != 2:
                    raise ParseError(
                        f"{path}:{lineno}: expected 2 tab-separated columns, got {len(columns)}"
                    )
                pairs.append(SentencePair(id=str(lineno), src=columns[0], tgt=columns[1]))
        return Bitext(pair=pair, pairs=pairs, provenance=str(path))
    if format == "jsonl":
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
                try:
                    src, tgt = record["src"], record["tgt"]
                except (TypeError, KeyError) as exc:
                    raise ParseError(f"{path}:{lineno}: missing 'src'/'tgt' fields") from exc
                if not isinstance(src, str) or not isinstance(tgt, str):
                    raise ParseError(f"{path}:{lineno}: 'src'/'tgt' must be strings")
                pairs.append(SentencePair(id=str(record.get("id", lineno)), src=src, tgt=tgt))
        return Bitext(pair=pair, pairs=pairs, provenance=str(path))
    if format == "moses":
        src_path = path.parent / f"{path.name}.{pair.source}"
        tgt_path = path.parent / f"{path.name}.{pair.target}"
        src_lines = src_path.read_text(encoding="utf-8").splitlines()
        tgt_lines = tgt_path.read_text(encoding="utf-8").splitlines()
        if len(src_lines) != len(tgt_lines):
            raise AlignmentError(
                f"moses files disagree: {src_path} has {len(src_lines)} lines, "
                f"{tgt_path} has {len(tgt_lines)}"
            )
        pairs = [
            SentencePair(id=str(i), src=s, tgt=t)
            for i, (s, t) in enumerate(zip(src_lines, tgt_lines), 1)
        ]
        return Bitext(pair=pair, pairs=pairs, provenance=str(path))
    raise ContractViolation(f"unknown bitext format: {format!r}")


def filter_pairs(
    bitext: Bitext,
    min_len: int = DEFAULT_MIN_LEN,
    max_len: int = DEFAULT_MAX_LEN,
    cfg: TokenizerConfig = DEFAULT_TOKENIZER,
) -> Bitext:
    """Keep pairs whose source AND target token counts are within
    [min_len, max_len]; order preserved."""
    if not 1 <= min_len <= max_len:
        raise ContractViolation(f"need 1 <= min_len <= max_len, got [{min_len}, {max_len}]")
    kept = [
        p
        for p in bitext.pairs
        if min_len <= token_count(p.src, cfg) <= max_len
        and min_len <= token_count(p.tgt, cfg) <= max_len
    ]
    return Bitext(pair=bitext.pair, pairs=kept, provenance=bitext.provenance)


def build_app_corpus(
    bitexts: Sequence[Bitext],
    backend: Translator,
    min_len: int = DEFAULT_MIN_LEN,
    max_len: int = DEFAULT_MAX_LEN,
    dedupe: bool = False,
    source_lang: Optional[str] = None,
    cfg: TokenizerConfig = DEFAULT_TOKENIZER,
    chunk_size: int = BUILD_CHUNK_SIZE,
) -> AppCorpus:
    """Back-translate the target side of every bitext and pair each source
    sentence with its back-translation.

    All bitexts must share a source language.  Back-translation runs
    target-to-source in chunks of ``chunk_size``; with a cached backend a
    completed chunk survives interruption, so re-running after a crash
    replays the cache and produces identical output.  The length filter
    applies to both the original source and the back-translation.  With
    ``dedupe`` exact (source, back-translation) duplicates keep only their
    first occurrence.
    """
    if not 1 <= min_len <= max_len:
        raise ContractViolation(f"need 1 <= min_len <= max_len, got [{min_len}, {max_len}]")
    if bitexts:
        langs = {b.pair.source for b in bitexts}
        if len(langs) != 1:
            raise ContractViolation(f"bitexts mix source languages: {sorted(langs)}")
        derived = langs.pop()
        if source_lang is not None and source_lang != derived:
            raise ContractViolation(
                f"source_lang {source_lang!r} does not match bitexts ({derived!r})"
            )
        source_lang = derived
    records: list[AppRecord] = []
    for index, bitext in enumerate(bitexts):
        back_pair = bitext.pair.reversed()
        targets = [p.tgt for p in bitext.pairs]
        backtranslations: list[str] = []
        for start in range(0, len(targets), chunk_size):
            chunk = targets[start : start + chunk_size]
            try:
                backtranslations.extend(backend.translate_batch(chunk, back_pair))
            except (TransportError, RuntimeError) as exc:
                raise TransportError(
                    f"back-translation failed on bitext {index} ({bitext.pair}), "
                    f"sentences {start}..{start + len(chunk) - 1}: {exc}",
                    tuple(range(start, start + len(chunk))),
                ) from exc
        for pair, back in zip(bitext.pairs, backtranslations):
            if not (
                min_len <= token_count(pair.src, cfg) <= max_len
                and min_len <= token_count(back, cfg) <= max_len
            ):
                continue
            records.append(
                AppRecord(
                    id=f"b{index}:{pair.id}",
                    original_src=pair.src,
                    backtranslation=back,
                    origin_pair=bitext.pair,
                )
            )
    if dedupe:
        seen = set()
        unique = []
        for r in records:
            key = (r.original_src, r.backtranslation)
            if key not in seen:
                seen.add(key)
                unique.append(r)
        records = unique
    return AppCorpus(source_lang=source_lang or "", records=records)


def split_corpus(
    corpus: AppCorpus,
    ratios: tuple[float, float, float],
    seed: int,
) -> tuple[AppCorpus, AppCorpus, AppCorpus]:
    """Seeded shuffle, then contiguous partition into train/val/test.

    Sizes are floors of ratio * N; leftover records go to the splits with
    the largest fractional parts (ties to the earlier split).
    """
    if any(r < 0 for r in ratios):
        raise ContractViolation(f"ratios must be non-negative: {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ContractViolation(f"ratios must sum to 1: {ratios}")
    n = len(corpus.records)
    if n < 3 and all(r > 0 for r in ratios):
        raise SizingError(f"cannot split {n} records three ways")
    shuffled = list(corpus.records)
    random.Random(seed).shuffle(shuffled)
    sizes = [int(r * n) for r in ratios]
    fractions = [r * n - s for r, s in zip(ratios, sizes)]
    for _ in range(n - sum(sizes)):
        best = max(range(3), key=lambda i: (fractions[i], -i))
        sizes[best] += 1
        fractions[best] = -1.0
    out = []
    start = 0
    for size in sizes:
        out.append(AppCorpus(source_lang=corpus.source_lang, records=shuffled[start : start + size]))
        start += size
    return out[0], out[1], out[2]


def sample_pairs(bitext: Bitext, n: int, seed: int) -> Bitext:
    """Uniform sample without replacement, preserving corpus order.

    ``n`` larger than the bitext returns everything.
    """
    if n < 0:
        raise ContractViolation(f"sample size must be >= 0, got {n}")
    if n >= len(bitext.pairs):
        chosen = list(bitext.pairs)
    else:
        indices = sorted(random.Random(seed).sample(range(len(bitext.pairs)), n))
        chosen = [bitext.pairs[i] for i in indices]
    return Bitext(pair=bitext.pair, pairs=chosen, provenance=bitext.provenance)


def save_app_corpus(corpus: AppCorpus, path: str | Path) -> None:
    """Write one JSON object per record:
    {"id", "original_src", "backtranslation", "origin_src_lang", "origin_tgt_lang"}."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in corpus.records:
            fh.write(
                json.dumps(
                    {
                        "id": r.id,
                        "original_src": r.original_src,
                        "backtranslation": r.backtranslation,
                        "origin_src_lang": r.origin_pair.source,
                        "origin_tgt_lang": r.origin_pair.target,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_app_corpus(path: str | Path) -> AppCorpus:
    records = []
    source_lang = ""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                record = AppRecord(
                    id=str(obj["id"]),
                    original_src=obj["original_src"],
                    backtranslation=obj["backtranslation"],
                    origin_pair=LangPair(obj["origin_src_lang"], obj["origin_tgt_lang"]),
                )
            except (ValueError, KeyError) as exc:
                raise ParseError(f"{path}:{lineno}: bad corpus record: {exc}") from exc
            records.append(record)
            source_lang = record.origin_pair.source
    return AppCorpus(source_lang=source_lang, records=records)


def bitext_digest(bitext: Bitext) -> str:
    """Stable content hash of a bitext, used to address runs and reports."""
    h = hashlib.sha256()
    h.update(str(bitext.pair).encode("utf-8"))
    for p in bitext.pairs:
        h.update(b"\x1e")
        h.update("\x1f".join((p.id, p.src, p.tgt)).encode("utf-8"))
    return h.hexdigest()[:16]
