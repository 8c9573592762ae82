"""Deterministic tokenization and n-gram counting.

Every metric and corpus filter in this package counts tokens the same way:
lowercase (in the default uncased mode), split on Unicode whitespace, then
peel each Unicode punctuation character off into a token of its own.  The
scheme is deliberately simple so that scores are comparable run to run; it
does not try to reproduce any particular external tokenizer.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass

from .errors import ContractViolation

__all__ = [
    "TokenizerConfig",
    "DEFAULT_TOKENIZER",
    "tokenize",
    "token_count",
    "NGramMultiset",
    "ngrams",
    "clipped_matches",
]


@dataclass(frozen=True)
class TokenizerConfig:
    """Tokenizer behaviour: ``casing`` in {cased, uncased}, ``punctuation``
    in {split, keep}.  Defaults are uncased + split."""

    casing: str = "uncased"
    punctuation: str = "split"

    def __post_init__(self) -> None:
        if self.casing not in ("cased", "uncased"):
            raise ContractViolation(f"unknown casing mode: {self.casing!r}")
        if self.punctuation not in ("split", "keep"):
            raise ContractViolation(f"unknown punctuation mode: {self.punctuation!r}")


DEFAULT_TOKENIZER = TokenizerConfig()


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _split_punct(chunk: str) -> list[str]:
    """Split one whitespace-free chunk so each punctuation char stands alone."""
    out: list[str] = []
    word = []
    for ch in chunk:
        if _is_punct(ch):
            if word:
                out.append("".join(word))
                word = []
            out.append(ch)
        else:
            word.append(ch)
    if word:
        out.append("".join(word))
    return out


def tokenize(text: str, cfg: TokenizerConfig = DEFAULT_TOKENIZER) -> list[str]:
    """Tokenize ``text`` deterministically.

    Empty input gives an empty list.  The result round-trips: tokenizing
    ``" ".join(tokens)`` again yields the same tokens.
    """
    if cfg.casing == "uncased":
        text = text.lower()
    chunks = text.split()
    if cfg.punctuation == "keep":
        return chunks
    tokens: list[str] = []
    for chunk in chunks:
        tokens.extend(_split_punct(chunk))
    return tokens


def token_count(text: str, cfg: TokenizerConfig = DEFAULT_TOKENIZER) -> int:
    """Number of tokens in ``text``; the single source of truth for length
    filters and minimum-length rules."""
    return len(tokenize(text, cfg))


@dataclass
class NGramMultiset:
    """All order-``n`` n-grams of one sentence with their counts."""

    order: int
    counts: Counter

    def total(self) -> int:
        return sum(self.counts.values())


def ngrams(tokens: list[str], n: int) -> NGramMultiset:
    """Sliding-window n-gram extraction.

    The count total is always ``max(0, len(tokens) - n + 1)``; sentences
    shorter than ``n`` give an empty multiset.
    """
    if n < 1:
        raise ContractViolation(f"n-gram order must be >= 1, got {n}")
    counts = Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return NGramMultiset(order=n, counts=counts)


def clipped_matches(hyp: NGramMultiset, ref: NGramMultiset) -> int:
    """Sum over n-grams of min(hypothesis count, reference count).

    Both multisets must have the same order.
    """
    if hyp.order != ref.order:
        raise ContractViolation(
            f"n-gram order mismatch: hyp order {hyp.order}, ref order {ref.order}"
        )
    small, large = (hyp.counts, ref.counts) if len(hyp.counts) <= len(ref.counts) else (ref.counts, hyp.counts)
    matched = 0
    for gram, count in small.items():
        other = large.get(gram)
        if other:
            matched += count if count < other else other
    return matched
