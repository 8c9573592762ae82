"""Translation and simplification quality metrics.

Implements corpus BLEU (max order 4, geometric mean, no smoothing, single
reference), sentence-level GLEU (min of pooled n-gram precision and recall,
orders 1..4), TER (word-level edit distance, optionally with greedy block
shifts), a set-based SARI, score histograms, and the percent-change helper
used in before/after tables.

Conventions for degenerate 0/0 components are uniform across metrics: a
precision or recall whose candidate-side and reference-side sets are both
empty counts as vacuously perfect (1.0); a zero denominator against a
non-empty opposite side counts as 0.0.  Under these conventions scoring a
text against itself always yields the metric's perfect score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ContractViolation
from .tokens import NGramMultiset, clipped_matches, ngrams

__all__ = [
    "BleuReport",
    "corpus_bleu",
    "sentence_gleu",
    "TerReport",
    "ter",
    "levenshtein",
    "SariReport",
    "sari",
    "Histogram",
    "gleu_distribution",
    "percent_delta",
]

MAX_ORDER = 4

# Greedy shift search caps: block length and travel distance are both
# bounded so the worst case stays polynomial.
MAX_SHIFT_SIZE = 10
MAX_SHIFT_DISTANCE = 10


@dataclass
class BleuReport:
    """Corpus BLEU with its components.

    ``precisions`` holds one modified n-gram precision per order.  An order
    with no n-grams on either side of the whole corpus is vacuous and stored
    as 1.0; an order where only the hypothesis side is empty is 0.0.
    """

    bleu: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hyp_len: int
    ref_len: int


def corpus_bleu(
    hyps: list[list[str]],
    refs: list[list[str]],
    max_order: int = MAX_ORDER,
) -> BleuReport:
    """Corpus-level BLEU against a single reference per hypothesis.

    Clipped matches and lengths are pooled over the whole corpus before
    the precisions are computed.  No smoothing: any genuinely zero
    precision zeroes the score.
    """
    if max_order < 1:
        raise ContractViolation(f"max_order must be >= 1, got {max_order}")
    if len(hyps) != len(refs):
        raise ContractViolation(
            f"hypothesis/reference count mismatch: {len(hyps)} vs {len(refs)}"
        )
    if not hyps:
        raise ContractViolation("corpus_bleu needs at least one sentence pair")

    hyp_len = 0
    ref_len = 0
    matched = [0] * max_order
    hyp_total = [0] * max_order
    ref_total = [0] * max_order
    for hyp, ref in zip(hyps, refs):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_order + 1):
            if len(hyp) >= n:
                hyp_total[n - 1] += len(hyp) - n + 1
            if len(ref) >= n:
                ref_total[n - 1] += len(ref) - n + 1
            if len(hyp) >= n and len(ref) >= n:
                matched[n - 1] += clipped_matches(ngrams(hyp, n), ngrams(ref, n))

    precisions = []
    for n in range(max_order):
        if hyp_total[n] == 0:
            precisions.append(1.0 if ref_total[n] == 0 else 0.0)
        else:
            precisions.append(matched[n] / hyp_total[n])

    if hyp_len == 0:
        bp = 0.0
    elif hyp_len > ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)

    if any(p == 0.0 for p in precisions) or bp == 0.0:
        score = 0.0
    else:
        score = 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / max_order)
    return BleuReport(
        bleu=score,
        precisions=tuple(precisions),
        brevity_penalty=bp,
        hyp_len=hyp_len,
        ref_len=ref_len,
    )


def sentence_gleu(hyp: list[str], ref: list[str], max_order: int = MAX_ORDER) -> float:
    """Sentence-level GLEU: min(precision, recall) over n-grams of orders
    1..4 pooled from both sides.

    Two empty sentences score 1.0; one empty side scores 0.0.
    """
    matched = 0
    hyp_total = 0
    ref_total = 0
    for n in range(1, max_order + 1):
        hyp_total += max(0, len(hyp) - n + 1)
        ref_total += max(0, len(ref) - n + 1)
        if len(hyp) >= n and len(ref) >= n:
            matched += clipped_matches(ngrams(hyp, n), ngrams(ref, n))
    if hyp_total == 0 and ref_total == 0:
        return 1.0
    if hyp_total == 0 or ref_total == 0:
        return 0.0
    # min(m/hyp_total, m/ref_total) == m / max(hyp_total, ref_total)
    return matched / max(hyp_total, ref_total)


@dataclass
class TerReport:
    """Translation error rate: total edits (including shifts) over
    reference length."""

    ter: float
    edits: int
    shifts: int
    ref_len: int


def levenshtein(a: list[str], b: list[str]) -> int:
    """Word-level edit distance with unit insert/delete/substitute costs."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        append = cur.append
        for j, y in enumerate(b, 1):
            d = prev[j - 1]
            if x != y:
                d += 1
            up = prev[j] + 1
            if up < d:
                d = up
            left = cur[j - 1] + 1
            if left < d:
                d = left
            append(d)
        prev = cur
    return prev[-1]


def _bounded_levenshtein(a: list[str], b: list[str], cap: int) -> int:
    """Edit distance, abandoned early: returns ``cap`` as soon as the
    distance provably reaches it (every DP row is a lower bound)."""
    if not a:
        return len(b) if len(b) < cap else cap
    if not b:
        return len(a) if len(a) < cap else cap
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        append = cur.append
        row_min = i
        for j, y in enumerate(b, 1):
            d = prev[j - 1]
            if x != y:
                d += 1
            up = prev[j] + 1
            if up < d:
                d = up
            left = cur[j - 1] + 1
            if left < d:
                d = left
            append(d)
            if d < row_min:
                row_min = d
        if row_min >= cap:
            return cap
        prev = cur
    return prev[-1] if prev[-1] < cap else cap


def _best_shift(hyp: list[str], ref: list[str], base: int):
    """Find the single block shift that most reduces the edit distance.

    Returns ``(new_distance, shifted_hyp)`` or ``None`` when no candidate
    improves on ``base`` by at least 2 (one saved edit has to pay for the
    shift itself).  Ties go to the smaller block, then the leftmost origin,
    then the smallest displacement, then the leftmost destination.
    """
    n = len(hyp)
    best = None  # (dist, length, origin, displacement, dest, shifted)
    # a shift is only worth taking at distance <= base - 2; computing any
    # candidate past the current winner exactly is wasted work, so the DP
    # is capped just above the best distance seen (ties stay exact)
    cap = base - 1
    seen = {tuple(hyp)}
    for length in range(1, min(MAX_SHIFT_SIZE, n) + 1):
        for i in range(0, n - length + 1):
            block = hyp[i : i + length]
            rest = hyp[:i] + hyp[i + length :]
            lo = max(0, i - MAX_SHIFT_DISTANCE)
            hi = min(len(rest), i + MAX_SHIFT_DISTANCE)
            for j in range(lo, hi + 1):
                if j == i:
                    continue
                cand = rest[:j] + block + rest[j:]
                fingerprint = tuple(cand)
                if fingerprint in seen:
                    continue
                seen.add(fingerprint)
                dist = _bounded_levenshtein(cand, ref, cap)
                if dist >= cap:
                    continue
                key = (dist, length, i, abs(j - i), j)
                if best is None or key < best[:5]:
                    best = (dist, length, i, abs(j - i), j, cand)
                    cap = dist + 1
    if best is None:
        return None
    return best[0], best[5]


def ter(hyp: list[str], ref: list[str], mode: str = "shifts") -> TerReport:
    """Translation error rate of ``hyp`` against a non-empty ``ref``.

    ``no_shifts`` mode is plain word-level Levenshtein over reference
    length.  ``shifts`` mode first greedily applies block shifts: each
    shift costs one edit and is taken only while it strictly lowers the
    running total of shifts plus remaining edit distance.
    """
    if mode not in ("shifts", "no_shifts"):
        raise ContractViolation(f"unknown TER mode: {mode!r}")
    if not ref:
        raise ContractViolation("TER needs a non-empty reference (denominator)")
    if not hyp:
        return TerReport(ter=1.0, edits=len(ref), shifts=0, ref_len=len(ref))

    shifts = 0
    current = list(hyp)
    dist = levenshtein(current, ref)
    if mode == "shifts":
        while dist > 1:
            found = _best_shift(current, ref, dist)
            if found is None:
                break
            dist, current = found
            shifts += 1
    edits = shifts + dist
    return TerReport(ter=edits / len(ref), edits=edits, shifts=shifts, ref_len=len(ref))


@dataclass
class SariReport:
    """Set-based SARI with per-order components.

    For each order 1..4 the report keeps the harmonic keep score, the
    harmonic add score, and the delete precision; ``sari`` is 100 times the
    mean over orders of the component average.
    """

    sari: float
    keep_f: tuple[float, ...]
    add_f: tuple[float, ...]
    del_p: tuple[float, ...]


def _ratio(numer: int, denom_set: frozenset, other_set: frozenset) -> float:
    """0/0 against an empty opposite side is vacuously 1.0; a zero
    denominator against a non-empty opposite side is 0.0."""
    if not denom_set:
        return 1.0 if not other_set else 0.0
    return numer / len(denom_set)


def _fscore(p: float, r: float) -> float:
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def sari(
    source: list[str],
    output: list[str],
    references: list[list[str]],
    max_order: int = MAX_ORDER,
) -> SariReport:
    """SARI over n-gram sets: what the output kept of the source, added to
    it, and deleted from it, each judged against the references.

    ``references`` must hold at least one reference; with several, an
    n-gram counts as endorsed if any reference contains it.  An output
    identical to the single reference scores 100.
    """
    if not references:
        raise ContractViolation("sari needs at least one reference")
    keep_f = []
    add_f = []
    del_p = []
    for n in range(1, max_order + 1):
        src = frozenset(ngrams(source, n).counts)
        out = frozenset(ngrams(output, n).counts)
        ref: frozenset = frozenset()
        for r in references:
            ref |= frozenset(ngrams(r, n).counts)

        cand = src & out
        good = src & ref
        hits = len(cand & good)
        keep_f.append(_fscore(_ratio(hits, cand, good), _ratio(hits, good, cand)))

        cand = out - src
        good = ref - src
        hits = len(cand & good)
        add_f.append(_fscore(_ratio(hits, cand, good), _ratio(hits, good, cand)))

        cand = src - out
        good = src - ref
        del_p.append(_ratio(len(cand & good), cand, good))

    components = [(k + a + d) / 3.0 for k, a, d in zip(keep_f, add_f, del_p)]
    return SariReport(
        sari=100.0 * sum(components) / len(components),
        keep_f=tuple(keep_f),
        add_f=tuple(add_f),
        del_p=tuple(del_p),
    )


@dataclass
class Histogram:
    """Fixed-width histogram over [0, 1] with a right-inclusive final bin."""

    bin_edges: list[float]
    counts: list[int]
    total: int = field(default=0)

    def frequencies(self) -> list[float]:
        if self.total == 0:
            return [0.0] * len(self.counts)
        return [c / self.total for c in self.counts]


def _bin_edges(bin_width: float) -> list[float]:
    # the final edge is pinned to 1.0, so the last bin is truncated when
    # bin_width does not divide 1 evenly
    nbins = max(1, math.ceil((1.0 - 1e-12) / bin_width))
    edges = [i * bin_width for i in range(nbins)]
    edges.append(1.0)
    return edges


def _bin_index(score: float, bin_width: float, nbins: int) -> int:
    q = score / bin_width
    idx = int(math.floor(q))
    # snap quotients that are within float noise of the next edge upward
    if q - idx > 1.0 - 1e-9:
        idx += 1
    return min(idx, nbins - 1)


def gleu_distribution(scores: list[float], bin_width: float) -> Histogram:
    """Bin sentence scores from [0, 1] into fixed-width bins.

    The last bin includes its right edge so a perfect 1.0 lands in it.
    """
    if bin_width <= 0:
        raise ContractViolation(f"bin_width must be positive, got {bin_width}")
    edges = _bin_edges(bin_width)
    nbins = len(edges) - 1
    counts = [0] * nbins
    for s in scores:
        if not 0.0 <= s <= 1.0:
            raise ContractViolation(f"score out of [0, 1]: {s}")
        counts[_bin_index(s, bin_width, nbins)] += 1
    return Histogram(bin_edges=edges, counts=counts, total=len(scores))


def percent_delta(before: float, after: float) -> float:
    """Percent change from ``before`` to ``after``, rounded
    half-away-from-zero to one decimal."""
    if before <= 0:
        raise ContractViolation(f"percent_delta needs before > 0, got {before}")
    value = 100.0 * (after - before) / before
    return math.copysign(math.floor(abs(value * 10.0) + 0.5), value) / 10.0
