"""TER tests, including the brute-force oracles the scores are checked against."""

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from appmt.errors import ContractViolation
from appmt.metrics import levenshtein, ter


def oracle_edit_distance(a, b):
    """Full-matrix DP edit distance, kept independent of the library path."""
    m, n = len(a), len(b)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        table[i][0] = i
    for j in range(n + 1):
        table[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
                table[i - 1][j - 1] + cost,
            )
    return table[m][n]


def all_single_block_shifts(tokens):
    """Every sequence reachable from ``tokens`` by moving one block once."""
    out = []
    n = len(tokens)
    for length in range(1, n + 1):
        for i in range(0, n - length + 1):
            block = tokens[i : i + length]
            rest = tokens[:i] + tokens[i + length :]
            for j in range(len(rest) + 1):
                if j == i:
                    continue
                out.append(rest[:j] + block + rest[j:])
    return out


class TestNoShifts:
    def test_identity(self):
        toks = "the cat sat".split()
        report = ter(toks, toks, mode="no_shifts")
        assert report.ter == 0.0 and report.edits == 0

    def test_single_substitution(self):
        report = ter("the cat sat up".split(), "the cat sat down".split())
        assert report.edits == 1
        assert report.ter == pytest.approx(0.25)

    def test_empty_hypothesis_all_insertions(self):
        report = ter([], ["a", "b", "c"])
        assert report.ter == 1.0
        assert report.edits == 3
        assert report.shifts == 0

    def test_empty_reference_rejected(self):
        with pytest.raises(ContractViolation):
            ter(["a"], [])

    def test_bad_mode_rejected(self):
        with pytest.raises(ContractViolation):
            ter(["a"], ["a"], mode="sideways")

    @given(
        st.lists(st.sampled_from("abc"), max_size=7),
        st.lists(st.sampled_from("abc"), min_size=1, max_size=7),
    )
    def test_matches_oracle(self, hyp, ref):
        assert ter(hyp, ref, mode="no_shifts").edits == oracle_edit_distance(hyp, ref)

    @given(
        st.lists(st.sampled_from("abcd"), max_size=8),
        st.lists(st.sampled_from("abcd"), min_size=1, max_size=8),
    )
    def test_zero_iff_equal(self, hyp, ref):
        report = ter(hyp, ref, mode="no_shifts")
        assert (report.ter == 0.0) == (hyp == ref)


class TestShifts:
    def test_block_rotation_is_one_shift(self):
        # brute force over all single-block shifts of "c a b" finds "a b c"
        hyp, ref = "c a b".split(), "a b c".split()
        assert min(
            oracle_edit_distance(s, ref) for s in all_single_block_shifts(hyp)
        ) == 0
        report = ter(hyp, ref, mode="shifts")
        assert report.shifts == 1
        assert report.edits == 1
        assert report.ter == pytest.approx(1 / 3)

    def test_adjacent_swap_is_one_shift(self):
        # moving "b" behind "a" leaves zero residual edits, beating the
        # two substitutions of the plain distance
        report = ter("b a".split(), "a b".split(), mode="shifts")
        assert report.shifts == 1
        assert report.edits == 1

    def test_shift_not_taken_when_not_strictly_cheaper(self):
        # best single shift of "b x" toward "x y" leaves 1 residual edit,
        # so shift + residual only ties the plain distance of 2; the
        # shift must not be applied
        report = ter("b x".split(), "x y".split(), mode="shifts")
        assert report.shifts == 0
        assert report.edits == 2

    def test_identity_never_shifts(self):
        toks = "a b c d".split()
        report = ter(toks, toks, mode="shifts")
        assert report.edits == 0 and report.shifts == 0

    def test_long_displacement(self):
        hyp = "z a b c d e".split()
        ref = "a b c d e z".split()
        report = ter(hyp, ref, mode="shifts")
        assert report.shifts == 1
        assert report.edits == 1

    @settings(max_examples=300)
    @given(
        st.lists(st.sampled_from("abcd"), max_size=8),
        st.lists(st.sampled_from("abcd"), min_size=1, max_size=8),
    )
    def test_shifts_never_exceed_plain_edits(self, hyp, ref):
        with_shifts = ter(hyp, ref, mode="shifts")
        plain = ter(hyp, ref, mode="no_shifts")
        assert with_shifts.edits <= plain.edits
        assert with_shifts.shifts <= with_shifts.edits

    def test_greedy_matches_exhaustive_single_shift(self):
        # on instances where one shift suffices, the greedy result equals
        # brute force over every single block shift
        rng = random.Random(7)
        for _ in range(50):
            ref = [rng.choice("abcde") for _ in range(rng.randint(2, 6))]
            hyp = list(ref)
            # move one block to build a pure-shift instance
            i = rng.randrange(len(hyp))
            length = rng.randint(1, len(hyp) - i)
            block = hyp[i : i + length]
            rest = hyp[:i] + hyp[i + length :]
            j = rng.randint(0, len(rest))
            hyp = rest[:j] + block + rest[j:]
            report = ter(hyp, ref, mode="shifts")
            best_single = min(
                oracle_edit_distance(s, ref) + 1
                for s in all_single_block_shifts(hyp)
            ) if len(hyp) > 1 else oracle_edit_distance(hyp, ref)
            assert report.edits <= max(best_single, oracle_edit_distance(hyp, ref))


def test_levenshtein_exhaustive_tiny():
    vocab = "ab"
    seqs = [
        list(p)
        for n in range(0, 4)
        for p in itertools.product(vocab, repeat=n)
    ]
    for a in seqs:
        for b in seqs:
            assert levenshtein(a, b) == oracle_edit_distance(a, b)
