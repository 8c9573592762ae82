"""Shared fixtures: a deterministic idiom-garbling translation scenario.

The mock translator maps tokens one for one, so multi-word idioms come out
"word by word" and miss references that were written around the plain
phrasing.  References are built by translating the plainly-phrased variant
of each source, which makes the rule simplifier provably helpful: it
rewrites exactly the idioms the token-by-token translation garbles.
"""

import random

from appmt.backends import LangPair, MockTranslator, RuleSimplifier, parse_rules
from appmt.corpus import Bitext, SentencePair

IDIOMS = [
    ("jump in", "take part"),
    ("you're nuts", "you're crazy"),
    ("marooned", "stranded"),
    ("over your head", "too complicated"),
    ("swell", "great"),
]

FILLER = [
    "the vice president should feel free to",
    "when i was here my first meal was",
    "i still think but not as much as before",
    "this case would make your nose bleed",
    "another party is planned for tonight",
    "we can stop counting the days now",
]

# short fillers plus the three-token idiom make the garbled region a large
# fraction of the sentence, pushing the per-sentence score gap past 0.4
# while keeping sources above the 4-token floor
SHORT_FILLER = [
    "it went",
    "this is",
    "they said that",
    "nobody knew that",
]
SHORT_IDIOM = ("over your head", "too complicated")


def make_idiom_bitext(
    n: int,
    seed: int = 0,
    pair: LangPair = LangPair("en", "xx"),
    short: bool = False,
    trap_every: int | None = None,
):
    """Build (bitext, simplifier, backend) where simplifying mostly helps.

    Roughly half the sentences contain an idiom; their references are the
    translations of the plain phrasing, so the unsimplified pass misses
    them while the simplified pass matches exactly.  With ``trap_every``
    set, every k-th idiom sentence keeps a reference built from the
    literal phrasing instead, so the rewrite moves away from the reference
    and the gap goes negative.
    """
    rng = random.Random(seed)
    backend = MockTranslator()
    rules = parse_rules(IDIOMS)
    simplifier = RuleSimplifier(rules)
    filler_pool = SHORT_FILLER if short else FILLER
    pairs = []
    for i in range(n):
        filler = rng.choice(filler_pool)
        if i % 2 == 0:
            idiom, plain = SHORT_IDIOM if short else IDIOMS[i % len(IDIOMS)]
            src = f"{filler} {idiom}"
            plain_src = f"{filler} {plain}"
            if trap_every and (i // 2) % trap_every == 0:
                plain_src = src  # reference follows the literal phrasing
        else:
            src = plain_src = filler
        ref = backend.translate_batch([plain_src], pair)[0]
        pairs.append(SentencePair(id=str(i), src=src, tgt=ref))
    return Bitext(pair=pair, pairs=pairs), simplifier, backend
