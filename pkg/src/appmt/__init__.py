"""appmt: make black-box machine translation easier by simplifying first.

The toolkit builds simplification corpora by back-translating reference
translations, applies pluggable simplifiers before translation, scores the
before/after gap with BLEU / sentence GLEU / TER / SARI, and runs a blind
side-by-side human evaluation service.
"""

__version__ = "0.1.0"

from .backends import (
    BackendConfig,
    CachedTranslator,
    HttpSimplifier,
    HttpTranslator,
    IdentitySimplifier,
    LangPair,
    MockTranslator,
    ParaphraseRule,
    RuleSimplifier,
    Simplifier,
    TranslationCache,
    Translator,
    build_backend,
    load_rules_tsv,
    rule_simplify,
)
from .corpus import (
    AppCorpus,
    AppRecord,
    Bitext,
    SentencePair,
    build_app_corpus,
    filter_pairs,
    load_app_corpus,
    load_bitext,
    sample_pairs,
    save_app_corpus,
    split_corpus,
)
from .metrics import (
    BleuReport,
    Histogram,
    SariReport,
    TerReport,
    corpus_bleu,
    gleu_distribution,
    percent_delta,
    sari,
    sentence_gleu,
    ter,
)
from .pipeline import (
    BenchmarkReport,
    EvalRecord,
    EvalRun,
    EvalTables,
    GapReport,
    ScopeReport,
    backtranslation_gap,
    evaluate_run,
    load_run,
    run_app,
    save_run,
    scope_of_simplification,
    simplification_benchmark,
)
from .humaneval import (
    AggregateReport,
    EvalItem,
    EvalStore,
    Rating,
    SessionState,
    aggregate,
    blind_item,
    stratified_sample,
)
from .tokens import TokenizerConfig, clipped_matches, ngrams, tokenize
