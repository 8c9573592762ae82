"""Pluggable translation and simplification backends.

The toolkit never assumes anything about the translation system beyond a
batch ``translate`` call, so a remote vendor, the deterministic offline
mock, and a cached wrapper are interchangeable.  Simplifiers follow the
same shape with a single-language signature.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import requests

from .errors import ContractViolation, ProtocolError, TransportError

logger = logging.getLogger(__name__)

__all__ = [
    "LangPair",
    "BackendConfig",
    "ParaphraseRule",
    "parse_rules",
    "load_rules_tsv",
    "rule_simplify",
    "Translator",
    "MockTranslator",
    "HttpTranslator",
    "TranslationCache",
    "CachedTranslator",
    "Simplifier",
    "IdentitySimplifier",
    "RuleSimplifier",
    "HttpSimplifier",
    "build_backend",
]

# tag glued onto mock-translated tokens: readable and never produced by
# whitespace tokenization
MOCK_TAG = "·"


@dataclass(frozen=True)
class LangPair:
    """A translation direction, e.g. ``LangPair("en", "bg")``."""

    source: str
    target: str

    def __post_init__(self) -> None:
        for code in (self.source, self.target):
            if not code or code != code.lower():
                raise ContractViolation(f"language codes must be non-empty lowercase: {code!r}")
        if self.source == self.target:
            raise ContractViolation(f"source and target must differ: {self.source!r}")

    def reversed(self) -> "LangPair":
        return LangPair(self.target, self.source)

    def __str__(self) -> str:
        return f"{self.source}-{self.target}"

    @classmethod
    def parse(cls, text: str) -> "LangPair":
        src, sep, tgt = text.partition("-")
        if not sep:
            raise ContractViolation(f"expected 'src-tgt' language pair, got {text!r}")
        return cls(src, tgt)


@dataclass(frozen=True)
class ParaphraseRule:
    """Replace one token sequence with another."""

    pattern: tuple[str, ...]
    replacement: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.pattern:
            raise ContractViolation("paraphrase rule pattern must be non-empty")


def parse_rules(pairs: Iterable[tuple[str, str]]) -> list[ParaphraseRule]:
    """Build rules from (pattern, replacement) strings, token-split on
    whitespace.  Duplicate patterns are rejected."""
    rules = [
        ParaphraseRule(tuple(p.split()), tuple(r.split())) for p, r in pairs
    ]
    seen = set()
    for rule in rules:
        if rule.pattern in seen:
            raise ContractViolation(f"duplicate rule pattern: {' '.join(rule.pattern)!r}")
        seen.add(rule.pattern)
    return rules


def load_rules_tsv(path: str | Path) -> list[ParaphraseRule]:
    """Read ``pattern<TAB>replacement`` rules; '#' lines are comments."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise ContractViolation(f"{path}:{lineno}: expected pattern<TAB>replacement")
            pattern, _, replacement = line.partition("\t")
            pairs.append((pattern, replacement))
    return parse_rules(pairs)


def _compile_rules(
    rules: Sequence[ParaphraseRule],
) -> tuple[dict[tuple[str, ...], tuple[str, ...]], int]:
    table: dict[tuple[str, ...], tuple[str, ...]] = {}
    for rule in rules:
        if rule.pattern in table:
            raise ContractViolation(f"duplicate rule pattern: {' '.join(rule.pattern)!r}")
        table[rule.pattern] = rule.replacement
    return table, max((len(p) for p in table), default=0)


def _apply_rules(
    table: dict[tuple[str, ...], tuple[str, ...]],
    max_len: int,
    tokens: Sequence[str],
) -> list[str]:
    if not table:
        return list(tokens)
    out: list[str] = []
    i = 0
    while i < len(tokens):
        for length in range(min(max_len, len(tokens) - i), 0, -1):
            replacement = table.get(tuple(tokens[i : i + length]))
            if replacement is not None:
                out.extend(replacement)
                i += length
                break
        else:
            out.append(tokens[i])
            i += 1
    return out


def rule_simplify(rules: Sequence[ParaphraseRule], tokens: Sequence[str]) -> list[str]:
    """Apply rules in a single left-to-right pass.

    At each position the longest matching pattern wins; its replacement is
    emitted and never re-scanned, so rule chains do not cascade.
    """
    table, max_len = _compile_rules(rules)
    return _apply_rules(table, max_len, tokens)


class Translator:
    """Batch translation interface; subclasses set ``engine_id``."""

    engine_id: str = "abstract"

    def translate_batch(self, texts: Sequence[str], pair: LangPair) -> list[str]:
        raise NotImplementedError

    @staticmethod
    def _check_texts(texts: Sequence[str]) -> None:
        if not isinstance(texts, (list, tuple)) or len(texts) == 0:
            raise ContractViolation("translate_batch needs a non-empty list of texts")


def _invert(lexicon: Mapping[str, str]) -> dict[str, str]:
    inverse = {v: k for k, v in lexicon.items()}
    if len(inverse) != len(lexicon):
        raise ContractViolation("mock lexicon must be injective (one-to-one)")
    return inverse


class MockTranslator(Translator):
    """Deterministic, fully offline translator.

    Without an explicit lexicon every token is translated as the token
    reversed plus a language tag (``cat`` -> ``tac·xx``), which is
    injective and trivially invertible; translating tagged tokens back
    strips the tag.  Explicit per-direction lexicons map tokens one for
    one and pass unknown tokens through.

    ``reverse_rules`` are paraphrase rules keyed by the *forward*
    direction; they run after decoding whenever that direction is
    translated backwards, imitating the loose phrasing back-translations
    acquire.
    """

    def __init__(
        self,
        lexicons: Optional[Mapping[tuple[str, str], Mapping[str, str]]] = None,
        reverse_rules: Optional[Mapping[tuple[str, str], Sequence[ParaphraseRule]]] = None,
        engine_id: str = "mock",
    ):
        self.engine_id = engine_id
        self._lexicons = {k: dict(v) for k, v in (lexicons or {}).items()}
        self._inverses = {k: _invert(v) for k, v in self._lexicons.items()}
        self._reverse_rules = {
            k: _compile_rules(v) for k, v in (reverse_rules or {}).items()
        }
        self.calls = 0  # observable effort counter for cache tests

    def _map_token(self, token: str, pair: LangPair) -> str:
        forward = self._lexicons.get((pair.source, pair.target))
        if forward is not None:
            return forward.get(token, token)
        inverse = self._inverses.get((pair.target, pair.source))
        if inverse is not None:
            return inverse.get(token, token)
        tag = MOCK_TAG + pair.source
        if token.endswith(tag):
            return token[: -len(tag)][::-1]
        return token[::-1] + MOCK_TAG + pair.target

    def translate_batch(self, texts: Sequence[str], pair: LangPair) -> list[str]:
        self._check_texts(texts)
        self.calls += 1
        compiled = self._reverse_rules.get((pair.target, pair.source))
        out = []
        for text in texts:
            tokens = [self._map_token(t, pair) for t in text.split()]
            if compiled:
                tokens = _apply_rules(compiled[0], compiled[1], tokens)
            out.append(" ".join(tokens))
        return out


class HttpTranslator(Translator):
    """Client for the JSON-over-HTTP translation protocol.

    POST ``{endpoint}/translate`` with ``{"source_lang", "target_lang",
    "texts"}`` and expect ``{"translations": [...]}`` of equal length.
    Requests are chunked, sent with bounded concurrency, and retried with
    exponential backoff; a response of the wrong shape is a protocol
    error and is not retried.
    """

    def __init__(
        self,
        endpoint: str,
        engine_id: Optional[str] = None,
        batch_size: int = 32,
        max_concurrency: int = 4,
        max_retries: int = 2,
        backoff_base: float = 0.1,
        timeout: float = 30.0,
        session: Optional[requests.Session] = None,
    ):
        if batch_size < 1:
            raise ContractViolation(f"batch_size must be >= 1, got {batch_size}")
        if max_concurrency < 1:
            raise ContractViolation(f"max_concurrency must be >= 1, got {max_concurrency}")
        if max_retries < 0:
            raise ContractViolation(f"max_retries must be >= 0, got {max_retries}")
        self.endpoint = endpoint.rstrip("/")
        self.engine_id = engine_id or self.endpoint
        self.batch_size = batch_size
        self.max_concurrency = max_concurrency
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.timeout = timeout
        self._session = session or requests.Session()

    def _post_chunk(self, chunk: list[str], start: int, source: str, target: str) -> list[str]:
        payload = {"source_lang": source, "target_lang": target, "texts": chunk}
        indices = tuple(range(start, start + len(chunk)))
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_base * (2 ** (attempt - 1)))
            try:
                response = self._session.post(
                    f"{self.endpoint}/translate", json=payload, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code != 200:
                last_error = TransportError(
                    f"HTTP {response.status_code} from {self.endpoint}", indices
                )
                continue
            try:
                body = response.json()
            except ValueError as exc:
                raise ProtocolError(f"non-JSON response from {self.endpoint}") from exc
            translations = body.get("translations")
            if not isinstance(translations, list) or len(translations) != len(chunk):
                raise ProtocolError(
                    f"expected {len(chunk)} translations, got "
                    f"{len(translations) if isinstance(translations, list) else type(translations).__name__}"
                )
            return translations
        raise TransportError(
            f"chunk {start}..{start + len(chunk) - 1} failed after "
            f"{self.max_retries + 1} attempts: {last_error}",
            indices,
        )

    def translate_batch(self, texts: Sequence[str], pair: LangPair) -> list[str]:
        self._check_texts(texts)
        return self._request_all(list(texts), pair.source, pair.target)

    def _request_all(self, texts: list[str], source: str, target: str) -> list[str]:
        chunks = [
            (start, texts[start : start + self.batch_size])
            for start in range(0, len(texts), self.batch_size)
        ]
        out: list[Optional[str]] = [None] * len(texts)
        if len(chunks) == 1:
            start, chunk = chunks[0]
            for offset, text in enumerate(self._post_chunk(chunk, start, source, target)):
                out[start + offset] = text
            return out  # type: ignore[return-value]
        with ThreadPoolExecutor(max_workers=self.max_concurrency) as pool:
            futures = {
                pool.submit(self._post_chunk, chunk, start, source, target): start
                for start, chunk in chunks
            }
            for future, start in futures.items():
                for offset, text in enumerate(future.result()):
                    out[start + offset] = text
        return out  # type: ignore[return-value]


class TranslationCache:
    """Append-only persistent key-value store for translations.

    One JSON object per line: ``{"k": <sha256 hex>, "v": <translation>}``.
    The key hashes (engine id, source lang, target lang, text), so any
    deterministic backend can be resumed or swapped without invalidation.
    Entries never expire; a truncated final line (crashed writer) is
    skipped on load.  Reads are lock-free; writes are serialized.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._entries: dict[str, str] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        record = json.loads(line)
                        self._entries[record["k"]] = record["v"]
                    except (ValueError, KeyError):
                        logger.warning("skipping corrupt cache line in %s", self.path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(engine_id: str, source: str, target: str, text: str) -> str:
        raw = "\x1f".join((engine_id, source, target, text))
        return hashlib.sha256(raw.encode("utf-8")).hexdigest()

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, key: str) -> Optional[str]:
        return self._entries.get(key)

    def put_many(self, items: Sequence[tuple[str, str]]) -> None:
        if not items:
            return
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                for key, value in items:
                    fh.write(json.dumps({"k": key, "v": value}, ensure_ascii=False) + "\n")
                fh.flush()
            for key, value in items:
                self._entries[key] = value


class CachedTranslator(Translator):
    """Serve translations from a persistent cache, consulting the inner
    backend only for misses."""

    def __init__(self, inner: Translator, cache: TranslationCache):
        self.inner = inner
        self.cache = cache
        self.engine_id = inner.engine_id

    def translate_batch(self, texts: Sequence[str], pair: LangPair) -> list[str]:
        self._check_texts(texts)
        keys = [
            TranslationCache.key(self.engine_id, pair.source, pair.target, t)
            for t in texts
        ]
        missing: dict[str, str] = {}
        for key, text in zip(keys, texts):
            if self.cache.get(key) is None and key not in missing:
                missing[key] = text
        if missing:
            miss_keys = list(missing)
            translated = self.inner.translate_batch([missing[k] for k in miss_keys], pair)
            self.cache.put_many(list(zip(miss_keys, translated)))
        out = []
        for key in keys:
            value = self.cache.get(key)
            assert value is not None
            out.append(value)
        return out


class Simplifier:
    """Batch simplification interface; subclasses set ``simplifier_id``."""

    simplifier_id: str = "abstract"

    def simplify_batch(self, texts: Sequence[str]) -> list[str]:
        raise NotImplementedError


class IdentitySimplifier(Simplifier):
    """Returns the input verbatim; the no-preprocessing baseline."""

    simplifier_id = "identity"

    def simplify_batch(self, texts: Sequence[str]) -> list[str]:
        return list(texts)


class RuleSimplifier(Simplifier):
    """Longest-match paraphrase-rule simplifier over whitespace tokens."""

    def __init__(self, rules: Sequence[ParaphraseRule], simplifier_id: str = "rules"):
        self.rules = list(rules)
        self._table, self._max_len = _compile_rules(self.rules)
        self.simplifier_id = simplifier_id

    def simplify_batch(self, texts: Sequence[str]) -> list[str]:
        return [
            " ".join(_apply_rules(self._table, self._max_len, text.split()))
            for text in texts
        ]


class HttpSimplifier(Simplifier):
    """Remote simplifier speaking the translation wire protocol with
    ``source_lang == target_lang``."""

    def __init__(self, endpoint: str, language: str, simplifier_id: Optional[str] = None, **kwargs):
        self._client = HttpTranslator(endpoint, engine_id=simplifier_id or endpoint, **kwargs)
        self.language = language
        self.simplifier_id = self._client.engine_id

    def simplify_batch(self, texts: Sequence[str]) -> list[str]:
        if not texts:
            return []
        return self._client._request_all(list(texts), self.language, self.language)


@dataclass
class BackendConfig:
    """Declarative backend description, buildable from CLI flags or JSON.

    ``kind`` is one of ``http``, ``mock``, ``cached``; a cached config
    wraps an ``inner`` config plus a ``cache_path``.
    """

    kind: str
    endpoint: Optional[str] = None
    max_concurrency: int = 4
    max_retries: int = 2
    backoff_base: float = 0.1
    batch_size: int = 32
    engine_id: Optional[str] = None
    cache_path: Optional[str] = None
    inner: Optional["BackendConfig"] = None
    mock_rules: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("http", "mock", "cached"):
            raise ContractViolation(f"unknown backend kind: {self.kind!r}")
        if self.batch_size < 1 or self.max_concurrency < 1 or self.max_retries < 0:
            raise ContractViolation("batch_size/max_concurrency must be >= 1 and max_retries >= 0")


def build_backend(config: BackendConfig) -> Translator:
    """Instantiate the translator a config describes."""
    if config.kind == "mock":
        return MockTranslator(
            reverse_rules=config.mock_rules or None,
            engine_id=config.engine_id or "mock",
        )
    if config.kind == "http":
        if not config.endpoint:
            raise ContractViolation("http backend needs an endpoint")
        return HttpTranslator(
            config.endpoint,
            engine_id=config.engine_id,
            batch_size=config.batch_size,
            max_concurrency=config.max_concurrency,
            max_retries=config.max_retries,
            backoff_base=config.backoff_base,
        )
    if not config.cache_path or config.inner is None:
        raise ContractViolation("cached backend needs cache_path and inner config")
    return CachedTranslator(build_backend(config.inner), TranslationCache(config.cache_path))
