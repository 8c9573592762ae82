"""Side-by-side human evaluation: sampling, blinding, storage, aggregation.

Raters see a source sentence and three candidate translations in shuffled
slots A/B/C: the machine translation of the original sentence, the machine
translation of the simplified sentence, and the human reference.  Which
slot holds which system is stored server-side and never leaves the store,
so ratings are blind.  Items are drawn from the two interesting strata of
a pipeline run: sentences the simplifier helped a lot and sentences it
hurt.

Persistence is an append-only JSONL event log plus an optional snapshot;
replaying any prefix of the log reproduces the exact state the prefix
describes, which is what makes the store crash-safe.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import logging
import math
import os
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import ConflictError, ContractViolation, NotFoundError, SizingError
from .pipeline import EvalRun
from .tokens import DEFAULT_TOKENIZER, TokenizerConfig, token_count

logger = logging.getLogger(__name__)

__all__ = [
    "SYSTEMS",
    "SLOTS",
    "EvalItem",
    "Rating",
    "SessionState",
    "AggregateReport",
    "stratified_sample",
    "blind_item",
    "aggregate",
    "EvalStore",
    "save_items",
    "load_items",
]

SLOTS = ("A", "B", "C")
SYSTEMS = ("original_mt", "simplified_mt", "reference")

DEFAULT_POS_THRESHOLD = 0.4
DEFAULT_N_PER_STRATUM = 100
DEFAULT_MIN_TOKENS = 4

SNAPSHOT_EVERY = 100


@dataclass
class EvalItem:
    """A work unit: one source sentence with three blinded candidates.

    ``mapping`` (slot -> system) is the unblinding key and must never be
    shipped to raters; ``blind_item`` builds the safe payload.
    """

    item_id: str
    language: str
    x: str
    y: str
    slots: dict[str, str]
    mapping: dict[str, str]
    stratum: str
    delta_gleu: float

    def __post_init__(self) -> None:
        if sorted(self.slots) != list(SLOTS) or sorted(self.mapping) != list(SLOTS):
            raise ContractViolation("items need exactly slots A, B and C")
        if sorted(self.mapping.values()) != sorted(SYSTEMS):
            raise ContractViolation("slots must hold each system exactly once")
        if self.stratum not in ("positive", "negative"):
            raise ContractViolation(f"unknown stratum: {self.stratum!r}")


@dataclass
class Rating:
    item_id: str
    evaluator_id: str
    scores: dict[str, int]
    timestamp: str = ""

    def __post_init__(self) -> None:
        if sorted(self.scores) != list(SLOTS):
            raise ContractViolation("a rating must score exactly slots A, B and C")
        for slot, score in self.scores.items():
            if not isinstance(score, int) or isinstance(score, bool) or not 0 <= score <= 6:
                raise ContractViolation(f"slot {slot} score must be an integer 0..6, got {score!r}")


@dataclass
class SessionState:
    session_id: str
    evaluator_id: str
    language: str
    queue: list[str]
    completed: set[str] = field(default_factory=set)

    def is_done(self) -> bool:
        return all(item_id in self.completed for item_id in self.queue)


@dataclass
class AggregateReport:
    language: str
    n_items: int
    mean_original: float
    mean_simple: float
    mean_human: float
    pct_positive: float
    pct_negative: float
    pct_same: float


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _derived_rng(*parts: object) -> random.Random:
    """Process-independent RNG seeded from a hash of the parts."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def stratified_sample(
    run: EvalRun,
    n_per_stratum: int = DEFAULT_N_PER_STRATUM,
    pos_threshold: float = DEFAULT_POS_THRESHOLD,
    min_tokens: int = DEFAULT_MIN_TOKENS,
    seed: int = 0,
    cfg: TokenizerConfig = DEFAULT_TOKENIZER,
) -> list[EvalItem]:
    """Draw rating items from the big-gain and regression strata of a run.

    Positive stratum: gain above ``pos_threshold``; negative stratum: any
    loss.  Only sources longer than ``min_tokens`` tokens qualify.  Each
    stratum is sampled uniformly without replacement and shrinks with a
    warning when it has fewer than ``n_per_stratum`` members.  Slot order
    is a per-item seeded permutation.
    """
    if n_per_stratum < 0:
        raise ContractViolation(f"n_per_stratum must be >= 0, got {n_per_stratum}")
    eligible = [r for r in run.records if token_count(r.x, cfg) > min_tokens]
    strata = {
        "positive": [r for r in eligible if r.delta_gleu > pos_threshold],
        "negative": [r for r in eligible if r.delta_gleu < 0],
    }
    items: list[EvalItem] = []
    for stratum, records in strata.items():
        if len(records) < n_per_stratum:
            logger.warning(
                "stratum %r has only %d eligible sentences (wanted %d)",
                stratum, len(records), n_per_stratum,
            )
        take = min(n_per_stratum, len(records))
        rng = _derived_rng(seed, stratum)
        chosen_idx = sorted(rng.sample(range(len(records)), take))
        for idx in chosen_idx:
            record = records[idx]
            candidates = {
                "original_mt": record.y_hat,
                "simplified_mt": record.y_hat_star,
                "reference": record.y,
            }
            systems = list(SYSTEMS)
            _derived_rng(seed, "slots", record.id).shuffle(systems)
            mapping = dict(zip(SLOTS, systems))
            items.append(
                EvalItem(
                    item_id=record.id,
                    language=str(run.pair),
                    x=record.x,
                    y=record.y,
                    slots={slot: candidates[system] for slot, system in mapping.items()},
                    mapping=mapping,
                    stratum=stratum,
                    delta_gleu=record.delta_gleu,
                )
            )
    return items


def blind_item(item: EvalItem) -> dict:
    """The payload a rater may see: no reference field, no slot mapping,
    no score gap."""
    return {
        "item_id": item.item_id,
        "language": item.language,
        "x": item.x,
        "slots": dict(item.slots),
        "stratum": item.stratum,
    }


def aggregate(
    ratings: Iterable[Rating],
    items: Mapping[str, EvalItem],
    language: Optional[str] = None,
) -> AggregateReport:
    """Unblind ratings and summarize them per system.

    Items rated by several evaluators contribute their per-item mean.  The
    positive/negative/same percentages compare the simplified-translation
    score against the original-translation score per item and partition
    the rated items, so they sum to 100 up to rounding.
    """
    per_item: dict[str, dict[str, list[int]]] = {}
    for rating in ratings:
        item = items.get(rating.item_id)
        if item is None:
            raise NotFoundError(f"rating references unknown item {rating.item_id!r}")
        if language is not None and item.language != language:
            continue
        by_system = per_item.setdefault(rating.item_id, {s: [] for s in SYSTEMS})
        for slot, score in rating.scores.items():
            by_system[item.mapping[slot]].append(score)

    n = len(per_item)
    if n == 0:
        return AggregateReport(language or "all", 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    means = {s: 0.0 for s in SYSTEMS}
    positive = negative = same = 0
    for by_system in per_item.values():
        item_mean = {s: sum(v) / len(v) for s, v in by_system.items()}
        for s in SYSTEMS:
            means[s] += item_mean[s]
        if item_mean["simplified_mt"] > item_mean["original_mt"]:
            positive += 1
        elif item_mean["simplified_mt"] < item_mean["original_mt"]:
            negative += 1
        else:
            same += 1
    return AggregateReport(
        language=language or "all",
        n_items=n,
        mean_original=means["original_mt"] / n,
        mean_simple=means["simplified_mt"] / n,
        mean_human=means["reference"] / n,
        pct_positive=_round1(100.0 * positive / n),
        pct_negative=_round1(100.0 * negative / n),
        pct_same=_round1(100.0 * same / n),
    )


def _round1(value: float) -> float:
    return math.copysign(math.floor(abs(value * 10.0) + 0.5), value) / 10.0


def save_items(items: Sequence[EvalItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(
                json.dumps(
                    {
                        "item_id": item.item_id,
                        "language": item.language,
                        "x": item.x,
                        "y": item.y,
                        "slots": item.slots,
                        "mapping": item.mapping,
                        "stratum": item.stratum,
                        "delta_gleu": item.delta_gleu,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_items(path: str | Path) -> list[EvalItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            items.append(
                EvalItem(
                    item_id=obj["item_id"],
                    language=obj["language"],
                    x=obj["x"],
                    y=obj["y"],
                    slots=obj["slots"],
                    mapping=obj["mapping"],
                    stratum=obj["stratum"],
                    delta_gleu=float(obj.get("delta_gleu", 0.0)),
                )
            )
    return items


class EvalStore:
    """Durable home of items, sessions, and ratings.

    Layout inside the store directory:

    - ``items.jsonl``    the sampled work units, including slot mappings
    - ``events.jsonl``   append-only log of sessions and ratings
    - ``snapshot.json``  optional materialized state + event offset

    Every write is appended and flushed to the log before it is
    acknowledged; reloading replays the log (fast-forwarded from the
    snapshot when it is consistent with the log).  A single lock
    serializes writers; reads work on in-memory state.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.items_path = self.root / "items.jsonl"
        self.events_path = self.root / "events.jsonl"
        self.snapshot_path = self.root / "snapshot.json"
        self._lock = threading.Lock()
        self.items: dict[str, EvalItem] = {}
        if self.items_path.exists():
            self.items = {item.item_id: item for item in load_items(self.items_path)}
        self.sessions: dict[str, SessionState] = {}
        self.ratings: dict[tuple[str, str], Rating] = {}
        self._event_count = 0
        self._load_state()

    # -- persistence ---------------------------------------------------

    def _read_events(self) -> list[dict]:
        events = []
        if self.events_path.exists():
            with open(self.events_path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        events.append(json.loads(line))
                    except ValueError:
                        logger.warning("dropping truncated tail of %s", self.events_path)
                        break
        return events

    def _load_state(self) -> None:
        events = self._read_events()
        start = 0
        if self.snapshot_path.exists():
            try:
                snapshot = json.loads(self.snapshot_path.read_text(encoding="utf-8"))
            except ValueError:
                snapshot = None
            # the log is the source of truth; a snapshot ahead of it
            # (torn files, manual truncation) is discarded
            if snapshot and snapshot.get("event_count", 0) <= len(events):
                for obj in snapshot["sessions"]:
                    session = SessionState(
                        session_id=obj["session_id"],
                        evaluator_id=obj["evaluator_id"],
                        language=obj["language"],
                        queue=list(obj["queue"]),
                        completed=set(obj["completed"]),
                    )
                    self.sessions[session.session_id] = session
                for obj in snapshot["ratings"]:
                    rating = Rating(
                        item_id=obj["item_id"],
                        evaluator_id=obj["evaluator_id"],
                        scores={k: int(v) for k, v in obj["scores"].items()},
                        timestamp=obj.get("timestamp", ""),
                    )
                    self.ratings[(rating.item_id, rating.evaluator_id)] = rating
                start = snapshot["event_count"]
        for event in events[start:]:
            self._apply(event)
        self._event_count = len(events)

    def _apply(self, event: dict) -> None:
        if event["kind"] == "session":
            session = SessionState(
                session_id=event["session_id"],
                evaluator_id=event["evaluator_id"],
                language=event["language"],
                queue=list(event["queue"]),
            )
            # ratings already replayed may complete queue items
            for (item_id, evaluator_id), _ in self.ratings.items():
                if evaluator_id == session.evaluator_id and item_id in session.queue:
                    session.completed.add(item_id)
            self.sessions[session.session_id] = session
        elif event["kind"] == "rating":
            rating = Rating(
                item_id=event["item_id"],
                evaluator_id=event["evaluator_id"],
                scores={k: int(v) for k, v in event["scores"].items()},
                timestamp=event.get("ts", ""),
            )
            self.ratings[(rating.item_id, rating.evaluator_id)] = rating
            session = self.sessions.get(event.get("session_id", ""))
            if session is not None and rating.item_id in session.queue:
                session.completed.add(rating.item_id)
        else:
            logger.warning("ignoring unknown event kind %r", event.get("kind"))

    def _append(self, event: dict) -> None:
        with open(self.events_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._event_count += 1
        if self._event_count % SNAPSHOT_EVERY == 0:
            self.write_snapshot()

    def write_snapshot(self) -> None:
        state = {
            "event_count": self._event_count,
            "sessions": [
                {
                    "session_id": s.session_id,
                    "evaluator_id": s.evaluator_id,
                    "language": s.language,
                    "queue": s.queue,
                    "completed": sorted(s.completed),
                }
                for s in self.sessions.values()
            ],
            "ratings": [
                {
                    "item_id": r.item_id,
                    "evaluator_id": r.evaluator_id,
                    "scores": r.scores,
                    "timestamp": r.timestamp,
                }
                for r in self.ratings.values()
            ],
        }
        tmp = self.snapshot_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(state, ensure_ascii=False), encoding="utf-8")
        tmp.replace(self.snapshot_path)

    # -- item management -----------------------------------------------

    def add_items(self, items: Sequence[EvalItem]) -> None:
        for item in items:
            self.items[item.item_id] = item
        save_items(list(self.items.values()), self.items_path)

    def items_for_language(self, language: str) -> list[EvalItem]:
        return [i for i in self.items.values() if i.language == language]

    # -- sessions and ratings -------------------------------------------

    def create_session(
        self,
        evaluator_id: str,
        language: str,
        items: Optional[Sequence[EvalItem]] = None,
    ) -> SessionState:
        with self._lock:
            for session in self.sessions.values():
                if (
                    session.evaluator_id == evaluator_id
                    and session.language == language
                    and not session.is_done()
                ):
                    raise ConflictError(
                        f"evaluator {evaluator_id!r} already has an active "
                        f"session for {language!r}: {session.session_id}"
                    )
            pool = list(items) if items is not None else self.items_for_language(language)
            if not pool:
                raise SizingError(f"no evaluation items for language {language!r}")
            queue = [item.item_id for item in pool]
            _derived_rng("queue", evaluator_id, language, len(self.sessions)).shuffle(queue)
            session_id = "s" + hashlib.sha256(
                f"{evaluator_id}|{language}|{len(self.sessions)}".encode("utf-8")
            ).hexdigest()[:12]
            event = {
                "kind": "session",
                "session_id": session_id,
                "evaluator_id": evaluator_id,
                "language": language,
                "queue": queue,
                "ts": _utcnow(),
            }
            self._append(event)
            self._apply(event)
            return self.sessions[session_id]

    def get_session(self, session_id: str) -> SessionState:
        session = self.sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        return session

    def next_item(self, session_id: str) -> Optional[dict]:
        """The next blinded item for the session, or None when done."""
        session = self.get_session(session_id)
        for item_id in session.queue:
            if item_id not in session.completed:
                return blind_item(self.items[item_id])
        return None

    def submit_rating(self, session_id: str, item_id: str, scores: Mapping[str, int]) -> Rating:
        """Validate, persist, and apply one rating; latest wins per
        (item, evaluator)."""
        session = self.get_session(session_id)
        if item_id not in self.items:
            raise NotFoundError(f"unknown item {item_id!r}")
        if item_id not in session.queue:
            raise NotFoundError(f"item {item_id!r} is not part of session {session_id}")
        rating = Rating(
            item_id=item_id,
            evaluator_id=session.evaluator_id,
            scores=dict(scores),
            timestamp=_utcnow(),
        )
        with self._lock:
            event = {
                "kind": "rating",
                "session_id": session_id,
                "item_id": item_id,
                "evaluator_id": session.evaluator_id,
                "scores": rating.scores,
                "ts": rating.timestamp,
            }
            self._append(event)
            self._apply(event)
        return rating

    def aggregate(self, language: Optional[str] = None) -> AggregateReport:
        return aggregate(list(self.ratings.values()), self.items, language)

    def export_ratings(self) -> list[dict]:
        return [
            {
                "item_id": r.item_id,
                "evaluator_id": r.evaluator_id,
                "scores": r.scores,
                "timestamp": r.timestamp,
            }
            for r in self.ratings.values()
        ]
