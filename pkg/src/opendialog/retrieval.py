"""Embedded retrieval: ingestion-time quality filters plus an inverted index.

Content is queried by free terms and hard gates (topic, entities, dialogue
act, discourse relation, kind). Scores are TF-IDF with length-normalized
document term frequencies: for a single-term query the score is a strictly
increasing function of the term's share of the document, which keeps
ranking consistent with term density.
"""

from __future__ import annotations

import concurrent.futures
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

from opendialog.errors import InputError
from opendialog.kg import DiscourseRelation
from opendialog.nlu import DialogueAct, tokenize
from opendialog.resources import iter_jsonl

logger = logging.getLogger(__name__)

CONTENT_KINDS = {
    "fact", "trivia", "joke", "riddle", "would_you_rather", "hypothetical",
    "intimacy_question", "dialogue_turn", "news_headline", "opinion", "story_chunk",
}

# Kinds answered in two turns: pose the question, then react with the agent answer.
SEQUENCE_KINDS = {"riddle", "would_you_rather", "hypothetical"}


@dataclass
class ContentItem:
    id: str
    text: str
    kind: str
    topic: str | None = None
    entities: tuple[str, ...] = ()
    dialogue_act: DialogueAct = DialogueAct.STATEMENT
    discourse_relation: DiscourseRelation | None = None
    intimacy_level: int | None = None
    safe: bool = True
    source: str = ""
    agent_answer: str | None = None  # used by the two-turn sequence kinds

    def __post_init__(self):
        if self.kind not in CONTENT_KINDS:
            raise InputError(f"item {self.id!r}: unknown kind {self.kind!r}")
        if (self.intimacy_level is not None) != (self.kind == "intimacy_question"):
            raise InputError(
                f"item {self.id!r}: intimacy_level present iff kind=intimacy_question")


def parse_item(record: dict) -> ContentItem:
    text = record.get("text", "")
    if not record.get("id") or not isinstance(text, str) or not text.strip():
        raise InputError("record needs non-empty 'id' and 'text'")
    return ContentItem(
        id=record["id"],
        text=text,
        kind=record.get("kind", "fact"),
        topic=record.get("topic"),
        entities=tuple(record.get("entities", [])),
        dialogue_act=DialogueAct(record.get("dialogue_act", "statement")),
        discourse_relation=(DiscourseRelation(record["discourse_relation"])
                            if record.get("discourse_relation") else None),
        intimacy_level=record.get("intimacy_level"),
        safe=record.get("safe", True),
        source=record.get("source", ""),
        agent_answer=record.get("agent_answer"),
    )


@dataclass
class IngestFilters:
    pronouns: set[str]
    temporal: set[str]  # single words and multi-word phrases
    agreement_openers: set[str]  # first-token phrases
    profanity: set[str]
    whitelist_ids: set[str] = field(default_factory=set)

    _WEEKDAYS = ("monday", "tuesday", "wednesday", "thursday", "friday",
                 "saturday", "sunday", "week", "month", "year", "night", "morning",
                 "weekend")

    def rejection_rule(self, item: ContentItem) -> str | None:
        """Name of the first filter the item trips, or None when clean."""
        tokens = tokenize(item.text)
        text = " ".join(tokens)
        if any(tok in self.profanity for tok in tokens):
            return "profanity"
        if item.kind == "dialogue_turn" and item.id in self.whitelist_ids:
            return None
        if any(tok in self.pronouns for tok in tokens):
            return "pronoun"
        for phrase in self.temporal:
            if f" {phrase} " in f" {text} ":
                return "temporal-deixis"
        for anchor in ("last", "this", "next"):
            for unit in self._WEEKDAYS:
                if f" {anchor} {unit} " in f" {text} ":
                    return "temporal-deixis"
        for opener in self.agreement_openers:
            if text == opener or text.startswith(opener + " "):
                return "agreement-opener"
        return None


def ingest(records: Iterable[dict], filters: IngestFilters):
    """Apply the quality filters; returns (accepted items, rejection report).

    The report is a list of ``{"id": ..., "rule": ...}`` entries; malformed
    records are reported with rule ``malformed`` and ingestion continues.
    """
    accepted: list[ContentItem] = []
    report: list[dict] = []
    for index, record in enumerate(records):
        try:
            item = parse_item(record)
        except (InputError, ValueError, TypeError) as exc:
            report.append({"id": record.get("id", f"record-{index}") if isinstance(record, dict)
                           else f"record-{index}",
                           "rule": "malformed", "detail": str(exc)})
            continue
        rule = filters.rejection_rule(item)
        if rule == "profanity":
            item.safe = False
        if rule is not None:
            report.append({"id": item.id, "rule": rule})
        else:
            accepted.append(item)
    return accepted, report


@dataclass
class RetrievalQuery:
    terms: Sequence[str] = ()
    topic: str | None = None
    entities: Sequence[str] = ()
    dialogue_act: DialogueAct | None = None
    discourse_relation: DiscourseRelation | None = None
    kind: str | None = None
    max_results: int = 5

    def __post_init__(self):
        if not (self.terms or self.topic or self.entities):
            raise InputError("query needs at least one of terms/topic/entities")


class ContentIndex:
    """Inverted index over content items; immutable once built."""

    def __init__(self, items: Iterable[ContentItem], stopwords: set[str] | None = None):
        self.stopwords = stopwords or set()
        self.items: dict[str, ContentItem] = {}
        self._postings: dict[str, dict[str, int]] = {}  # term -> item id -> tf
        self._lengths: dict[str, int] = {}
        for item in items:
            if item.id in self.items:
                raise InputError(f"duplicate content item id {item.id!r}")
            self.items[item.id] = item
            terms = self._terms(item.text)
            self._lengths[item.id] = max(1, len(terms))
            for term in terms:
                self._postings.setdefault(term, {}).setdefault(item.id, 0)
                self._postings[term][item.id] += 1

    def _terms(self, text: str) -> list[str]:
        return [t for t in tokenize(text) if t not in self.stopwords]

    def _idf(self, term: str) -> float:
        df = len(self._postings.get(term, {}))
        if df == 0:
            return 0.0
        return math.log(1.0 + len(self.items) / df)

    def _passes_gates(self, item: ContentItem, query: RetrievalQuery) -> bool:
        if not item.safe:
            return False
        if query.topic is not None and item.topic != query.topic:
            return False
        if query.dialogue_act is not None and item.dialogue_act != query.dialogue_act:
            return False
        if query.discourse_relation is not None and item.discourse_relation != query.discourse_relation:
            return False
        if query.kind is not None and item.kind != query.kind:
            return False
        if query.entities and not all(e in item.entities for e in query.entities):
            return False
        return True

    def search(self, query: RetrievalQuery) -> list[tuple[ContentItem, float]]:
        """Ranked (item, score) pairs; gates are exact filters, ties break by id."""
        candidates = [item for item in self.items.values() if self._passes_gates(item, query)]
        terms = [t for t in query.terms if t not in self.stopwords]
        if not terms:
            ranked = sorted(candidates, key=lambda i: i.id)[:query.max_results]
            return [(item, 1.0) for item in ranked]

        counts: dict[str, int] = {}
        for term in terms:
            counts[term] = counts.get(term, 0) + 1
        qnorm = math.sqrt(sum((c * self._idf(t)) ** 2 for t, c in counts.items())) or 1.0

        scored: list[tuple[float, str]] = []
        for item in candidates:
            score = 0.0
            for term, qcount in counts.items():
                tf = self._postings.get(term, {}).get(item.id, 0)
                if tf == 0:
                    continue
                idf = self._idf(term)
                score += (qcount * idf / qnorm) * (idf * tf / self._lengths[item.id])
            if score > 0.0:
                scored.append((score, item.id))
        scored.sort(key=lambda pair: (-pair[0], pair[1]))
        return [(self.items[item_id], score) for score, item_id in scored[:query.max_results]]


class SearchProvider(Protocol):
    name: str

    def answer(self, question: str) -> str | None: ...


@dataclass
class OfflineFactProvider:
    """Default provider: answers from indexed fact items.

    Results are re-ranked by distinct-term coverage before score, so a fact
    matching every question word beats one that merely repeats a common one.
    """

    index: ContentIndex
    content_words: Callable[[str], list[str]]
    name: str = "offline-facts"

    def answer(self, question: str) -> str | None:
        terms = self.content_words(question)
        if not terms:
            return None
        results = self.index.search(RetrievalQuery(terms=terms, kind="fact", max_results=5))
        wanted = set(terms)
        best_key: tuple[int, float] | None = None
        best_item = None
        for item, score in results:
            if score <= 0:
                continue
            key = (len(wanted & set(self.content_words(item.text))), score)
            if best_key is None or key > best_key or (key == best_key and item.id < best_item.id):
                best_key, best_item = key, item
        return best_item.text if best_item else None


def search_provider_cascade(question: str, providers: Sequence[SearchProvider],
                            timeout_ms: float = 1500.0) -> str | None:
    """Query providers in order; first non-empty answer wins.

    A provider exceeding ``timeout_ms`` (or raising) counts as a failure and
    the cascade moves on; a hung provider is abandoned, not joined.
    """
    for provider in providers:
        pool = concurrent.futures.ThreadPoolExecutor(max_workers=1)
        try:
            future = pool.submit(provider.answer, question)
            answer = future.result(timeout=timeout_ms / 1000.0)
        except Exception:
            logger.debug("provider %s failed", getattr(provider, "name", provider), exc_info=True)
            continue
        finally:
            pool.shutdown(wait=False, cancel_futures=True)
        if answer:
            return answer
    return None


def load_pack(path: Path) -> list[ContentItem]:
    """Load a curated JSON-lines content pack (already filtered)."""
    items = []
    for lineno, record in iter_jsonl(path):
        try:
            items.append(parse_item(record))
        except InputError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
    return items
