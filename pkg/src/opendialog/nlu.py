"""Turn understanding: ASR filtering, tokenization, and rule-based classifiers.

The pipeline turns raw turn input into an :class:`AnnotatedUtterance`. All
annotators are deterministic functions of the utterance plus the loaded
resources; nothing here reads or writes conversation state, so a single
:class:`Annotator` can serve every session concurrently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

from opendialog.errors import InputError, LoadError
from opendialog.resources import load_json, load_sentiment_lexicon, load_wordlist

if TYPE_CHECKING:
    from opendialog.kg import KnowledgeGraph

_TOKEN_RE = re.compile(r"[a-z0-9']+")

# Pronouns treated as referential by the focus stack; third-person only.
THIRD_PERSON_PRONOUNS = {
    "it", "its", "it's", "he", "him", "his", "she", "her", "hers",
    "they", "them", "their", "theirs", "this", "that", "these", "those",
}

_NEGATORS = {"not", "no", "never", "don't", "dont", "doesn't", "didn't", "can't",
             "cannot", "isn't", "wasn't", "aren't", "won't", "wouldn't", "hardly"}

_WH_WORDS = {"what", "who", "whom", "whose", "where", "when", "why", "how", "which"}
_AUX_WORDS = {"do", "does", "did", "is", "are", "was", "were", "am", "can", "could",
              "will", "would", "shall", "should", "may", "might", "have", "has", "had"}
_GREETINGS = {"hello", "hi", "hey", "greetings", "howdy"}
_IMPERATIVE_VERBS = {"tell", "play", "give", "show", "say", "talk", "ask", "read",
                     "sing", "stop", "repeat", "name", "describe", "recommend"}
_OPINION_VERBS = {"like", "likes", "liked", "love", "loves", "loved", "hate", "hates",
                  "hated", "enjoy", "enjoys", "enjoyed", "think", "believe", "feel",
                  "prefer", "adore", "dislike"}

ASR_ACCEPTED = "accepted"
ASR_NEEDS_CLARIFICATION = "needs_clarification"


class DialogueAct(str, Enum):
    YES_NO_QUESTION = "yes_no_question"
    OPEN_QUESTION = "open_question"
    STATEMENT = "statement"
    PROVIDE_OPINION = "provide_opinion"
    COMMAND = "command"
    GREETING = "greeting"
    OTHER = "other"

    def is_question(self) -> bool:
        return self in (DialogueAct.YES_NO_QUESTION, DialogueAct.OPEN_QUESTION)


class Mood(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"
    BORED = "bored"
    OFFENDED = "offended"
    HOSTILE = "hostile"


@dataclass(frozen=True)
class AsrHypothesis:
    text: str
    score: float

    def __post_init__(self):
        if not self.text.strip():
            raise InputError("ASR hypothesis text is empty")
        if not 0.0 <= self.score <= 1.0:
            raise InputError(f"ASR hypothesis score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class EntityMention:
    surface: str
    entity_id: str
    span: tuple[int, int]  # [start, end) token indices
    salience: float


@dataclass
class AnnotatedUtterance:
    raw_text: str
    tokens: list[str]
    content_words: list[str]
    intent: str
    dialogue_act: DialogueAct
    entities: list[EntityMention]
    sentiment: float
    topic: str | None
    profane: bool
    asr_status: str = ASR_ACCEPTED
    asr_hypotheses: list[AsrHypothesis] = field(default_factory=list)

    @property
    def entity_ids(self) -> list[str]:
        return [m.entity_id for m in self.entities]

    def has_third_person_pronoun(self) -> bool:
        return any(t in THIRD_PERSON_PRONOUNS for t in self.tokens)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def preprocess_asr(hypotheses: Sequence[AsrHypothesis], threshold: float):
    """Gate on the mean hypothesis score (inclusive boundary).

    Returns ``(ASR_ACCEPTED, best_text)`` or
    ``(ASR_NEEDS_CLARIFICATION, list_of_hypotheses)``; the full list is kept
    so a later turn can still make use of every interpretation.
    """
    if not hypotheses:
        raise InputError("empty ASR hypothesis list")
    if not 0.0 <= threshold <= 1.0:
        raise InputError(f"ASR threshold {threshold} outside [0, 1]")
    mean = sum(h.score for h in hypotheses) / len(hypotheses)
    if mean >= threshold:
        best = max(hypotheses, key=lambda h: h.score)
        return ASR_ACCEPTED, best.text
    return ASR_NEEDS_CLARIFICATION, list(hypotheses)


def check_profanity(text: str, lexicon: set[str]) -> bool:
    """True iff any token of ``text`` is in the profanity lexicon."""
    return any(tok in lexicon for tok in tokenize(text))


@dataclass(frozen=True)
class IntentRule:
    label: str
    patterns: tuple[re.Pattern, ...]


class IntentClassifier:
    """Ordered keyword/pattern rules; the first matching rule's label wins.

    The rule file defines the intent inventory. Classification is context
    free: only the tokens of the single utterance are consulted.
    """

    def __init__(self, rules: list[IntentRule], inventory: set[str]):
        self.rules = rules
        self.inventory = inventory

    @classmethod
    def from_file(cls, path: Path) -> "IntentClassifier":
        raw = load_json(path)
        rules = []
        inventory = {"unknown"}
        for record in raw:
            try:
                label = record["label"]
                patterns = tuple(re.compile(p) for p in record["patterns"])
            except (KeyError, TypeError, re.error) as exc:
                raise LoadError(f"{path.name}: bad intent rule {record!r}: {exc}") from exc
            rules.append(IntentRule(label, patterns))
            inventory.add(label)
        if len(inventory) - 1 < 8:
            raise LoadError(f"{path.name}: intent inventory must hold at least 8 labels")
        return cls(rules, inventory)

    def classify(self, tokens: Sequence[str]) -> str:
        if not tokens:
            raise InputError("cannot classify an empty token sequence")
        text = " ".join(tokens)
        for rule in self.rules:
            if any(p.search(text) for p in rule.patterns):
                return rule.label
        return "unknown"


def detect_entities(tokens: Sequence[str], graph: "KnowledgeGraph") -> list[EntityMention]:
    """Longest-match, left-to-right gazetteer lookup over names and aliases."""
    mentions: list[EntityMention] = []
    n = len(tokens)
    i = 0
    max_len = graph.gazetteer_max_len
    while i < n:
        match = None
        for end in range(min(n, i + max_len), i, -1):
            phrase = " ".join(tokens[i:end])
            entity_id = graph.gazetteer.get(phrase)
            if entity_id is not None:
                match = (entity_id, end)
                break
        if match:
            entity_id, end = match
            mentions.append(EntityMention(
                surface=" ".join(tokens[i:end]),
                entity_id=entity_id,
                span=(i, end),
                salience=min(1.0, (end - i) / max(1, n)),
            ))
            i = end
        else:
            i += 1
    return mentions


def score_sentiment(tokens: Sequence[str], lexicon: dict[str, float]) -> float:
    """Mean signed lexicon score; a negator within the 3 preceding tokens flips the sign."""
    total = 0.0
    hits = 0
    for idx, tok in enumerate(tokens):
        score = lexicon.get(tok)
        if score is None:
            continue
        window = tokens[max(0, idx - 3):idx]
        if any(w in _NEGATORS for w in window):
            score = -score
        total += score
        hits += 1
    if hits == 0:
        return 0.0
    return max(-1.0, min(1.0, total / hits))


def classify_dialogue_act(tokens: Sequence[str], raw_text: str) -> DialogueAct:
    if not tokens:
        return DialogueAct.OTHER
    first = tokens[0]
    if first in _GREETINGS:
        return DialogueAct.GREETING
    if first in _WH_WORDS:
        return DialogueAct.OPEN_QUESTION
    if first in _AUX_WORDS:
        return DialogueAct.YES_NO_QUESTION
    if first in ("i", "we") and any(t in _OPINION_VERBS for t in tokens[1:4]):
        return DialogueAct.PROVIDE_OPINION
    if first in ("my",) and "favorite" in tokens[:3]:
        return DialogueAct.PROVIDE_OPINION
    if first in _IMPERATIVE_VERBS or (first == "let's"):
        return DialogueAct.COMMAND
    if raw_text.rstrip().endswith("?"):
        return DialogueAct.YES_NO_QUESTION
    return DialogueAct.STATEMENT


class TopicClassifier:
    """Keyword lookup over the loaded flow topics."""

    def __init__(self, topic_keywords: dict[str, list[str]]):
        # phrase -> topic, longest phrases matched first
        self._phrases: list[tuple[str, str]] = []
        for topic, keywords in sorted(topic_keywords.items()):
            for kw in keywords:
                self._phrases.append((kw.lower(), topic))
        self._phrases.sort(key=lambda p: (-len(p[0]), p[0]))

    def classify(self, tokens: Sequence[str]) -> str | None:
        text = " ".join(tokens)
        for phrase, topic in self._phrases:
            if re.search(rf"\b{re.escape(phrase)}\b", text):
                return topic
        return None


def classify_mood(utterance: AnnotatedUtterance, recent_history: Sequence[str]) -> Mood:
    """Rule cascade over profanity, keywords, repetition and sentiment."""
    if utterance.profane:
        return Mood.HOSTILE
    text = " ".join(utterance.tokens)
    if "say sorry" in text or "apologize" in text or "apologise" in text:
        return Mood.OFFENDED
    dont_knows = sum(1 for h in recent_history if "i don't know" in " ".join(tokenize(h)))
    if "bored" in utterance.tokens or "boring" in utterance.tokens or dont_knows >= 2:
        return Mood.BORED
    if utterance.sentiment < -0.25:
        return Mood.NEGATIVE
    if utterance.sentiment > 0.25:
        return Mood.POSITIVE
    return Mood.NEUTRAL


@dataclass
class NluResources:
    profanity: set[str]
    sentiment: dict[str, float]
    stopwords: set[str]
    intents: IntentClassifier

    @classmethod
    def load(cls, lexicon_dir: Path, intent_rules_path: Path) -> "NluResources":
        return cls(
            profanity=load_wordlist(lexicon_dir / "profanity.txt"),
            sentiment=load_sentiment_lexicon(lexicon_dir / "sentiment.tsv"),
            stopwords=load_wordlist(lexicon_dir / "stopwords.txt"),
            intents=IntentClassifier.from_file(intent_rules_path),
        )


class Annotator:
    """Composes the classifier pipeline into ``annotate``.

    Immutable after construction; safe to share across sessions.
    """

    def __init__(self, resources: NluResources, graph: "KnowledgeGraph",
                 topics: TopicClassifier, asr_threshold: float = 0.45):
        self.resources = resources
        self.graph = graph
        self.topics = topics
        self.asr_threshold = asr_threshold

    def content_words(self, tokens: Sequence[str]) -> list[str]:
        return [t for t in tokens if t not in self.resources.stopwords]

    def annotate(self, text: str | None = None,
                 hypotheses: Sequence[AsrHypothesis] | None = None) -> AnnotatedUtterance:
        """Run the full pipeline on one turn of input.

        ``hypotheses`` (when given) pass through the ASR filter first; a
        below-threshold mean short-circuits the pipeline with neutral
        defaults and ``asr_status = needs_clarification``.
        """
        kept_hypotheses: list[AsrHypothesis] = list(hypotheses or [])
        if hypotheses:
            status, result = preprocess_asr(hypotheses, self.asr_threshold)
            if status == ASR_NEEDS_CLARIFICATION:
                return AnnotatedUtterance(
                    raw_text="", tokens=[], content_words=[], intent="unknown",
                    dialogue_act=DialogueAct.OTHER, entities=[], sentiment=0.0,
                    topic=None, profane=False,
                    asr_status=ASR_NEEDS_CLARIFICATION, asr_hypotheses=kept_hypotheses,
                )
            text = result
        if text is None or not text.strip():
            raise InputError("empty turn input")

        tokens = tokenize(text)
        if not tokens:
            raise InputError("turn input holds no tokens")
        content = self.content_words(tokens)
        return AnnotatedUtterance(
            raw_text=text,
            tokens=tokens,
            content_words=content,
            intent=self.resources.intents.classify(tokens),
            dialogue_act=classify_dialogue_act(tokens, text),
            entities=detect_entities(tokens, self.graph),
            sentiment=score_sentiment(tokens, self.resources.sentiment),
            topic=self.topics.classify(tokens),
            profane=check_profanity(text, self.resources.profanity),
            asr_hypotheses=kept_hypotheses,
        )
