"""Surface realization: acknowledgement hedges, response merging, SSML emission."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from pathlib import Path

from opendialog.candidates import (
    MERGE_QUESTION, MERGE_STATEMENT, ResponseCandidate,
)
from opendialog.errors import EngineError, LoadError
from opendialog.nlu import AnnotatedUtterance
from opendialog.ranker import RankedPool
from opendialog.resources import load_json

SSML_WHITELIST = ("break", "emphasis", "say-as", "prosody")

# Inline marker syntax embedded by modules:
#   [[pause:500ms]]  [[emph:really]]  [[sayas:characters:NASA]]
#   [[prosody:rate=slow:spoken text]]
_MARKER_RE = re.compile(r"\[\[([a-z]+)(?::([^\]]*))?\]\]")


@dataclass(frozen=True)
class HedgeRule:
    trigger_intent: str | None
    trigger_keywords: tuple[str, ...]
    hedges: tuple[str, ...]

    def matches(self, utterance: AnnotatedUtterance) -> bool:
        if self.trigger_intent and utterance.intent == self.trigger_intent:
            return True
        text = " ".join(utterance.tokens)
        return any(kw in text for kw in self.trigger_keywords)


def load_hedge_rules(path: Path) -> list[HedgeRule]:
    rules = []
    for record in load_json(path):
        try:
            rule = HedgeRule(
                trigger_intent=record.get("intent"),
                trigger_keywords=tuple(record.get("keywords", [])),
                hedges=tuple(record["hedges"]),
            )
        except KeyError as exc:
            raise LoadError(f"{path.name}: bad hedge rule {record!r}") from exc
        for hedge in rule.hedges:
            if not hedge or hedge[-1] not in ",.!":
                raise LoadError(
                    f"{path.name}: hedge {hedge!r} must end with connective punctuation")
        rules.append(rule)
    return rules


def apply_hedge(text: str, utterance: AnnotatedUtterance,
                rules: list[HedgeRule], rng: random.Random) -> tuple[str, int | None]:
    """Prepend the first matching rule's hedge (one per reply, never more)."""
    for index, rule in enumerate(rules):
        if rule.matches(utterance):
            hedge = rng.choice(rule.hedges)
            return f"{hedge} {text}", index
    return text, None


def merge(winner: ResponseCandidate, pool: RankedPool,
          partner_min_confidence: float = 0.6) -> tuple[str, str | None]:
    """Statement winners pick up the best on-topic question from the pool.

    Returns (merged text, partner prompt id or None). Ending on a question
    keeps control of the conversation, so the question always goes last.
    """
    if winner.mergeable_role != MERGE_STATEMENT:
        return winner.text, None
    partners = [
        s for s in pool.scored
        if not s.invalidated
        and s.candidate is not winner
        and s.candidate.mergeable_role == MERGE_QUESTION
        and s.final >= partner_min_confidence
        and _shares_ground(winner, s.candidate)
    ]
    if not partners:
        return winner.text, None
    best = max(partners, key=lambda s: (s.final, s.candidate.prompt_id))
    return f"{winner.text} {best.candidate.text}", best.candidate.prompt_id


def _shares_ground(a: ResponseCandidate, b: ResponseCandidate) -> bool:
    if set(a.entities) & set(b.entities):
        return True
    return a.topic is not None and a.topic == b.topic


def emit_ssml(text: str) -> tuple[str, str]:
    """Compile inline markers; returns (display_text, ssml_text).

    Unknown markers raise, naming the marker. The SSML output uses only the
    whitelisted tag subset and always carries the root speak element.
    """
    display_parts: list[str] = []
    ssml_parts: list[str] = []
    pos = 0
    for match in _MARKER_RE.finditer(text):
        literal = text[pos:match.start()]
        display_parts.append(literal)
        ssml_parts.append(_escape(literal))
        name, arg = match.group(1), match.group(2)
        if name == "pause":
            if not arg:
                raise EngineError("marker [[pause]] needs a duration")
            ssml_parts.append(f'<break time="{arg}"/>')
        elif name == "emph":
            if not arg:
                raise EngineError("marker [[emph]] needs text")
            display_parts.append(arg)
            ssml_parts.append(f"<emphasis>{_escape(arg)}</emphasis>")
        elif name == "sayas":
            try:
                interpret, spoken = arg.split(":", 1)
            except (AttributeError, ValueError):
                raise EngineError("marker [[sayas]] needs interpret-as and text") from None
            display_parts.append(spoken)
            ssml_parts.append(f'<say-as interpret-as="{interpret}">{_escape(spoken)}</say-as>')
        elif name == "prosody":
            try:
                attr_val, spoken = arg.split(":", 1)
                attr, value = attr_val.split("=", 1)
            except (AttributeError, ValueError):
                raise EngineError("marker [[prosody]] needs attr=value and text") from None
            display_parts.append(spoken)
            ssml_parts.append(f'<prosody {attr}="{value}">{_escape(spoken)}</prosody>')
        else:
            raise EngineError(f"unknown SSML marker [[{name}]]")
        pos = match.end()
    display_parts.append(text[pos:])
    ssml_parts.append(_escape(text[pos:]))

    display = _collapse("".join(display_parts))
    ssml = "<speak>" + re.sub(r"\s+", " ", "".join(ssml_parts)).strip() + "</speak>"
    return display, ssml


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _collapse(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def strip_tags(ssml: str) -> str:
    """Inverse check used by tests: tags removed, whitespace collapsed."""
    text = re.sub(r"<[^>]+>", "", ssml)
    text = text.replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")
    return _collapse(text)


@dataclass
class FinalReply:
    display_text: str
    ssml_text: str
    winner_prompt_id: str
    merged_prompt_id: str | None = None
    hedge_rule: int | None = None
