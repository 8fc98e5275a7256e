"""The ResponseCandidate type shared by dialogue modules, ranker and service."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any

from opendialog.kg import DiscourseRelation
from opendialog.nlu import DialogueAct

# Sources whose long candidates attract the length penalty: free-text and
# indexed content where phrasing is not under our control. Modules that hold
# initiative with curated turns (stories, sequences, intimacy reactions) are
# exempt.
MIXED_INITIATIVE_MODULES = {
    "opinions", "qa", "wellbeing", "retrieval", "out_of_domain", "social",
}

MERGE_STATEMENT = "statement"
MERGE_QUESTION = "question"
MERGE_NONE = "none"

# Base confidences: direct triggers always beat topical matches, which in
# turn beat the out-of-domain fallback; continuations keep an active module
# above the out-of-domain gate.
CONF_DIRECT = 1.0
CONF_CONTINUATION = 0.9
CONF_TOPICAL = 0.6
CONF_FALLBACK = 0.5


def stable_prompt_id(module: str, content: str) -> str:
    """Prompt id stable across sessions for identical content."""
    digest = hashlib.sha1(content.encode("utf-8")).hexdigest()[:10]
    return f"{module}:{digest}"


@dataclass
class Effect:
    """A state change applied only if the owning candidate wins the turn."""

    kind: str
    payload: dict[str, Any] = field(default_factory=dict)


@dataclass
class ResponseCandidate:
    text: str
    source_module: str
    confidence: float
    dialogue_act: DialogueAct
    discourse_relation: DiscourseRelation | None = None
    topic: str | None = None
    topic_keywords: tuple[str, ...] = ()  # phrases that count as a direct trigger
    entities: tuple[str, ...] = ()
    prompt_id: str = ""
    priority: bool = False
    mergeable_role: str = MERGE_NONE
    profane: bool = False
    # Set when another module acts on this one's behalf (flow delegation):
    # coherence is judged against the delegator, not the producer.
    initiative_module: str | None = None
    effects: list[Effect] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if not self.prompt_id:
            self.prompt_id = stable_prompt_id(self.source_module, self.text)
