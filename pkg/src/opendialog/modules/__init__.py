"""Candidate-producing dialogue modules.

Each module maps (session state, annotated utterance) to zero or more
response candidates. Modules own no mutable state: anything a winning
candidate should change is declared as an :class:`~opendialog.candidates.Effect`
and applied by the engine after ranking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from opendialog.candidates import ResponseCandidate
from opendialog.eliza import Eliza
from opendialog.errors import InputError
from opendialog.kg import KnowledgeGraph
from opendialog.memory import LongTermStore, SessionState
from opendialog.nlu import AnnotatedUtterance, Mood
from opendialog.retrieval import ContentIndex, SearchProvider


@dataclass
class ModuleContext:
    """Shared read-only resources handed to every module."""

    graph: KnowledgeGraph
    index: ContentIndex
    ltm: LongTermStore
    eliza: Eliza
    stopwords: set[str]
    sentiment_words: set[str] = frozenset()
    providers: Sequence[SearchProvider] = ()
    provider_timeout_ms: float = 1500.0
    qa_min_content_words: int = 2
    ood_menu_streak: int = 2  # consecutive fallbacks before the menu re-offer
    inability_phrase: str = "I'm not sure"
    # Engine-supplied helpers: suggest an unexplored flow, render the topic menu.
    topic_suggester: Callable[[SessionState], tuple[str, str] | None] = lambda s: None
    menu_builder: Callable[[SessionState], str] = lambda s: "What would you like to talk about?"

    def content_words(self, text_tokens: Sequence[str]) -> list[str]:
        return [t for t in text_tokens if t not in self.stopwords]


from opendialog.modules import (  # noqa: E402  (modules need ModuleContext)
    intimacy, indexed, ood, opinions, qa, recommend, recursive, social, stories, wellbeing,
)

# Proposal order is fixed for determinism; ood is invoked by the engine last
# so it can see whether an entity went unhandled.
MODULE_PROPOSERS: dict[str, Callable] = {
    "opinions": opinions.propose,
    "qa": qa.propose,
    "wellbeing": wellbeing.propose,
    "intimacy": intimacy.propose,
    "storytelling": stories.propose,
    "recommendation": recommend.propose,
    "recursive": recursive.propose,
    "retrieval": indexed.propose,
    "social": social.propose,
}


def propose(module_id: str, ctx: ModuleContext, state: SessionState,
            utterance: AnnotatedUtterance, mood: Mood) -> list[ResponseCandidate]:
    """Run one module; internal failures yield an empty sequence plus a log entry."""
    import logging

    if module_id not in MODULE_PROPOSERS:
        raise InputError(f"unknown dialogue module {module_id!r}")
    try:
        return MODULE_PROPOSERS[module_id](ctx, state, utterance, mood)
    except Exception:
        logging.getLogger(__name__).warning(
            "module %s failed on turn; dropped from pool", module_id, exc_info=True)
        return []
