"""Question answering: ELIZA probe, structured module data, then the provider cascade."""

from __future__ import annotations

import re

from opendialog.candidates import (
    CONF_DIRECT, MERGE_STATEMENT, ResponseCandidate,
)
from opendialog.memory import SessionState, resolve_focus
from opendialog.modules import ModuleContext
from opendialog.modules.recursive import SEQUENCE_TRIGGERS
from opendialog.nlu import AnnotatedUtterance, DialogueAct, Mood
from opendialog.retrieval import search_provider_cascade

# Intents owned by other responders; qa stays quiet on them even for questions.
_CLAIMED_INTENTS = {
    "request_opinion", "request_opinion_justify", "request_discuss_topic",
    "request_exit", "request_change_topic", "request_service",
    "request_confirm_understanding", "assertion_on_bot", "kidding_check", "thanks",
}


def _is_question(utterance: AnnotatedUtterance) -> bool:
    return (utterance.dialogue_act.is_question()
            or utterance.intent == "question_factual"
            or utterance.raw_text.rstrip().endswith("?"))


def _story_answer(ctx: ModuleContext, state: SessionState,
                  utterance: AnnotatedUtterance) -> str | None:
    story_id = state.state_vars.get("story_active")
    if state.active_module != "storytelling" or not story_id:
        return None
    story = ctx.ltm.stories.get(story_id)
    if story is None:
        return None
    text = " ".join(utterance.tokens)
    for pattern, answer in story.qa_pairs.items():
        if re.search(pattern, text):
            return answer
    return None


def propose(ctx: ModuleContext, state: SessionState,
            utterance: AnnotatedUtterance, mood: Mood) -> list[ResponseCandidate]:
    if not _is_question(utterance) or utterance.intent in _CLAIMED_INTENTS:
        return []
    # Game/sequence phrasing ("would you rather...", "ask me a riddle") is a
    # content request owned by the recursive module, not a factual question.
    text = " ".join(utterance.tokens)
    if any(phrase in text for phrase in SEQUENCE_TRIGGERS):
        return []

    def candidate(text: str, act: DialogueAct, **kwargs) -> list[ResponseCandidate]:
        return [ResponseCandidate(text=text, source_module="qa", confidence=CONF_DIRECT,
                                  dialogue_act=act, topic=utterance.topic,
                                  entities=tuple(utterance.entity_ids), **kwargs)]

    # Step 1: too little content to detect what is being asked. Questions
    # aimed at the agent, or with no focus referent to resolve, get a
    # reflected probe instead of a search.
    content = ctx.content_words(utterance.tokens)
    focus = resolve_focus(state, utterance)
    bot_directed = "you" in utterance.tokens or "your" in utterance.tokens
    if len(content) < ctx.qa_min_content_words and (bot_directed or focus is None):
        probe = ctx.eliza.probe(utterance.raw_text, state.rng)
        return candidate(probe, DialogueAct.OPEN_QUESTION)

    # Step 2: an active module with structured answers gets first refusal.
    structured = _story_answer(ctx, state, utterance)
    if structured is not None:
        return candidate(structured, DialogueAct.STATEMENT)

    # Step 3: coreference disambiguation, then the search cascade.
    question = utterance.raw_text
    entities = list(utterance.entity_ids)
    if focus is not None:
        question = f"{question} {ctx.graph.name(focus)}"
        entities.append(focus)
    answer = search_provider_cascade(question, ctx.providers, ctx.provider_timeout_ms)
    if answer is not None:
        return [ResponseCandidate(
            text=answer, source_module="qa", confidence=CONF_DIRECT,
            dialogue_act=DialogueAct.STATEMENT, topic=utterance.topic,
            entities=tuple(entities), mergeable_role=MERGE_STATEMENT)]

    text = (f"{ctx.inability_phrase} about that one, I'm afraid. "
            f"I don't have a good answer right now.")
    return candidate(text, DialogueAct.STATEMENT)
