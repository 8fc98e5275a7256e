"""Intimacy questions: level-gated personal questions with a two-turn reaction."""

from __future__ import annotations

from opendialog.candidates import (
    CONF_CONTINUATION, CONF_DIRECT, Effect, ResponseCandidate,
)
from opendialog.memory import SessionState
from opendialog.modules import ModuleContext
from opendialog.nlu import AnnotatedUtterance, DialogueAct, Mood
from opendialog.retrieval import ContentItem, RetrievalQuery

_TRIGGERS = ("ask me something", "ask me a question", "get to know me",
             "personal question")


def next_question(ctx: ModuleContext, state: SessionState,
                  mood: Mood = Mood.NEUTRAL) -> ContentItem | None:
    """Lowest-level unexplored question within the user's current allowance.

    Suppressed entirely for offended or hostile users; personal questions are
    exactly what they react badly to.
    """
    if mood in (Mood.OFFENDED, Mood.HOSTILE) or state.state_vars.get("intimacy_suppressed"):
        return None
    allowance = state.user_profile.intimacy_allowance
    results = ctx.index.search(RetrievalQuery(topic="personal", kind="intimacy_question",
                                              max_results=100))
    eligible = [item for item, _ in results
                if (item.intimacy_level or 1) <= allowance
                and f"intimacy:{item.id}" not in state.surfaced_prompts]
    eligible.sort(key=lambda i: (i.intimacy_level or 1, i.id))
    return eligible[0] if eligible else None


def _question_candidate(item: ContentItem, confidence: float) -> ResponseCandidate:
    return ResponseCandidate(
        text=item.text, source_module="intimacy", confidence=confidence,
        dialogue_act=item.dialogue_act, prompt_id=f"intimacy:{item.id}",
        effects=[
            Effect("set_active", {"module": "intimacy"}),
            Effect("set_state_var", {"name": "intimacy_pending", "value": item.id}),
        ])


def propose(ctx: ModuleContext, state: SessionState,
            utterance: AnnotatedUtterance, mood: Mood) -> list[ResponseCandidate]:
    if mood in (Mood.OFFENDED, Mood.HOSTILE):
        return []

    pending = state.state_vars.get("intimacy_pending")
    if state.active_module == "intimacy" and pending:
        item = ctx.ltm.items.get(pending)
        if item is None:
            return []
        if utterance.dialogue_act.is_question():
            return []  # qa handles questions
        answer = item.agent_answer or "I'd have to think about that one myself."
        text = (f"I see, for me personally you might ask? {answer} "
                f"Would you be okay answering another question?")
        return [ResponseCandidate(
            text=text, source_module="intimacy", confidence=CONF_CONTINUATION,
            dialogue_act=DialogueAct.YES_NO_QUESTION,
            prompt_id=f"intimacy:{item.id}:react",
            effects=[
                Effect("clear_state_var", {"name": "intimacy_pending"}),
                Effect("set_state_var", {"name": "intimacy_reoffer", "value": True}),
            ])]

    if state.active_module == "intimacy" and state.state_vars.get("intimacy_reoffer"):
        if utterance.intent == "affirm":
            item = next_question(ctx, state, mood)
            if item is None:
                return [ResponseCandidate(
                    text="That's all my questions for now. Thanks for humoring me.",
                    source_module="intimacy", confidence=CONF_CONTINUATION,
                    dialogue_act=DialogueAct.STATEMENT,
                    effects=[Effect("release_module", {"module": "intimacy"}),
                             Effect("clear_state_var", {"name": "intimacy_reoffer"})])]
            candidate = _question_candidate(item, CONF_CONTINUATION)
            candidate.effects.append(Effect("clear_state_var", {"name": "intimacy_reoffer"}))
            return [candidate]
        if utterance.intent in ("deny", "request_change_topic"):
            suggestion = ctx.topic_suggester(state)
            if suggestion:
                flow_id, topic = suggestion
                text = f"Okay, are you interested at all in {topic}?"
                effects = [Effect("release_module", {"module": "intimacy"}),
                           Effect("clear_state_var", {"name": "intimacy_reoffer"}),
                           Effect("standing_offer", {"flow_id": flow_id})]
            else:
                text = "Okay, no problem."
                effects = [Effect("release_module", {"module": "intimacy"}),
                           Effect("clear_state_var", {"name": "intimacy_reoffer"})]
            return [ResponseCandidate(
                text=text, source_module="intimacy", confidence=CONF_CONTINUATION,
                dialogue_act=DialogueAct.YES_NO_QUESTION if suggestion else DialogueAct.STATEMENT,
                effects=effects)]
        return []

    text = " ".join(utterance.tokens)
    if any(trigger in text for trigger in _TRIGGERS):
        item = next_question(ctx, state, mood)
        if item is not None:
            return [_question_candidate(item, CONF_DIRECT)]
    return []
