"""Mood-conditioned strategy shifts: suggestions, apologies, uplift offers."""

from __future__ import annotations

from opendialog.candidates import (
    CONF_CONTINUATION, CONF_DIRECT, Effect, ResponseCandidate,
)
from opendialog.memory import SessionState
from opendialog.modules import ModuleContext
from opendialog.nlu import AnnotatedUtterance, DialogueAct, Mood
from opendialog.retrieval import RetrievalQuery


def propose(ctx: ModuleContext, state: SessionState,
            utterance: AnnotatedUtterance, mood: Mood) -> list[ResponseCandidate]:
    explored = Effect("mark_module_explored", {"module": "wellbeing"})

    # Second leg of the uplift offer: the user accepted a joke.
    if state.state_vars.get("joke_offered") and utterance.intent == "affirm":
        jokes = ctx.index.search(RetrievalQuery(topic="jokes", kind="joke", max_results=10))
        fresh = [item for item, _ in jokes
                 if f"wellbeing:{item.id}" not in state.surfaced_prompts]
        if fresh:
            item = fresh[0]
            return [ResponseCandidate(
                text=f"{item.text} Hope that got a smile out of you.",
                source_module="wellbeing", confidence=CONF_DIRECT,
                dialogue_act=DialogueAct.STATEMENT, prompt_id=f"wellbeing:{item.id}",
                effects=[Effect("clear_state_var", {"name": "joke_offered"}), explored])]

    if mood is Mood.BORED:
        # Direct suggestion, deliberately not a question.
        suggestion = ctx.topic_suggester(state)
        topic = suggestion[1] if suggestion else "something new"
        text = (f"Let me make a suggestion then. I can tell you a story, "
                f"or we can dig into {topic}. Just say the word.")
        return [ResponseCandidate(
            text=text, source_module="wellbeing", confidence=CONF_DIRECT,
            dialogue_act=DialogueAct.STATEMENT,
            effects=[explored] + ([Effect("standing_offer", {"flow_id": suggestion[0]})]
                                  if suggestion else []))]

    if mood in (Mood.OFFENDED, Mood.HOSTILE):
        text = ("I'm sorry, I didn't mean to upset you. "
                "Let's move to something else. I know a few good stories and fun facts.")
        return [ResponseCandidate(
            text=text, source_module="wellbeing", confidence=CONF_DIRECT,
            dialogue_act=DialogueAct.STATEMENT,
            effects=[explored, Effect("suppress_intimacy", {})])]

    if mood is Mood.NEGATIVE:
        text = "I'm sorry to hear that. Would a joke help lighten the mood?"
        return [ResponseCandidate(
            text=text, source_module="wellbeing", confidence=CONF_CONTINUATION,
            dialogue_act=DialogueAct.YES_NO_QUESTION,
            effects=[Effect("set_state_var", {"name": "joke_offered", "value": True}),
                     explored])]

    if mood is Mood.POSITIVE:
        # Yield initiative: a low-confidence acknowledgement that user-driven
        # modules will always outrank.
        return [ResponseCandidate(
            text="Glad to hear it!", source_module="wellbeing", confidence=0.3,
            dialogue_act=DialogueAct.STATEMENT)]

    return []
