"""Opinion exchange: provide and justify the agent's opinions, solicit the user's."""

from __future__ import annotations

from opendialog.candidates import (
    CONF_DIRECT, MERGE_NONE, Effect, ResponseCandidate,
)
from opendialog.kg import DiscourseRelation
from opendialog.memory import SessionState
from opendialog.modules import ModuleContext
from opendialog.nlu import AnnotatedUtterance, DialogueAct, Mood

_OPINION_VERBS = ("like", "liked", "love", "loved", "hate", "hated", "enjoy",
                  "enjoyed", "prefer", "adore", "think", "feel", "believe")


def _target_key(ctx: ModuleContext, utterance: AnnotatedUtterance) -> tuple[str, str] | None:
    """(profile key, display name) for the thing under discussion."""
    if utterance.entities:
        mention = utterance.entities[0]
        return mention.entity_id, ctx.graph.name(mention.entity_id)
    for key in sorted(ctx.ltm.opinion_pack):
        if key in utterance.tokens:
            return key, key
    return None


def _opinion_object(ctx: ModuleContext, utterance: AnnotatedUtterance) -> str | None:
    """Words the user's opinion is about, e.g. 'blue' in 'I like blue'."""
    if utterance.entities:
        return ctx.graph.name(utterance.entities[0].entity_id)
    tokens = utterance.tokens
    for i, tok in enumerate(tokens):
        if tok in _OPINION_VERBS:
            rest = ctx.content_words(tokens[i + 1:])
            if rest:
                return " ".join(rest)
    return None


def propose(ctx: ModuleContext, state: SessionState,
            utterance: AnnotatedUtterance, mood: Mood) -> list[ResponseCandidate]:
    intent = utterance.intent

    if intent == "request_opinion":
        target = _target_key(ctx, utterance)
        if target is None:
            return []
        key, name = target
        opinion = state.agent_profile.opinion_for(key)
        if opinion is None:
            text = (f"I don't have a strong opinion about {name} yet. "
                    f"What do you think about it?")
            return [ResponseCandidate(
                text=text, source_module="opinions", confidence=CONF_DIRECT,
                dialogue_act=DialogueAct.OPEN_QUESTION, topic=utterance.topic,
                entities=tuple(utterance.entity_ids), mergeable_role=MERGE_NONE)]
        text = f"{opinion.text} And you? What's your opinion?"
        return [ResponseCandidate(
            text=text, source_module="opinions", confidence=CONF_DIRECT,
            dialogue_act=DialogueAct.PROVIDE_OPINION, topic=utterance.topic,
            entities=tuple(utterance.entity_ids), mergeable_role=MERGE_NONE)]

    if intent == "request_opinion_justify":
        target = _target_key(ctx, utterance)
        if target is None:
            return []
        key, name = target
        opinion = state.agent_profile.opinion_for(key)
        if opinion is None:
            return []
        # A justification is the causal ground of the opinion.
        return [ResponseCandidate(
            text=opinion.justification, source_module="opinions", confidence=CONF_DIRECT,
            dialogue_act=DialogueAct.STATEMENT,
            discourse_relation=DiscourseRelation.CONTINGENCY,
            topic=utterance.topic, entities=tuple(utterance.entity_ids))]

    if intent == "provide_opinion" or utterance.dialogue_act == DialogueAct.PROVIDE_OPINION:
        about = _opinion_object(ctx, utterance)
        if about is None:
            return []
        # "I feel terrible" is a mood report, not an opinion about a thing;
        # leave it to the wellbeing module.
        if all(word in ctx.sentiment_words for word in about.split()):
            return []
        if utterance.sentiment > 0:
            polarity = "positively"
        elif utterance.sentiment < 0:
            polarity = "negatively"
        else:
            polarity = "that way"
        text = f"Why do you feel {polarity} about {about}?"
        return [ResponseCandidate(
            text=text, source_module="opinions", confidence=CONF_DIRECT,
            dialogue_act=DialogueAct.OPEN_QUESTION,
            discourse_relation=DiscourseRelation.CONTINGENCY,
            topic=utterance.topic, entities=tuple(utterance.entity_ids),
            effects=[Effect("remember_interest", {"topic": utterance.topic})])]

    return []
