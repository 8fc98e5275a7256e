"""Graph-walk recommendations: comparison and expansion over the focus entity."""

from __future__ import annotations

from opendialog.candidates import (
    CONF_CONTINUATION, Effect, ResponseCandidate,
)
from opendialog.kg import (
    DiscourseRelation, KnowledgeGraph, RelationInstantiation, instantiate_relation,
)
from opendialog.memory import SessionState
from opendialog.modules import ModuleContext
from opendialog.nlu import AnnotatedUtterance, DialogueAct, Mood

_PLACE_TYPES = {"city", "poi", "museum", "place", "country"}


def _render_comparison(graph: KnowledgeGraph, inst: RelationInstantiation) -> tuple[str, tuple[str, ...]]:
    """Question text plus the entity ids it grounds in."""
    result_name = graph.name(inst.result)
    first = inst.path[0]
    if first.rel in ("located_in", "instance_of"):
        return (f"Are you also going to check out {result_name}?",
                (inst.result, first.dst))
    # Attribute sibling: the shared value (the artist, the genre) carries the question.
    shared = first.dst
    shared_name = graph.name(shared)
    result_type = graph.primary_type(inst.result) or "thing"
    if graph.primary_type(shared) in ("artist", "person", "author", "director"):
        question = f"Are you a fan of any other {result_type} by {shared_name}?"
    else:
        question = f"Are you a fan of any other {shared_name} {result_type}?"
    return (f"{question} {result_name} comes to mind.", (inst.result, shared))


def _render_expansion(graph: KnowledgeGraph, inst: RelationInstantiation) -> tuple[str, tuple[str, ...]]:
    result_name = graph.name(inst.result)
    rel = inst.path[0].rel
    if rel == "artwork":
        text = (f"Well, I would think about it. {result_name} is there "
                f"and that could be worth seeing.")
    else:
        focus_name = graph.name(inst.focus)
        text = f"Speaking of {focus_name}, there is also {result_name}. It could be worth a look."
    return text, (inst.result,)


# Intents where the user wants content or an opinion, not a graph walk.
_CLAIMED_INTENTS = {
    "request_discuss_topic", "request_opinion", "request_opinion_justify",
    "question_factual",
}


def propose(ctx: ModuleContext, state: SessionState,
            utterance: AnnotatedUtterance, mood: Mood) -> list[ResponseCandidate]:
    if utterance.intent in _CLAIMED_INTENTS:
        return []
    fresh_entity = utterance.entity_ids[0] if utterance.entity_ids else None
    carried = state.state_vars.get("recommend_focus")
    continuing = state.active_module == "recommendation" and carried is not None
    focus = fresh_entity or (carried if continuing else None)
    if focus is None or focus not in ctx.graph.entities:
        return []
    if not fresh_entity:
        # Yield when the user steers away: a refusal, a command or question,
        # or naming another topic.
        if utterance.intent in ("request_change_topic", "deny"):
            return []
        if utterance.topic is not None:
            return []
        if utterance.dialogue_act in (DialogueAct.COMMAND, DialogueAct.YES_NO_QUESTION,
                                      DialogueAct.OPEN_QUESTION):
            return []

    exclude = state.explored_entities
    base_effects = [
        Effect("set_active", {"module": "recommendation"}),
        Effect("mark_entities_explored", {"entities": [focus]}),
    ]

    comparisons = instantiate_relation(ctx.graph, DiscourseRelation.COMPARISON, focus, exclude)
    if comparisons:
        inst = comparisons[0]
        text, grounded = _render_comparison(ctx.graph, inst)
        return [ResponseCandidate(
            text=text, source_module="recommendation", confidence=CONF_CONTINUATION,
            dialogue_act=DialogueAct.YES_NO_QUESTION,
            discourse_relation=DiscourseRelation.COMPARISON,
            topic=utterance.topic, entities=grounded,
            prompt_id=f"recommend:comparison:{focus}:{inst.result}",
            effects=base_effects + [
                Effect("mark_entities_explored", {"entities": [inst.result]}),
                Effect("set_state_var", {"name": "recommend_focus", "value": inst.result}),
            ])]

    expansions = instantiate_relation(ctx.graph, DiscourseRelation.EXPANSION, focus, exclude)
    if expansions:
        inst = expansions[0]
        text, grounded = _render_expansion(ctx.graph, inst)
        return [ResponseCandidate(
            text=text, source_module="recommendation", confidence=CONF_CONTINUATION,
            dialogue_act=DialogueAct.PROVIDE_OPINION,
            discourse_relation=DiscourseRelation.EXPANSION,
            topic=utterance.topic, entities=grounded,
            prompt_id=f"recommend:expansion:{focus}:{inst.result}",
            effects=base_effects + [
                Effect("mark_entities_explored", {"entities": [inst.result]}),
                Effect("set_state_var", {"name": "recommend_focus", "value": inst.result}),
            ])]

    if fresh_entity and not utterance.dialogue_act.is_question():
        # Nothing to walk to yet: probe the entity to keep the thread alive.
        name = ctx.graph.name(focus)
        etype = ctx.graph.primary_type(focus)
        if etype in _PLACE_TYPES:
            text = f"Ah, {name}. What will you do there?"
        else:
            text = f"Ah, {name}. What do you find interesting about it?"
        return [ResponseCandidate(
            text=text, source_module="recommendation", confidence=0.85,
            dialogue_act=DialogueAct.OPEN_QUESTION, topic=utterance.topic,
            entities=(focus,),
            prompt_id=f"recommend:probe:{focus}",
            effects=base_effects + [
                Effect("set_state_var", {"name": "recommend_focus", "value": focus}),
            ])]
    return []
