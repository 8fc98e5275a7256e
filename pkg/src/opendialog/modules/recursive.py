"""Recursive content loops (facts, trivia, news) and two-turn sequences
(riddles, would-you-rather, hypotheticals)."""

from __future__ import annotations

from opendialog.candidates import (
    CONF_CONTINUATION, CONF_DIRECT, Effect, ResponseCandidate,
)
from opendialog.memory import SessionState
from opendialog.modules import ModuleContext
from opendialog.nlu import AnnotatedUtterance, DialogueAct, Mood
from opendialog.retrieval import SEQUENCE_KINDS, ContentItem

LOOP_KINDS = ("fact", "trivia", "news_headline")

_LOOP_TRIGGERS = ("fact", "facts", "trivia", "news")
SEQUENCE_TRIGGERS = {
    "would you rather": "would_you_rather",
    "riddle": "riddle",
    "riddles": "riddle",
    "hypothetical": "hypothetical",
}


def _unexplored(ctx: ModuleContext, state: SessionState, kinds,
                topic: str | None) -> ContentItem | None:
    """First safe, unsurfaced item of the wanted kinds, in (kind, id) order."""
    for kind in kinds:
        for item_id in sorted(ctx.ltm.items):
            item = ctx.ltm.items[item_id]
            if item.kind != kind or not item.safe:
                continue
            if topic is not None and item.topic != topic:
                continue
            if f"recursive:{item.id}" not in state.surfaced_prompts:
                return item
    return None


def _loop_item(ctx: ModuleContext, state: SessionState, topic: str,
               first: bool) -> ResponseCandidate | None:
    item = _unexplored(ctx, state, LOOP_KINDS, topic)
    if item is None:
        return None
    lead = "Did you know that" if first else "How about this one."
    follow = "Want to hear another?" if first else "Want to hear more?"
    return ResponseCandidate(
        text=f"{lead} {item.text} {follow}",
        source_module="recursive", confidence=CONF_CONTINUATION,
        dialogue_act=DialogueAct.YES_NO_QUESTION,
        topic=topic, entities=item.entities,
        prompt_id=f"recursive:{item.id}",
        effects=[Effect("set_active", {"module": "recursive"}),
                 Effect("set_state_var", {"name": "rec_mode", "value": "loop"}),
                 Effect("set_state_var", {"name": "rec_topic", "value": topic}),
                 Effect("surface_prompt", {"prompt_id": f"recursive:{item.id}"})])


def _sequence_item(ctx: ModuleContext, state: SessionState, topic: str | None,
                   kind: str | None) -> ContentItem | None:
    kinds = (kind,) if kind else tuple(sorted(SEQUENCE_KINDS))
    return _unexplored(ctx, state, kinds, topic)


def _pose(item: ContentItem, topic: str | None) -> ResponseCandidate:
    return ResponseCandidate(
        text=item.text, source_module="recursive", confidence=CONF_CONTINUATION,
        dialogue_act=item.dialogue_act, topic=topic or item.topic,
        prompt_id=f"recursive:{item.id}",
        effects=[Effect("set_active", {"module": "recursive"}),
                 Effect("set_state_var", {"name": "rec_mode", "value": "sequence"}),
                 Effect("set_state_var", {"name": "rec_topic", "value": item.topic}),
                 Effect("set_state_var", {"name": "seq_pending", "value": item.id}),
                 Effect("surface_prompt", {"prompt_id": f"recursive:{item.id}"})])


def _exit_candidate(ctx: ModuleContext, state: SessionState, reason: str) -> ResponseCandidate:
    menu = ctx.menu_builder(state)
    text = f"{reason} {menu}"
    return ResponseCandidate(
        text=text, source_module="recursive", confidence=CONF_CONTINUATION,
        dialogue_act=DialogueAct.OPEN_QUESTION,
        effects=[Effect("release_module", {"module": "recursive"}),
                 Effect("clear_state_var", {"name": "seq_pending"}),
                 Effect("clear_state_var", {"name": "rec_offer"})])


def engage(ctx: ModuleContext, state: SessionState, topic: str,
           kind: str | None = None) -> ResponseCandidate | None:
    """Entry used by flow delegation: offer a loop or sequence on a topic."""
    if kind in SEQUENCE_KINDS or kind == "sequence":
        item = _sequence_item(ctx, state, topic, None if kind == "sequence" else kind)
        if item is not None:
            return _pose(item, topic)
        return None
    if _unexplored(ctx, state, LOOP_KINDS, topic) is None:
        return None
    return ResponseCandidate(
        text=f"Do you want to hear some {topic} facts?",
        source_module="recursive", confidence=CONF_DIRECT,
        dialogue_act=DialogueAct.YES_NO_QUESTION, topic=topic,
        prompt_id=f"recursive:offer:{topic}",
        effects=[Effect("set_active", {"module": "recursive"}),
                 Effect("set_state_var", {"name": "rec_mode", "value": "loop"}),
                 Effect("set_state_var", {"name": "rec_topic", "value": topic}),
                 Effect("set_state_var", {"name": "rec_offer", "value": True})])


def propose(ctx: ModuleContext, state: SessionState,
            utterance: AnnotatedUtterance, mood: Mood) -> list[ResponseCandidate]:
    if state.active_module == "recursive":
        if utterance.dialogue_act.is_question():
            return []  # questions inside a loop belong to qa
        return _continue(ctx, state, utterance)

    # Fresh triggers. Sequences first: "would you rather" contains no topic noun.
    text = " ".join(utterance.tokens)
    for phrase, kind in SEQUENCE_TRIGGERS.items():
        if phrase in text:
            item = _sequence_item(ctx, state, utterance.topic, kind)
            if item is not None:
                offer_noun = phrase if kind != "riddle" else "riddle"
                return [ResponseCandidate(
                    text=f"How about I ask you some {offer_noun} questions?",
                    source_module="recursive", confidence=CONF_DIRECT,
                    dialogue_act=DialogueAct.YES_NO_QUESTION, topic=utterance.topic,
                    prompt_id=f"recursive:offer:{kind}",
                    effects=[Effect("set_active", {"module": "recursive"}),
                             Effect("set_state_var", {"name": "rec_mode", "value": "sequence"}),
                             Effect("set_state_var", {"name": "rec_kind", "value": kind}),
                             Effect("set_state_var",
                                    {"name": "rec_topic", "value": utterance.topic}),
                             Effect("set_state_var", {"name": "rec_offer", "value": True})])]

    if utterance.topic and any(t in utterance.tokens for t in _LOOP_TRIGGERS):
        offer = engage(ctx, state, utterance.topic)
        if offer is not None:
            return [offer]
    return []


def _continue(ctx: ModuleContext, state: SessionState,
              utterance: AnnotatedUtterance) -> list[ResponseCandidate]:
    mode = state.state_vars.get("rec_mode", "loop")
    topic = state.state_vars.get("rec_topic")

    if utterance.intent == "request_change_topic":
        new_topic = utterance.topic
        if new_topic and new_topic != topic:
            # Switch topic, stay inside the sequence/loop.
            if mode == "sequence":
                item = _sequence_item(ctx, state, new_topic,
                                      state.state_vars.get("rec_kind"))
                if item is None:
                    item = _sequence_item(ctx, state, new_topic, None)
                if item is not None:
                    return [_pose(item, new_topic)]
            else:
                nxt = _loop_item(ctx, state, new_topic, first=True)
                if nxt is not None:
                    return [nxt]
        return [_exit_candidate(ctx, state, "Okay, let's switch gears.")]

    if utterance.intent == "deny":
        return [_exit_candidate(ctx, state, "No problem.")]

    pending = state.state_vars.get("seq_pending")
    if mode == "sequence" and pending and not state.state_vars.get("rec_offer"):
        item = ctx.ltm.items.get(pending)
        if item is None:
            return []
        answer = item.agent_answer or "I honestly can't decide."
        noun = (item.topic or "more")
        text = (f"For me personally? {answer} "
                f"Do you want to hear another {noun} question?")
        return [ResponseCandidate(
            text=text, source_module="recursive", confidence=CONF_CONTINUATION,
            dialogue_act=DialogueAct.YES_NO_QUESTION, topic=item.topic,
            prompt_id=f"recursive:{item.id}:react",
            effects=[Effect("clear_state_var", {"name": "seq_pending"})])]

    if mode == "sequence":
        if utterance.intent == "affirm" or state.state_vars.get("rec_offer"):
            item = _sequence_item(ctx, state, topic, state.state_vars.get("rec_kind"))
            if item is None:
                return [_exit_candidate(ctx, state, "That's all I have on that.")]
            posed = _pose(item, topic)
            posed.effects.append(Effect("clear_state_var", {"name": "rec_offer"}))
            return [posed]
        return []

    # Loop mode keeps feeding content until the user explicitly transitions out.
    first = bool(state.state_vars.get("rec_offer"))
    nxt = _loop_item(ctx, state, topic or "", first=first)
    if nxt is None:
        return [_exit_candidate(ctx, state, "That's everything I have on that topic.")]
    nxt.effects.append(Effect("clear_state_var", {"name": "rec_offer"}))
    return [nxt]
