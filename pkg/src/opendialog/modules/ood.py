"""Out-of-domain fallback: always yields exactly one candidate.

When the pool's best response fails the confidence gate, this candidate is
substituted as winner, transitioning to an unexplored module or topic (or
working the detected entity when one went unhandled).
"""

from __future__ import annotations

from opendialog.candidates import CONF_FALLBACK, Effect, ResponseCandidate
from opendialog.memory import SessionState
from opendialog.modules import ModuleContext, intimacy
from opendialog.nlu import AnnotatedUtterance, DialogueAct, Mood
from opendialog.retrieval import search_provider_cascade

_APOLOGY = ("I'm really sorry about this, but I'm not sure what to say next. "
            "My robot brain is telling me I'm not quite sure how to respond "
            "to what you just said.")


def _entity_strategy(ctx: ModuleContext, state: SessionState,
                     utterance: AnnotatedUtterance) -> ResponseCandidate | None:
    entity_id = utterance.entity_ids[0]
    entity = ctx.graph.entity(entity_id)
    options: list[tuple[str, str, DialogueAct]] = []

    opinion = state.agent_profile.opinion_for(entity_id)
    if opinion is not None:
        options.append(("opinion", f"{opinion.text} What about you?",
                        DialogueAct.PROVIDE_OPINION))
    options.append(("probe", f"Tell me more about {entity.name}. "
                             f"What makes it interesting to you?",
                    DialogueAct.OPEN_QUESTION))
    if entity.aliases:
        options.append(("verify", f"Just to check, when you say {entity.name}, "
                                  f"do you mean {entity.aliases[0]}?",
                        DialogueAct.YES_NO_QUESTION))
    summary = search_provider_cascade(entity.name, ctx.providers, ctx.provider_timeout_ms)
    if summary:
        options.append(("summary", summary, DialogueAct.STATEMENT))

    kind, text, act = state.rng.choice(options)
    return ResponseCandidate(
        text=text, source_module="out_of_domain", confidence=CONF_FALLBACK,
        dialogue_act=act, entities=(entity_id,),
        prompt_id=f"ood:entity:{kind}:{entity_id}")


def propose(ctx: ModuleContext, state: SessionState, utterance: AnnotatedUtterance,
            mood: Mood, entity_handled: bool = False) -> list[ResponseCandidate]:
    # Enough fallbacks in a row: stop guessing and re-offer the menu. The
    # streak counts previous consecutive fallback wins, so this turn would be
    # number streak+1.
    if state.state_vars.get("ood_streak", 0) + 1 >= ctx.ood_menu_streak:
        menu = ctx.menu_builder(state)
        return [ResponseCandidate(
            text=f"I keep losing the thread, sorry. {menu}",
            source_module="out_of_domain", confidence=CONF_FALLBACK,
            dialogue_act=DialogueAct.OPEN_QUESTION, prompt_id="ood:menu")]

    if utterance.entity_ids and not entity_handled:
        candidate = _entity_strategy(ctx, state, utterance)
        if candidate is not None:
            return [candidate]

    if "wellbeing" not in state.explored_modules:
        text = (f"{_APOLOGY} Do you mind if I switch to a new topic? "
                f"How is your day going?")
        return [ResponseCandidate(
            text=text, source_module="out_of_domain", confidence=CONF_FALLBACK,
            dialogue_act=DialogueAct.OPEN_QUESTION, prompt_id="ood:wellbeing",
            effects=[Effect("mark_module_explored", {"module": "wellbeing"})])]

    if "intimacy" not in state.explored_modules:
        question = intimacy.next_question(ctx, state, mood)
        if question is not None:
            text = f"{_APOLOGY} Mind if I ask you something instead? {question.text}"
            return [ResponseCandidate(
                text=text, source_module="out_of_domain", confidence=CONF_FALLBACK,
                dialogue_act=question.dialogue_act,
                prompt_id=f"ood:intimacy:{question.id}",
                effects=[Effect("mark_module_explored", {"module": "intimacy"}),
                         Effect("set_active", {"module": "intimacy"}),
                         Effect("set_state_var",
                                {"name": "intimacy_pending", "value": question.id})])]

    suggestion = ctx.topic_suggester(state)
    if suggestion is not None:
        flow_id, topic = suggestion
        text = f"{_APOLOGY} Do you mind if I switch to a new topic? Are you into {topic}?"
        return [ResponseCandidate(
            text=text, source_module="out_of_domain", confidence=CONF_FALLBACK,
            dialogue_act=DialogueAct.YES_NO_QUESTION, prompt_id=f"ood:offer:{flow_id}",
            effects=[Effect("standing_offer", {"flow_id": flow_id})])]

    menu = ctx.menu_builder(state)
    return [ResponseCandidate(
        text=f"{_APOLOGY} {menu}",
        source_module="out_of_domain", confidence=CONF_FALLBACK,
        dialogue_act=DialogueAct.OPEN_QUESTION, prompt_id="ood:menu")]
