"""Direct responses for bot-directed intents that fit no content module."""

from __future__ import annotations

from opendialog.candidates import CONF_DIRECT, ResponseCandidate
from opendialog.memory import SessionState
from opendialog.modules import ModuleContext
from opendialog.nlu import AnnotatedUtterance, DialogueAct, Mood


def propose(ctx: ModuleContext, state: SessionState,
            utterance: AnnotatedUtterance, mood: Mood) -> list[ResponseCandidate]:
    intent = utterance.intent

    if intent == "assertion_on_bot":
        if utterance.sentiment < 0:
            text = ("Ouch. I'm still learning, so thanks for bearing with me. "
                    "What would make this chat better for you?")
            act = DialogueAct.OPEN_QUESTION
        else:
            text = ("That's kind of you to say! I'm just a chatty program doing its best. "
                    "What should we talk about next?")
            act = DialogueAct.OPEN_QUESTION
        return [ResponseCandidate(text=text, source_module="social",
                                  confidence=CONF_DIRECT, dialogue_act=act)]

    if intent == "request_confirm_understanding":
        text = ("I'm doing my best to follow along. "
                "If I miss something, just rephrase it for me.")
        return [ResponseCandidate(text=text, source_module="social",
                                  confidence=CONF_DIRECT, dialogue_act=DialogueAct.STATEMENT)]

    if intent == "request_service":
        text = ("I can't control music or devices from here, I'm only good for conversation. "
                "Happy to chat about music instead, though. Interested?")
        return [ResponseCandidate(text=text, source_module="social",
                                  confidence=CONF_DIRECT,
                                  dialogue_act=DialogueAct.YES_NO_QUESTION)]

    return []
