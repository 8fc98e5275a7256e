"""Storytelling: chunked narration with tag questions and structured answers."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from opendialog.candidates import (
    CONF_CONTINUATION, CONF_DIRECT, Effect, ResponseCandidate,
)
from opendialog.errors import LoadError
from opendialog.memory import SessionState
from opendialog.modules import ModuleContext
from opendialog.nlu import AnnotatedUtterance, DialogueAct, Mood
from opendialog.resources import load_json

STORY_KINDS = {"fable", "dream", "adventure"}

_TRIGGERS = ("story", "stories")


@dataclass(frozen=True)
class StoryChunk:
    text: str
    tag_question: str


@dataclass(frozen=True)
class Story:
    id: str
    title: str
    kind: str
    offer: str
    chunks: tuple[StoryChunk, ...]
    qa_pairs: dict[str, str] = field(default_factory=dict)  # regex pattern -> answer


def load_story(path: Path) -> Story:
    raw = load_json(path)
    try:
        chunks = tuple(StoryChunk(c["text"], c["tag_question"]) for c in raw["chunks"])
        story = Story(
            id=raw["id"], title=raw["title"], kind=raw["kind"],
            offer=raw["offer"], chunks=chunks, qa_pairs=dict(raw.get("qa_pairs", {})),
        )
    except (KeyError, TypeError) as exc:
        raise LoadError(f"{path.name}: bad story file: {exc}") from exc
    if story.kind not in STORY_KINDS:
        raise LoadError(f"{path.name}: unknown story kind {story.kind!r}")
    if not story.chunks:
        raise LoadError(f"{path.name}: story needs at least one chunk")
    if any(not c.tag_question.strip() for c in story.chunks):
        raise LoadError(f"{path.name}: every chunk needs a tag question")
    return story


def _chunk_candidate(story: Story, cursor: int) -> ResponseCandidate:
    chunk = story.chunks[cursor]
    return ResponseCandidate(
        text=f"{chunk.text} {chunk.tag_question}",
        source_module="storytelling", confidence=CONF_CONTINUATION,
        dialogue_act=DialogueAct.YES_NO_QUESTION,
        prompt_id=f"story:{story.id}:{cursor}",
        effects=[Effect("set_state_var", {"name": "story_cursor", "value": cursor})])


def propose(ctx: ModuleContext, state: SessionState,
            utterance: AnnotatedUtterance, mood: Mood) -> list[ResponseCandidate]:
    active_id = state.state_vars.get("story_active")

    if state.active_module == "storytelling" and active_id:
        story = ctx.ltm.stories.get(active_id)
        if story is None:
            return []
        if utterance.dialogue_act.is_question():
            return []  # qa consults this story's qa_pairs
        if utterance.intent in ("request_change_topic",):
            return []  # release initiative; flows or the menu take over
        cursor = state.state_vars.get("story_cursor", -1)
        if utterance.intent == "deny" and cursor < 0:
            return [ResponseCandidate(
                text="No problem, maybe another time.",
                source_module="storytelling", confidence=CONF_CONTINUATION,
                dialogue_act=DialogueAct.STATEMENT,
                effects=[Effect("release_module", {"module": "storytelling"})])]
        nxt = cursor + 1
        if nxt >= len(story.chunks):
            return [ResponseCandidate(
                text=f"And that was the story of {story.title}. I hope you liked it.",
                source_module="storytelling", confidence=CONF_CONTINUATION,
                dialogue_act=DialogueAct.STATEMENT,
                prompt_id=f"story:{story.id}:end",
                effects=[Effect("release_module", {"module": "storytelling"}),
                         Effect("clear_state_var", {"name": "story_active"})])]
        return [_chunk_candidate(story, nxt)]

    text = " ".join(utterance.tokens)
    if any(t in utterance.tokens or t in text for t in _TRIGGERS):
        for story_id in sorted(ctx.ltm.stories):
            story = ctx.ltm.stories[story_id]
            if f"story:{story.id}:offer" in state.surfaced_prompts:
                continue
            return [ResponseCandidate(
                text=story.offer, source_module="storytelling", confidence=CONF_DIRECT,
                dialogue_act=DialogueAct.YES_NO_QUESTION,
                prompt_id=f"story:{story.id}:offer",
                effects=[Effect("set_active", {"module": "storytelling"}),
                         Effect("set_state_var", {"name": "story_active", "value": story.id}),
                         Effect("set_state_var", {"name": "story_cursor", "value": -1})])]
    return []
