"""Short-term session state and the long-term content store.

STM is one :class:`SessionState` per conversation: history, focus stack,
explored sets, profiles and per-flow cursors. LTM is engine-wide content
(packs, stories, opinion inventory) plus the per-session archive records
that aged focus entries migrate into.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

from opendialog.errors import InputError
from opendialog.nlu import AnnotatedUtterance, Mood

if TYPE_CHECKING:
    from opendialog.retrieval import ContentItem

SPEAKER_USER = "user"
SPEAKER_AGENT = "agent"


@dataclass
class OpinionRecord:
    key: str  # entity id or abstract concept
    polarity: str
    text: str
    justification: str


@dataclass
class AgentProfile:
    opinions: dict[str, OpinionRecord] = field(default_factory=dict)

    def opinion_for(self, key: str) -> OpinionRecord | None:
        return self.opinions.get(key)


@dataclass
class UserProfile:
    mood: Mood = Mood.NEUTRAL
    intimacy_allowance: int = 1
    interests: set[str] = field(default_factory=set)
    feedback: list[tuple[str, bool]] = field(default_factory=list)


@dataclass
class FocusEntry:
    entity_id: str
    turn: int  # user-turn count at last mention


@dataclass
class TurnRecord:
    speaker: str
    text: str
    timestamp: int  # logical sequence number, monotone per session
    annotation: AnnotatedUtterance | None = None


@dataclass
class SessionState:
    session_id: str
    rng_seed: int
    turn_history: list[TurnRecord] = field(default_factory=list)
    active_module: str | None = None
    explored_topics: set[str] = field(default_factory=set)
    explored_modules: set[str] = field(default_factory=set)
    surfaced_prompts: set[str] = field(default_factory=set)
    focus_entities: list[FocusEntry] = field(default_factory=list)  # most recent first
    user_profile: UserProfile = field(default_factory=UserProfile)
    agent_profile: AgentProfile = field(default_factory=AgentProfile)
    state_vars: dict[str, Any] = field(default_factory=dict)
    turn_count: int = 0
    flow_state: dict[str, list[str]] = field(default_factory=dict)  # flow id -> expectation set
    explored_entities: set[str] = field(default_factory=set)
    intimacy_turns_per_level: int = 10
    ended: bool = False

    def __post_init__(self):
        self.rng = random.Random(self.rng_seed)

    @property
    def focus_top(self) -> str | None:
        return self.focus_entities[0].entity_id if self.focus_entities else None

    def recent_user_texts(self, n: int = 3) -> list[str]:
        texts = [t.text for t in self.turn_history if t.speaker == SPEAKER_USER]
        return texts[-n:]

    def last_agent_text(self) -> str | None:
        for record in reversed(self.turn_history):
            if record.speaker == SPEAKER_AGENT:
                return record.text
        return None


def record_turn(state: SessionState, speaker: str, text: str,
                annotation: AnnotatedUtterance | None = None,
                entities: list[str] | None = None) -> SessionState:
    """Append a turn; user turns bump ``turn_count`` and feed the focus stack.

    Entities mentioned by either speaker are pushed (the agent naming an
    entity makes it available to pronoun resolution on the next user turn).
    """
    if speaker not in (SPEAKER_USER, SPEAKER_AGENT):
        raise InputError(f"unknown speaker {speaker!r}")
    state.turn_history.append(
        TurnRecord(speaker, text, timestamp=len(state.turn_history), annotation=annotation))
    if speaker == SPEAKER_USER:
        state.turn_count += 1
        allowance = 1 + state.turn_count // max(1, state.intimacy_turns_per_level)
        if allowance > state.user_profile.intimacy_allowance:
            state.user_profile.intimacy_allowance = allowance
    mentioned = list(entities or [])
    if annotation is not None:
        mentioned.extend(annotation.entity_ids)
    for entity_id in mentioned:
        push_focus(state, entity_id)
    return state


def push_focus(state: SessionState, entity_id: str) -> None:
    """Push onto the focus stack, deduplicating to a single (fresh) entry."""
    state.focus_entities = [e for e in state.focus_entities if e.entity_id != entity_id]
    state.focus_entities.insert(0, FocusEntry(entity_id, state.turn_count))


def resolve_focus(state: SessionState, utterance: AnnotatedUtterance) -> str | None:
    """Top of the focus stack when the utterance carries a third-person pronoun."""
    if utterance.has_third_person_pronoun() and state.focus_entities:
        return state.focus_entities[0].entity_id
    return None


@dataclass
class LongTermStore:
    """Engine-wide corpora plus per-session archive records."""

    items: dict[str, "ContentItem"] = field(default_factory=dict)
    opinion_pack: dict[str, list[OpinionRecord]] = field(default_factory=dict)
    stories: dict[str, Any] = field(default_factory=dict)
    archive: dict[str, list[dict]] = field(default_factory=dict)
    archive_dir: Path | None = None

    def add_opinion(self, record: OpinionRecord) -> None:
        self.opinion_pack.setdefault(record.key, []).append(record)

    def archive_record(self, session_id: str, record: dict) -> None:
        self.archive.setdefault(session_id, []).append(record)
        if self.archive_dir is not None:
            self.archive_dir.mkdir(parents=True, exist_ok=True)
            path = self.archive_dir / f"{session_id}.jsonl"
            with path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")


def flush_to_ltm(state: SessionState, ltm: LongTermStore, age_threshold: int) -> SessionState:
    """Migrate focus entries older than ``age_threshold`` user turns to LTM.

    Explored sets and surfaced prompts stay put: they guard against
    repetition for the life of the session.
    """
    if age_threshold < 0:
        raise InputError("age threshold must be >= 0")
    kept: list[FocusEntry] = []
    for entry in state.focus_entities:
        age = state.turn_count - entry.turn
        if age > age_threshold:
            ltm.archive_record(state.session_id, {
                "kind": "focus_flush",
                "entity_id": entry.entity_id,
                "mentioned_turn": entry.turn,
                "flushed_at_turn": state.turn_count,
            })
        else:
            kept.append(entry)
    state.focus_entities = kept
    return state


def init_agent_profile(opinion_pack: dict[str, list[OpinionRecord]], seed: int) -> AgentProfile:
    """Seeded uniform pick of one opinion per concept key."""
    if not opinion_pack:
        raise InputError("empty opinion pack")
    rng = random.Random(seed)
    profile = AgentProfile()
    for key in sorted(opinion_pack):
        alternatives = opinion_pack[key]
        if not alternatives:
            raise InputError(f"opinion key {key!r} has no alternatives")
        profile.opinions[key] = rng.choice(alternatives)
    return profile
