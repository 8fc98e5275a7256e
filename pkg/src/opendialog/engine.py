"""Turn orchestration: annotate, pool candidates, rank, realize, record.

The engine owns the immutable shared resources (graph, index, flows,
lexicons) and the per-session states. Turns for the same session are
serialized; distinct sessions proceed concurrently.
"""

from __future__ import annotations

import json
import logging
import random
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from opendialog import flows as flowmod
from opendialog import modules
from opendialog.candidates import (
    CONF_DIRECT, CONF_TOPICAL, Effect, ResponseCandidate,
)
from opendialog.config import EngineConfig
from opendialog.eliza import Eliza
from opendialog.errors import FlowLoadError, InputError, LoadError, UnknownSessionError
from opendialog.kg import KnowledgeGraph, load_graph
from opendialog.memory import (
    LongTermStore, OpinionRecord, SessionState, flush_to_ltm, init_agent_profile,
    record_turn,
)
from opendialog.modules import ModuleContext, ood, recursive
from opendialog.modules.stories import load_story
from opendialog.nlu import (
    ASR_NEEDS_CLARIFICATION, AnnotatedUtterance, Annotator, AsrHypothesis, DialogueAct,
    NluResources, TopicClassifier, check_profanity, classify_mood, detect_entities,
    tokenize,
)
from opendialog.postprocess import (
    FinalReply, apply_hedge, emit_ssml, load_hedge_rules, merge,
)
from opendialog.ranker import OOD_MODULE, RankedPool, RankingContext, rank
from opendialog.resources import iter_jsonl, load_json
from opendialog.retrieval import ContentIndex, OfflineFactProvider, load_pack

logger = logging.getLogger(__name__)

_REPEAT_PHRASES = ("repeat that", "say that again", "what did you say",
                   "come again", "repeat please", "can you repeat")
_MENU_PHRASES = ("what can we talk about", "what can you talk about", "show me the menu",
                 "what are my options", "what can you do", "topic menu")

FAREWELL = "Okay, thanks for chatting with me. Goodbye!"
CLARIFICATION = "Sorry, I didn't quite catch that. Could you say it again?"


@dataclass
class TurnResult:
    reply: FinalReply
    debug: dict
    ended: bool = False


@dataclass
class _Session:
    state: SessionState
    lock: threading.Lock = field(default_factory=threading.Lock)


class Engine:
    def __init__(self, config: EngineConfig | None = None):
        self.config = config or EngineConfig()
        data = self.config.data_dir

        try:
            self._load_resources(data)
        except FileNotFoundError as exc:
            raise LoadError(f"missing engine resource: {exc.filename}") from exc

        self._sessions: dict[str, _Session] = {}
        self._sessions_lock = threading.Lock()

    def _load_resources(self, data: Path) -> None:
        self.nlu = NluResources.load(data / "lexicons", data / "intent_rules.json")
        self.graph = self._load_graph(data / "graph")
        self.ltm = LongTermStore(archive_dir=self.config.archive_dir)
        self._load_packs(data / "packs")
        self._load_stories(data / "stories")
        self.index = ContentIndex(self.ltm.items.values(), self.nlu.stopwords)

        nutrition = load_json(data / "packs" / "nutrition_arguments.json")
        self.registry = flowmod.build_default_registry(nutrition.get("facts", []))
        self.flows = flowmod.load_flows(self.config.flows_dir, self.registry)

        topic_keywords = {f.topic: list(f.triggers) + [f.topic] for f in self.flows.values()}
        extras_path = data / "lexicons" / "topic_keywords.json"
        if extras_path.is_file():
            for topic, keywords in load_json(extras_path).items():
                topic_keywords.setdefault(topic, []).extend(keywords)
        self.topics = TopicClassifier(topic_keywords)
        self.annotator = Annotator(self.nlu, self.graph, self.topics,
                                   asr_threshold=self.config.asr_threshold)
        self.eliza = Eliza.from_file(data / "eliza_rules.json")
        self.hedge_rules = load_hedge_rules(data / "hedge_rules.json")

        self.ctx = ModuleContext(
            graph=self.graph, index=self.index, ltm=self.ltm, eliza=self.eliza,
            stopwords=self.nlu.stopwords,
            sentiment_words=set(self.nlu.sentiment),
            providers=self._build_providers(),
            provider_timeout_ms=self.config.provider_timeout_ms,
            qa_min_content_words=self.config.qa_min_content_words,
            ood_menu_streak=self.config.ood_menu_streak,
            inability_phrase=self.config.inability_phrase,
            topic_suggester=self._suggest_topic,
            menu_builder=self._menu_text,
        )

    # ------------------------------------------------------------------
    # Resource loading

    def _load_graph(self, graph_dir: Path) -> KnowledgeGraph:
        node_files = sorted(graph_dir.glob("*_nodes.jsonl"))
        edge_files = sorted(graph_dir.glob("*_edges.jsonl"))
        if not node_files:
            raise LoadError(f"no *_nodes.jsonl files under {graph_dir}")
        return load_graph(node_files, edge_files)

    def _load_packs(self, packs_dir: Path) -> None:
        for path in sorted(packs_dir.glob("*.jsonl")):
            if path.name == "opinions.jsonl":
                for _, record in iter_jsonl(path):
                    self.ltm.add_opinion(OpinionRecord(
                        key=record["key"], polarity=record.get("polarity", "positive"),
                        text=record["text"], justification=record.get("justification", "")))
                continue
            for item in load_pack(path):
                if item.id in self.ltm.items:
                    raise LoadError(f"{path.name}: duplicate content id {item.id!r}")
                self.ltm.items[item.id] = item

    def _load_stories(self, stories_dir: Path) -> None:
        for path in sorted(stories_dir.glob("*.json")):
            story = load_story(path)
            self.ltm.stories[story.id] = story

    def _build_providers(self):
        providers = []
        for name in (n.strip() for n in self.config.providers.split(",")):
            if name == "offline":
                providers.append(OfflineFactProvider(
                    index=self.index,
                    content_words=lambda text: [t for t in tokenize(text)
                                                if t not in self.nlu.stopwords]))
            elif name:
                raise LoadError(f"unknown search provider {name!r}")
        return providers

    # ------------------------------------------------------------------
    # Helpers shared with modules

    def _unexplored_flows(self, state: SessionState) -> list:
        return [f for f in sorted(self.flows.values(), key=lambda f: f.id)
                if f.topic not in state.explored_topics]

    def _suggest_topic(self, state: SessionState) -> tuple[str, str] | None:
        for flow in self._unexplored_flows(state):
            return flow.id, flow.topic
        return None

    def _menu_text(self, state: SessionState) -> str:
        topics = [f.topic for f in self._unexplored_flows(state)[:self.config.menu_size]]
        if not topics:
            return "We've covered a lot of ground! Anything you'd like to revisit?"
        if len(topics) == 1:
            listed = topics[0]
        else:
            listed = ", ".join(topics[:-1]) + f", or {topics[-1]}"
        return f"You pick! We could talk about {listed}. What sounds good?"

    # ------------------------------------------------------------------
    # Session management

    def create_session(self, seed: int | None = None) -> str:
        if seed is None:
            seed = self.config.default_seed()
        if seed is None:
            seed = random.SystemRandom().getrandbits(32)
        session_id = uuid.uuid4().hex
        state = SessionState(session_id=session_id, rng_seed=seed,
                             intimacy_turns_per_level=self.config.intimacy_turns_per_level)
        state.agent_profile = init_agent_profile(self.ltm.opinion_pack, seed)
        with self._sessions_lock:
            self._sessions[session_id] = _Session(state)
        return session_id

    def _session(self, session_id: str) -> _Session:
        with self._sessions_lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise UnknownSessionError(f"unknown session {session_id!r}") from None

    def get_state(self, session_id: str) -> SessionState:
        return self._session(session_id).state

    def end_session(self, session_id: str) -> None:
        session = self._session(session_id)
        with session.lock:
            session.state.ended = True

    def session_summary(self, session_id: str) -> dict:
        state = self.get_state(session_id)
        return {
            "session_id": state.session_id,
            "turn_count": state.turn_count,
            "active_module": state.active_module,
            "explored_topics": sorted(state.explored_topics),
            "explored_modules": sorted(state.explored_modules),
            "transcript": [{"speaker": t.speaker, "text": t.text, "timestamp": t.timestamp}
                           for t in state.turn_history],
            "ended": state.ended,
        }

    # ------------------------------------------------------------------
    # The turn pipeline

    def handle_turn(self, session_id: str, text: str | None = None,
                    hypotheses: Sequence[AsrHypothesis] | None = None) -> TurnResult:
        session = self._session(session_id)
        with session.lock:
            return self._turn(session.state, text, hypotheses)

    def _turn(self, state: SessionState, text: str | None,
              hypotheses: Sequence[AsrHypothesis] | None) -> TurnResult:
        if state.ended:
            return self._priority_reply(
                state, None, "This conversation has ended. Start a new session to keep chatting.",
                source="base", ended=True, record=False)

        utt = self.annotator.annotate(text, hypotheses)
        if utt.asr_status == ASR_NEEDS_CLARIFICATION:
            best = max(utt.asr_hypotheses, key=lambda h: h.score)
            return self._priority_reply(state, utt, CLARIFICATION,
                                        source="base", user_text=best.text)

        mood = classify_mood(utt, state.recent_user_texts(2) + [utt.raw_text])
        state.user_profile.mood = mood

        base = self._base_response(state, utt)
        if base is not None:
            reply_text, ended, effects = base
            return self._priority_reply(state, utt, reply_text, source="base",
                                        ended=ended, effects=effects)

        return self._ranked_turn(state, utt, mood)

    # -- base (priority) responses ------------------------------------

    def _base_response(self, state: SessionState, utt: AnnotatedUtterance):
        """Exit, repeat, menu, first-turn greeting, and feedback exchanges."""
        text = " ".join(utt.tokens)

        pending = state.state_vars.get("feedback_pending")
        if pending:
            effects = [Effect("clear_state_var", {"name": "feedback_pending"})]
            if utt.intent == "affirm":
                state.user_profile.feedback.append((pending, True))
                return ("Glad you had fun! I'll remember this for the future "
                        "so that we have more fun next time.", False, effects)
            if utt.intent == "deny":
                state.user_profile.feedback.append((pending, False))
                return ("I see. I'm bummed you didn't have fun. I'll remember this "
                        "for the future so that we have more fun next time.", False, effects)
            state.state_vars.pop("feedback_pending", None)

        if utt.intent == "request_exit":
            return FAREWELL, True, []

        if any(phrase in text for phrase in _REPEAT_PHRASES):
            last = state.last_agent_text()
            if last is not None:
                return last, False, []

        if any(phrase in text for phrase in _MENU_PHRASES) or text in ("menu", "topics"):
            return self._menu_text(state), False, []

        if state.turn_count == 0 and utt.dialogue_act == DialogueAct.GREETING:
            return (f"Hi there! I'm happy to chat. {self._menu_text(state)}", False, [])

        if (utt.intent == "request_change_topic" and state.active_module is None
                and not state.flow_state and utt.topic is None):
            return self._menu_text(state), False, []

        # Feedback interjections wait for an idle, non-question turn.
        due = (state.state_vars.get("completions_since_feedback", 0)
               >= self.config.feedback_period
               and state.active_module is None and not state.flow_state
               and not utt.dialogue_act.is_question())
        if due:
            about = state.state_vars.get("last_completed_desc", "that last topic")
            effects = [
                Effect("set_state_var", {"name": "feedback_pending", "value": about}),
                Effect("set_state_var", {"name": "completions_since_feedback", "value": 0}),
            ]
            return (f"So anyways, we just talked about {about}. If you don't mind me asking, "
                    f"did you have fun talking about it? Would you like to do it again "
                    f"some time in the future?", False, effects)
        return None

    def _priority_reply(self, state: SessionState, utt: AnnotatedUtterance | None,
                        reply_text: str, source: str, ended: bool = False,
                        effects: list[Effect] | None = None,
                        user_text: str | None = None, record: bool = True) -> TurnResult:
        candidate = ResponseCandidate(
            text=reply_text, source_module=source, confidence=CONF_DIRECT,
            dialogue_act=DialogueAct.STATEMENT, priority=True,
            effects=effects or [])
        ranking = RankingContext(
            base_confidence=self.config.base_confidence,
            utterance_text=(utt.raw_text if utt else user_text or ""))
        pool = rank([candidate], ranking, state.rng)
        return self._finalize(state, utt, pool, mood=state.user_profile.mood,
                              flow_debug={}, ended=ended, user_text=user_text,
                              record=record)

    # -- the ranked pipeline -------------------------------------------

    def _ranked_turn(self, state: SessionState, utt: AnnotatedUtterance,
                     mood) -> TurnResult:
        pool: list[ResponseCandidate] = []
        flow_debug: dict = {}

        pool.extend(self._flow_candidates(state, utt, flow_debug))
        for name in modules.MODULE_PROPOSERS:
            pool.extend(modules.propose(name, self.ctx, state, utt, mood))

        first_entity = utt.entity_ids[0] if utt.entity_ids else None
        entity_handled = any(
            first_entity in c.entities for c in pool) if first_entity else False
        pool.extend(ood.propose(self.ctx, state, utt, mood, entity_handled=entity_handled))

        # Sensitive-content filter: anything explicit is invalidated before ranking.
        for candidate in pool:
            if check_profanity(candidate.text, self.nlu.profanity):
                candidate.profane = True

        ranking = RankingContext(
            base_confidence=self.config.base_confidence,
            incoherence_penalty=self.config.incoherence_penalty,
            repeat_penalty=self.config.repeat_penalty,
            length_penalty_rate=self.config.length_penalty_rate,
            length_threshold=self.config.length_threshold,
            ood_threshold=self.config.ood_threshold,
            active_module=state.active_module,
            surfaced_prompts=set(state.surfaced_prompts),
            utterance_content_words=frozenset(utt.content_words),
            utterance_entities=frozenset(utt.entity_ids),
            utterance_text=utt.raw_text,
            active_topic=state.state_vars.get("active_topic"),
        )
        ranked = rank(pool, ranking, state.rng)
        return self._finalize(state, utt, ranked, mood, flow_debug)

    def _flow_candidates(self, state: SessionState, utt: AnnotatedUtterance,
                         flow_debug: dict) -> list[ResponseCandidate]:
        candidates: list[ResponseCandidate] = []

        active_flow_id = next(iter(state.flow_state), None)
        if active_flow_id is not None:
            flow = self.flows[active_flow_id]
            expectations = list(state.flow_state[active_flow_id])
            matched = flowmod.match(flow, expectations, state, utt, self.registry)
            flow_debug.update({"flow_id": active_flow_id, "expectations": expectations,
                               "matched_node": matched})
            if matched is None:
                flowmod.step(flow, state, None, self.registry)
                self._release_active(state, f"flow:{flow.id}", flow.topic)
                flow_debug["event"] = "exit"
            else:
                try:
                    candidate = self._flow_step_candidate(state, flow, matched, utt)
                except FlowLoadError:
                    logger.warning("flow %s node %s failed to render; turn proceeds "
                                   "with remaining candidates", flow.id, matched,
                                   exc_info=True)
                    candidate = None
                if candidate is not None:
                    candidates.append(candidate)
                    flow_debug["event"] = "step"

        if not state.flow_state:
            triggered = flowmod.trigger(self.flows, state, utt)
            if triggered is not None:
                flow = self.flows[triggered]
                direct = flowmod.keyword_hit(flow.triggers, utt)
                candidates.append(ResponseCandidate(
                    text=flow.starter, source_module=f"flow:{flow.id}",
                    confidence=CONF_TOPICAL if direct else CONF_DIRECT,
                    dialogue_act=(DialogueAct.YES_NO_QUESTION
                                  if flow.starter.rstrip().endswith("?")
                                  else DialogueAct.STATEMENT),
                    topic=flow.topic, topic_keywords=flow.triggers + (flow.topic,),
                    prompt_id=f"flow:{flow.id}:starter",
                    effects=[Effect("flow_enter", {"flow_id": flow.id})]))
                flow_debug.setdefault("event", "trigger")
                flow_debug["triggered"] = triggered

        suggestion = self._suggest_starter(state, utt, exclude={flow_debug.get("triggered"),
                                                                active_flow_id})
        if suggestion is not None:
            candidates.append(suggestion)
        return candidates

    def _flow_step_candidate(self, state: SessionState, flow, matched: str,
                             utt: AnnotatedUtterance):
        node = flow.nodes[matched]
        commit = Effect("flow_commit", {"flow_id": flow.id, "node_id": matched})
        if node.action.type == flowmod.ACTION_TEMPLATE:
            rendered = flowmod.render_template(node.action.text or "", state, flow,
                                               self.registry)
            act = (DialogueAct.YES_NO_QUESTION if rendered.rstrip().endswith("?")
                   else DialogueAct.STATEMENT)
            return ResponseCandidate(
                text=rendered, source_module=f"flow:{flow.id}", confidence=CONF_DIRECT,
                dialogue_act=act, topic=flow.topic,
                prompt_id=f"flow:{flow.id}:{matched}", effects=[commit])
        if node.action.type == flowmod.ACTION_DELEGATE:
            module_id, payload = node.action.module or "", dict(node.action.payload)
            delegated = None
            if module_id == "recursive":
                topic = payload.get("topic", flow.topic)
                delegated = recursive.engage(self.ctx, state, topic, payload.get("kind"))
            elif module_id in modules.MODULE_PROPOSERS:
                proposals = modules.propose(module_id, self.ctx, state, utt,
                                            state.user_profile.mood)
                delegated = proposals[0] if proposals else None
            else:
                logger.warning("flow %s delegated to unavailable module %s",
                               flow.id, module_id)
            if delegated is None:
                return None
            # The flow chose this action: it speaks with the flow's authority.
            delegated.initiative_module = f"flow:{flow.id}"
            delegated.confidence = max(delegated.confidence, CONF_DIRECT)
            delegated.effects.append(commit)
            return delegated
        if node.action.type == flowmod.ACTION_EXIT:
            text = node.action.text
            if not text:
                flowmod.step(flow, state, matched, self.registry)
                self._release_active(state, f"flow:{flow.id}", flow.topic)
                return None
            return ResponseCandidate(
                text=text, source_module=f"flow:{flow.id}", confidence=CONF_DIRECT,
                dialogue_act=DialogueAct.STATEMENT, topic=flow.topic,
                prompt_id=f"flow:{flow.id}:{matched}", effects=[commit])
        return None

    def _suggest_starter(self, state: SessionState, utt: AnnotatedUtterance,
                         exclude: set) -> ResponseCandidate | None:
        """One unexplored-topic starter per turn; the menu's scouting party."""
        for flow in self._unexplored_flows(state):
            if flow.id in exclude or f"flow:{flow.id}" == state.active_module:
                continue
            return ResponseCandidate(
                text=flow.starter, source_module=f"flow:{flow.id}",
                confidence=CONF_TOPICAL,
                dialogue_act=(DialogueAct.YES_NO_QUESTION
                              if flow.starter.rstrip().endswith("?")
                              else DialogueAct.STATEMENT),
                topic=flow.topic, topic_keywords=flow.triggers + (flow.topic,),
                prompt_id=f"flow:{flow.id}:starter",
                effects=[Effect("flow_enter", {"flow_id": flow.id})])
        return None

    # -- finalization ----------------------------------------------------

    def _finalize(self, state: SessionState, utt: AnnotatedUtterance | None,
                  ranked: RankedPool, mood, flow_debug: dict,
                  ended: bool = False, user_text: str | None = None,
                  record: bool = True) -> TurnResult:
        winner = ranked.winner.candidate

        merged_text, merged_id = merge(winner, ranked,
                                       partner_min_confidence=self.config.base_confidence)
        hedged_text = merged_text
        hedge_rule = None
        if utt is not None and not winner.priority:
            hedged_text, hedge_rule = apply_hedge(merged_text, utt, self.hedge_rules,
                                                  state.rng)
        display, ssml = emit_ssml(hedged_text)
        reply = FinalReply(display_text=display, ssml_text=ssml,
                           winner_prompt_id=winner.prompt_id,
                           merged_prompt_id=merged_id, hedge_rule=hedge_rule)

        if record:
            had_offer = "standing_offer" in state.state_vars
            offer_renewed = False

            if utt is not None:
                record_turn(state, "user", user_text or utt.raw_text, annotation=utt)

            state.surfaced_prompts.add(winner.prompt_id)
            if merged_id:
                state.surfaced_prompts.add(merged_id)
            for effect in winner.effects:
                if effect.kind == "standing_offer":
                    offer_renewed = True
                self._apply_effect(state, effect)

            if winner.source_module == OOD_MODULE:
                state.state_vars["ood_streak"] = state.state_vars.get("ood_streak", 0) + 1
            else:
                state.state_vars.pop("ood_streak", None)
            if had_offer and not offer_renewed:
                state.state_vars.pop("standing_offer", None)

            reply_entities = [m.entity_id
                              for m in detect_entities(tokenize(display), self.graph)]
            record_turn(state, "agent", display, entities=reply_entities)
            flush_to_ltm(state, self.ltm, self.config.flush_threshold)
        if ended:
            state.ended = True

        debug = self._debug_payload(state, ranked, flow_debug, mood)
        return TurnResult(reply=reply, debug=debug, ended=state.ended)

    def _apply_effect(self, state: SessionState, effect: Effect) -> None:
        kind, payload = effect.kind, effect.payload
        if kind == "set_active":
            state.active_module = payload["module"]
        elif kind == "release_module":
            self._release_active(state, payload["module"],
                                 state.state_vars.get("rec_topic"))
        elif kind == "set_state_var":
            state.state_vars[payload["name"]] = payload["value"]
            if payload["name"] == "rec_topic":
                state.state_vars["active_topic"] = payload["value"]
        elif kind == "clear_state_var":
            state.state_vars.pop(payload["name"], None)
        elif kind == "surface_prompt":
            state.surfaced_prompts.add(payload["prompt_id"])
        elif kind == "mark_entities_explored":
            state.explored_entities.update(payload["entities"])
        elif kind == "mark_module_explored":
            state.explored_modules.add(payload["module"])
        elif kind == "standing_offer":
            state.state_vars["standing_offer"] = payload["flow_id"]
        elif kind == "suppress_intimacy":
            state.state_vars["intimacy_suppressed"] = True
        elif kind == "remember_interest":
            if payload.get("topic"):
                state.user_profile.interests.add(payload["topic"])
        elif kind == "flow_enter":
            flow = self.flows[payload["flow_id"]]
            state.flow_state = {flow.id: list(flow.entry_expects)}
            state.active_module = f"flow:{flow.id}"
            state.explored_topics.add(flow.topic)
            state.state_vars["active_topic"] = flow.topic
        elif kind == "flow_commit":
            flow = self.flows[payload["flow_id"]]
            result = flowmod.step(flow, state, payload["node_id"], self.registry)
            if result.exited:
                self._release_active(state, f"flow:{flow.id}", flow.topic)
            elif result.delegate is not None:
                # Handoff: the delegated module's own effects set the new active module.
                state.explored_modules.add(f"flow:{flow.id}")
        else:
            logger.warning("unknown effect %s ignored", kind)

    def _release_active(self, state: SessionState, module: str,
                        topic: str | None) -> None:
        """A system-initiative engagement completed; count it for feedback."""
        if state.active_module == module:
            state.active_module = None
        state.explored_modules.add(module)
        state.state_vars["completions_since_feedback"] = (
            state.state_vars.get("completions_since_feedback", 0) + 1)
        if module == "storytelling":
            desc = "a story"
        elif module == "recursive":
            desc = f"some {topic} questions" if topic else "some questions"
        elif module.startswith("flow:"):
            desc = topic or module.split(":", 1)[1]
        else:
            desc = topic or "that"
        state.state_vars["last_completed_desc"] = desc
        state.state_vars.pop("active_topic", None)

    def _debug_payload(self, state: SessionState, ranked: RankedPool,
                       flow_debug: dict, mood) -> dict:
        pool = []
        winner_id = None
        for i, entry in enumerate(ranked.scored):
            cid = f"c{i}"
            if entry is ranked.winner:
                winner_id = cid
            pool.append({
                "id": cid,
                "text": entry.candidate.text,
                "source_module": entry.candidate.source_module,
                "base_confidence": entry.candidate.confidence,
                "context": entry.context,
                "loss": {"incoherence": entry.loss.incoherence,
                         "repeat": entry.loss.repeat,
                         "sentLen": entry.loss.sent_len},
                "final_confidence": entry.final,
                "invalidated": entry.invalidated,
                "priority": entry.candidate.priority,
                "topic": entry.candidate.topic,
                "entities": list(entry.candidate.entities),
                "discourse_relation": (entry.candidate.discourse_relation.value
                                       if entry.candidate.discourse_relation else None),
                "prompt_id": entry.candidate.prompt_id,
            })
        return {
            "pool": pool,
            "winner_id": winner_id,
            "winner_via": ranked.winner_via,
            "active_module": state.active_module,
            "flow": flow_debug,
            "discourse_relation": (ranked.winner.candidate.discourse_relation.value
                                   if ranked.winner.candidate.discourse_relation else None),
            "mood": mood.value if mood else None,
        }

    # ------------------------------------------------------------------
    # Simulation harness

    def simulate(self, script: Sequence[str | dict], seed: int = 7) -> dict:
        """Run a scripted session; returns the transcript with per-turn debug.

        Script entries are utterance strings or objects with optional
        ``asr`` hypotheses and ``expect_*`` assertions. Assertion failures
        are collected, not raised.
        """
        session_id = self.create_session(seed=seed)
        transcript: dict = {"seed": seed, "turns": [], "failures": []}
        for lineno, entry in enumerate(script, 1):
            if isinstance(entry, str):
                entry = {"text": entry}
            hypotheses = [AsrHypothesis(h["text"], h["score"])
                          for h in entry.get("asr", [])] or None
            result = self.handle_turn(session_id,
                                      text=entry.get("text"),
                                      hypotheses=hypotheses)
            turn = {
                "line": lineno,
                "user": entry.get("text") or "",
                "reply": result.reply.display_text,
                "ssml": result.reply.ssml_text,
                "ended": result.ended,
                "debug": result.debug,
            }
            transcript["turns"].append(turn)
            for failure in _check_expectations(entry, result):
                transcript["failures"].append({"line": lineno, "failure": failure})
            if result.ended:
                break
        return transcript

    def simulate_file(self, path: Path, seed: int = 7) -> dict:
        if not path.is_file():
            raise InputError(f"script file {path} not found")
        script = []
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("{"):
                try:
                    script.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise InputError(f"{path}:{lineno}: bad script line: {exc}") from exc
            else:
                script.append(line)
        return self.simulate(script, seed=seed)


def _check_expectations(entry: dict, result: TurnResult) -> list[str]:
    failures = []
    winner = None
    for item in result.debug["pool"]:
        if item["id"] == result.debug["winner_id"]:
            winner = item
    if (expected := entry.get("expect_contains")) is not None:
        if expected.lower() not in result.reply.display_text.lower():
            failures.append(f"reply {result.reply.display_text!r} "
                            f"does not contain {expected!r}")
    if (expected := entry.get("expect_module")) is not None:
        if winner is None or winner["source_module"] != expected:
            failures.append(f"winner module {winner and winner['source_module']!r} "
                            f"!= {expected!r}")
    if (expected := entry.get("expect_relation")) is not None:
        if result.debug.get("discourse_relation") != expected:
            failures.append(f"relation {result.debug.get('discourse_relation')!r} "
                            f"!= {expected!r}")
    if (expected := entry.get("expect_entities")) is not None:
        have = set(winner["entities"]) if winner else set()
        missing = [e for e in expected if e not in have]
        if missing:
            failures.append(f"winner entities {sorted(have)} missing {missing}")
    if (expected := entry.get("expect_flow_node")) is not None:
        if result.debug.get("flow", {}).get("matched_node") != expected:
            failures.append(f"flow node {result.debug.get('flow', {}).get('matched_node')!r} "
                            f"!= {expected!r}")
    if (expected := entry.get("expect_ended")) is not None:
        if result.ended != expected:
            failures.append(f"ended {result.ended} != {expected}")
    return failures
