import copy

import pytest

from opendialog.candidates import CONF_DIRECT
from opendialog.memory import SessionState, init_agent_profile, record_turn
from opendialog.modules import MODULE_PROPOSERS, intimacy, ood, propose
from opendialog.nlu import DialogueAct, Mood


@pytest.fixture
def state(engine):
    state = SessionState(session_id="m", rng_seed=3)
    state.agent_profile = init_agent_profile(engine.ltm.opinion_pack, 3)
    return state


def annotate(engine, text):
    return engine.annotator.annotate(text)


def run(engine, state, module, text, mood=Mood.NEUTRAL):
    return propose(module, engine.ctx, state, annotate(engine, text), mood)


class TestOpinions:
    def test_request_opinion_with_profile_entry(self, engine, state):
        (c,) = run(engine, state, "opinions", "do you like watchmen")
        assert "watchmen" in c.text.lower()
        assert c.text.endswith("And you? What's your opinion?")
        assert c.confidence == CONF_DIRECT

    def test_provide_opinion_solicits_justification(self, engine, state):
        (c,) = run(engine, state, "opinions", "I like blue")
        assert c.text == "Why do you feel positively about blue?"
        assert c.discourse_relation is not None and c.discourse_relation.value == "contingency"

    def test_justification_is_contingency(self, engine, state):
        (c,) = run(engine, state, "opinions", "why do you like wine")
        assert c.discourse_relation.value == "contingency"
        assert c.text == state.agent_profile.opinion_for("wine").justification

    def test_unknown_entity_falls_back_to_solicitation(self, engine, state):
        (c,) = run(engine, state, "opinions", "do you like central park")
        assert c.dialogue_act == DialogueAct.OPEN_QUESTION
        assert "central park" in c.text.lower()

    def test_concept_key_matches_without_entity(self, engine, state):
        (c,) = run(engine, state, "opinions", "what's your favorite color")
        assert state.agent_profile.opinion_for("color").text in c.text


class TestQa:
    def test_low_content_bot_directed_probes(self, engine, state):
        (c,) = run(engine, state, "qa", "how is it that you are smart?")
        assert "i am smart" in c.text.lower()

    def test_factual_question_answered_from_cascade(self, engine, state):
        (c,) = run(engine, state, "qa", "what is the capitol city of mexico?")
        assert c.text == "The capitol city of Mexico is Mexico City."

    def test_pronoun_resolution_feeds_query(self, engine, state):
        record_turn(state, "agent", "answer", entities=["mexico", "mexico_city"])
        (c,) = run(engine, state, "qa", "what is it's population?")
        assert "8.8 million" in c.text

    def test_story_structured_answer(self, engine, state):
        state.active_module = "storytelling"
        state.state_vars["story_active"] = "adventure_moses"
        (c,) = run(engine, state, "qa", "no, what kind of pet is it?")
        assert c.text == "Moses is a chinchilla."

    def test_inability_phrase_when_everything_fails(self, engine, state):
        (c,) = run(engine, state, "qa", "what is the national dish of atlantis made from?")
        assert engine.config.inability_phrase in c.text

    def test_non_questions_ignored(self, engine, state):
        assert run(engine, state, "qa", "i had a sandwich") == []


class TestWellbeing:
    def test_bored_gets_declarative_suggestion(self, engine, state):
        (c,) = run(engine, state, "wellbeing", "bored.", mood=Mood.BORED)
        assert not c.dialogue_act.is_question()
        assert c.confidence == CONF_DIRECT

    def test_offended_gets_apology_and_suppression(self, engine, state):
        (c,) = run(engine, state, "wellbeing", "say sorry!", mood=Mood.OFFENDED)
        assert "sorry" in c.text.lower()
        assert any(e.kind == "suppress_intimacy" for e in c.effects)

    def test_neutral_silent(self, engine, state):
        assert run(engine, state, "wellbeing", "the sky exists", mood=Mood.NEUTRAL) == []

    def test_positive_low_confidence(self, engine, state):
        (c,) = run(engine, state, "wellbeing", "i'm doing great", mood=Mood.POSITIVE)
        assert c.confidence < 0.5


class TestIntimacy:
    def test_allowance_filters_levels(self, engine, state):
        item = intimacy.next_question(engine.ctx, state)
        assert item.intimacy_level == 1

    def test_allowance_growth_unlocks_level_two(self, engine, state):
        for level_one in [i for i in engine.ltm.items.values()
                          if i.kind == "intimacy_question" and i.intimacy_level == 1]:
            state.surfaced_prompts.add(f"intimacy:{level_one.id}")
        assert intimacy.next_question(engine.ctx, state) is None  # level 2 still locked
        for _ in range(10):
            record_turn(state, "user", "chatting along")
        item = intimacy.next_question(engine.ctx, state)
        assert item is not None and item.intimacy_level == 2

    def test_suppressed_for_hostile(self, engine, state):
        assert intimacy.next_question(engine.ctx, state, Mood.HOSTILE) is None

    def test_exhausted_returns_none(self, engine, state):
        for item in engine.ltm.items.values():
            if item.kind == "intimacy_question":
                state.surfaced_prompts.add(f"intimacy:{item.id}")
        state.user_profile.intimacy_allowance = 99
        assert intimacy.next_question(engine.ctx, state) is None

    def test_reaction_uses_agent_answer(self, engine, state):
        state.active_module = "intimacy"
        state.state_vars["intimacy_pending"] = "intimacy_01_proud"
        (c,) = run(engine, state, "intimacy", "my face.")
        assert "for me personally you might ask?" in c.text
        assert "natural language processing" in c.text


class TestStories:
    def test_offer_on_trigger(self, engine, state):
        (c,) = run(engine, state, "storytelling", "tell me a story")
        assert c.text == "Did I ever tell you one time my pet Moses really scared me?"
        assert c.confidence == CONF_DIRECT

    def test_affirmative_advances_chunks(self, engine, state):
        state.active_module = "storytelling"
        state.state_vars.update(story_active="adventure_moses", story_cursor=-1)
        (c,) = run(engine, state, "storytelling", "yes")
        story = engine.ltm.stories["adventure_moses"]
        assert c.text.endswith(story.chunks[0].tag_question)
        assert any(e.kind == "set_state_var" and e.payload["value"] == 0
                   for e in c.effects)

    def test_every_chunk_ends_with_tag_question(self, engine, state):
        state.active_module = "storytelling"
        for story in engine.ltm.stories.values():
            for cursor in range(len(story.chunks)):
                state.state_vars.update(story_active=story.id, story_cursor=cursor - 1)
                (c,) = run(engine, state, "storytelling", "sure")
                assert c.text.endswith(story.chunks[cursor].tag_question)

    def test_exhausted_story_closes_and_releases(self, engine, state):
        story = engine.ltm.stories["adventure_moses"]
        state.active_module = "storytelling"
        state.state_vars.update(story_active=story.id,
                                story_cursor=len(story.chunks) - 1)
        (c,) = run(engine, state, "storytelling", "go on")
        assert any(e.kind == "release_module" for e in c.effects)

    def test_cursor_never_decreases(self, engine, state):
        state.active_module = "storytelling"
        state.state_vars.update(story_active="adventure_moses", story_cursor=1)
        (c,) = run(engine, state, "storytelling", "yes")
        new_cursor = [e.payload["value"] for e in c.effects
                      if e.kind == "set_state_var" and e.payload["name"] == "story_cursor"]
        assert new_cursor == [2]


class TestRecommend:
    def test_comparison_question(self, engine, state):
        (c,) = run(engine, state, "recommendation", "i am going to see the eiffel tower")
        assert "louvre" in c.text.lower()
        assert c.discourse_relation.value == "comparison"
        assert c.dialogue_act == DialogueAct.YES_NO_QUESTION

    def test_all_explored_is_silent(self, engine, state):
        state.explored_entities = set(engine.graph.entities)
        state.active_module = "recommendation"
        state.state_vars["recommend_focus"] = "louvre"
        assert run(engine, state, "recommendation", "anything else?") == []

    def test_unknown_entity_silent(self, engine, state):
        assert run(engine, state, "recommendation", "i love quokkas") == []


class TestRecursive:
    def test_loop_offer_then_first_fact(self, engine, state):
        (offer,) = run(engine, state, "recursive", "tell me some science facts")
        assert offer.text == "Do you want to hear some science facts?"
        state.active_module = "recursive"
        state.state_vars.update(rec_mode="loop", rec_topic="science", rec_offer=True)
        (first,) = run(engine, state, "recursive", "yes")
        assert first.text.startswith("Did you know that")
        assert "Great Barrier Reef" in first.text

    def test_loop_continues_with_unexplored(self, engine, state):
        state.active_module = "recursive"
        state.state_vars.update(rec_mode="loop", rec_topic="science")
        state.surfaced_prompts.add("recursive:fact_sci_01_reef")
        (c,) = run(engine, state, "recursive", "sure why not")
        assert "bacterial cells" in c.text
        assert c.text.startswith("How about this one.")

    def test_sequence_reacts_with_agent_answer(self, engine, state):
        state.active_module = "recursive"
        state.state_vars.update(rec_mode="sequence", rec_topic="books",
                                seq_pending="wyr_books_01_nonfiction")
        (c,) = run(engine, state, "recursive", "nonfiction")
        assert c.text.startswith("For me personally?")
        assert "curl up underneath a blanket" in c.text
        assert "another books question" in c.text

    def test_change_topic_switches_sequence(self, engine, state):
        state.active_module = "recursive"
        state.state_vars.update(rec_mode="sequence", rec_topic="books")
        (c,) = run(engine, state, "recursive", "no talk about video games")
        assert c.topic == "video games"
        assert "video game" in c.text.lower()

    def test_change_topic_without_target_exits(self, engine, state):
        state.active_module = "recursive"
        state.state_vars.update(rec_mode="loop", rec_topic="science")
        (c,) = run(engine, state, "recursive", "no can we do something else")
        assert any(e.kind == "release_module" for e in c.effects)

    def test_exhausted_topic_offers_menu(self, engine, state):
        state.active_module = "recursive"
        state.state_vars.update(rec_mode="loop", rec_topic="science")
        for item in engine.ltm.items.values():
            state.surfaced_prompts.add(f"recursive:{item.id}")
        (c,) = run(engine, state, "recursive", "more please")
        assert any(e.kind == "release_module" for e in c.effects)
        assert "talk about" in c.text


class TestOod:
    def test_always_exactly_one(self, engine, state):
        for text in ("zxqv blort", "i love quokkas", "tell me everything"):
            candidates = ood.propose(engine.ctx, state, annotate(engine, text),
                                     Mood.NEUTRAL)
            assert len(candidates) == 1

    def test_wellbeing_transition_first(self, engine, state):
        (c,) = ood.propose(engine.ctx, state, annotate(engine, "zxqv blort"),
                           Mood.NEUTRAL)
        assert "How is your day going?" in c.text

    def test_entity_strategy_when_unhandled(self, engine, state):
        (c,) = ood.propose(engine.ctx, state, annotate(engine, "central park though"),
                           Mood.NEUTRAL, entity_handled=False)
        assert "central_park" in c.entities

    def test_menu_after_consecutive_fallbacks(self, engine, state):
        state.state_vars["ood_streak"] = 1
        (c,) = ood.propose(engine.ctx, state, annotate(engine, "zxqv"), Mood.NEUTRAL)
        assert "talk about" in c.text


class TestPurity:
    def test_fixed_state_gives_identical_candidates(self, engine, state):
        record_turn(state, "user", "hello paris",
                    annotation=annotate(engine, "hello paris"))
        utt = annotate(engine, "i am going to see the eiffel tower")
        for module in MODULE_PROPOSERS:
            first = propose(module, engine.ctx, copy.deepcopy(state), utt, Mood.NEUTRAL)
            second = propose(module, engine.ctx, copy.deepcopy(state), utt, Mood.NEUTRAL)
            assert first == second, module

    def test_mood_suppression_invariant(self, engine, state):
        for mood in (Mood.OFFENDED, Mood.HOSTILE):
            candidates = propose("intimacy", engine.ctx, state,
                                 annotate(engine, "ask me something personal"), mood)
            assert all(c.confidence == 0 for c in candidates)  # vacuously: none emitted
            assert candidates == []
