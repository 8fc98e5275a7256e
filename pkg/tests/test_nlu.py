import pytest
from hypothesis import given, strategies as st

from opendialog.errors import InputError
from opendialog.nlu import (
    ASR_ACCEPTED, ASR_NEEDS_CLARIFICATION, AsrHypothesis, DialogueAct, Mood,
    check_profanity, classify_dialogue_act, classify_mood, detect_entities,
    preprocess_asr, score_sentiment, tokenize,
)


def hyp(score, text="something"):
    return AsrHypothesis(text=text, score=score)


class TestAsrFilter:
    def test_single_high_score_accepted(self):
        status, text = preprocess_asr([hyp(0.9, "tell me a story")], 0.45)
        assert status == ASR_ACCEPTED
        assert text == "tell me a story"

    def test_low_mean_needs_clarification(self):
        # mean(0.2, 0.3) = 0.25 < 0.45
        status, kept = preprocess_asr([hyp(0.2, "a"), hyp(0.3, "b")], 0.45)
        assert status == ASR_NEEDS_CLARIFICATION
        assert [h.text for h in kept] == ["a", "b"]  # every interpretation retained

    def test_boundary_is_inclusive(self):
        status, _ = preprocess_asr([hyp(0.45)], 0.45)
        assert status == ASR_ACCEPTED

    def test_top_scored_hypothesis_wins(self):
        status, text = preprocess_asr([hyp(0.5, "worse"), hyp(0.9, "better")], 0.45)
        assert status == ASR_ACCEPTED
        assert text == "better"

    def test_empty_list_rejected(self):
        with pytest.raises(InputError):
            preprocess_asr([], 0.45)

    @given(st.lists(st.floats(min_value=0, max_value=1), min_size=1, max_size=8),
           st.floats(min_value=0, max_value=1))
    def test_gate_matches_mean_oracle(self, scores, threshold):
        status, _ = preprocess_asr([hyp(s) for s in scores], threshold)
        mean = sum(scores) / len(scores)
        assert (status == ASR_ACCEPTED) == (mean >= threshold)

    def test_bad_hypothesis_rejected(self):
        with pytest.raises(InputError):
            AsrHypothesis(text="  ", score=0.5)
        with pytest.raises(InputError):
            AsrHypothesis(text="ok", score=1.5)


class TestProfanity:
    LEXICON = {"dang", "frick"}

    def test_clean_text(self):
        assert check_profanity("hello there", self.LEXICON) is False

    def test_lexicon_hit(self):
        assert check_profanity("well DANG it", self.LEXICON) is True

    def test_case_insensitive_no_false_trigger(self):
        assert check_profanity("HELLO There", self.LEXICON) is False

    def test_punctuation_stripped(self):
        assert check_profanity("frick!", self.LEXICON) is True


class TestIntent:
    def test_unknown_when_no_rule_fires(self, engine):
        assert engine.nlu.intents.classify(tokenize("zxqv blort")) == "unknown"

    def test_empty_tokens_error(self, engine):
        with pytest.raises(InputError):
            engine.nlu.intents.classify([])

    def test_inventory_size(self, engine):
        assert len(engine.nlu.intents.inventory) >= 8

    @given(st.text(alphabet="abcdefghij ", min_size=1, max_size=40))
    def test_deterministic_and_context_free(self, engine, text):
        tokens = tokenize(text) or ["x"]
        assert engine.nlu.intents.classify(tokens) == engine.nlu.intents.classify(tokens)


class TestEntities:
    def test_paris(self, engine):
        mentions = detect_entities(tokenize("we are planning to go to paris"), engine.graph)
        assert [m.entity_id for m in mentions] == ["paris"]

    def test_longest_match_wins(self, engine):
        mentions = detect_entities(tokenize("i am going to see the eiffel tower"),
                                   engine.graph)
        assert [m.entity_id for m in mentions] == ["eiffel_tower"]
        (mention,) = mentions
        assert mention.span[1] - mention.span[0] >= 2

    def test_no_entities(self, engine):
        assert detect_entities(tokenize("hello world"), engine.graph) == []

    def test_spans_never_overlap(self, engine):
        text = "the louvre museum holds the mona lisa by leonardo da vinci in paris"
        mentions = detect_entities(tokenize(text), engine.graph)
        assert len(mentions) >= 3
        for a, b in zip(mentions, mentions[1:]):
            assert a.span[1] <= b.span[0]

    def test_salience_in_unit_range(self, engine):
        for m in detect_entities(tokenize("paris and the mona lisa"), engine.graph):
            assert 0 <= m.salience <= 1


class TestSentiment:
    def test_positive(self, engine):
        assert score_sentiment(tokenize("i'm doing good"), engine.nlu.sentiment) > 0.25

    def test_negation_flips(self, engine):
        assert score_sentiment(tokenize("not good"), engine.nlu.sentiment) < -0.25

    def test_neutral_when_nothing_matches(self, engine):
        assert score_sentiment(tokenize("the sky exists"), engine.nlu.sentiment) == 0.0

    def test_clamped(self, engine):
        score = score_sentiment(tokenize("awesome amazing fantastic wonderful"),
                                engine.nlu.sentiment)
        assert -1.0 <= score <= 1.0


class TestDialogueActs:
    @pytest.mark.parametrize("text,act", [
        ("do you know anything about pizza", DialogueAct.YES_NO_QUESTION),
        ("what is the capitol city of mexico", DialogueAct.OPEN_QUESTION),
        ("i like blue", DialogueAct.PROVIDE_OPINION),
        ("tell me a story", DialogueAct.COMMAND),
        ("hello there", DialogueAct.GREETING),
        ("the tortoise won", DialogueAct.STATEMENT),
    ])
    def test_heuristics(self, text, act):
        assert classify_dialogue_act(tokenize(text), text) == act


class TestMood:
    def _annotate(self, engine, text):
        return engine.annotator.annotate(text)

    def test_positive(self, engine):
        assert classify_mood(self._annotate(engine, "I'm doing good."), []) == Mood.POSITIVE

    def test_offended(self, engine):
        assert classify_mood(self._annotate(engine, "Say sorry!"), []) == Mood.OFFENDED

    def test_bored_keyword(self, engine):
        assert classify_mood(self._annotate(engine, "Bored."), []) == Mood.BORED

    def test_bored_dont_know_repetition(self, engine):
        utt = self._annotate(engine, "i don't know")
        history = ["i don't know", "i don't know"]
        assert classify_mood(utt, history) == Mood.BORED

    def test_hostile_on_profanity(self, engine):
        utt = self._annotate(engine, "this is bullshit")
        assert utt.profane
        assert classify_mood(utt, []) == Mood.HOSTILE

    def test_negative(self, engine):
        assert classify_mood(self._annotate(engine, "Not good."), []) == Mood.NEGATIVE

    def test_neutral(self, engine):
        assert classify_mood(self._annotate(engine, "the sky exists"), []) == Mood.NEUTRAL


class TestAnnotate:
    def test_empty_input_error(self, engine):
        with pytest.raises(InputError):
            engine.annotator.annotate("   ")

    def test_deterministic(self, engine):
        a = engine.annotator.annotate("do you know anything about pizza")
        b = engine.annotator.annotate("do you know anything about pizza")
        assert a == b

    def test_pizza_example(self, engine):
        utt = engine.annotator.annotate("do you know anything about pizza")
        assert utt.intent == "request_discuss_topic"
        assert utt.dialogue_act == DialogueAct.YES_NO_QUESTION

    def test_i_like_blue(self, engine):
        utt = engine.annotator.annotate("I like blue")
        assert utt.dialogue_act == DialogueAct.PROVIDE_OPINION
        assert utt.sentiment > 0

    def test_content_words_subset_of_tokens(self, engine):
        utt = engine.annotator.annotate("what is the capitol city of mexico")
        assert set(utt.content_words) <= set(utt.tokens)
        assert utt.content_words == ["capitol", "city", "mexico"]

    def test_needs_clarification_neutral_defaults(self, engine):
        utt = engine.annotator.annotate(hypotheses=[hyp(0.1, "mumble"), hyp(0.2, "grumble")])
        assert utt.asr_status == ASR_NEEDS_CLARIFICATION
        assert utt.intent == "unknown"
        assert utt.entities == [] and utt.tokens == []
        assert utt.sentiment == 0.0
