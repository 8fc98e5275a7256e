import random
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, strategies as st

from opendialog.candidates import (
    MERGE_NONE, MERGE_QUESTION, MERGE_STATEMENT, ResponseCandidate,
)
from opendialog.errors import EngineError
from opendialog.nlu import DialogueAct
from opendialog.postprocess import (
    SSML_WHITELIST, apply_hedge, emit_ssml, merge, strip_tags,
)
from opendialog.ranker import RankingContext, rank


def cand(text, module="retrieval", confidence=0.9, role=MERGE_NONE, **kwargs):
    kwargs.setdefault("dialogue_act", DialogueAct.STATEMENT)
    return ResponseCandidate(text=text, source_module=module, confidence=confidence,
                             mergeable_role=role, **kwargs)


def ranked_pool(candidates):
    pool = candidates + [cand("fallback", module="out_of_domain", confidence=0.5)]
    return rank(pool, RankingContext(), random.Random(0))


class TestHedges:
    def test_opinion_hedge(self, engine):
        utt = engine.annotator.annotate("I like blue")
        text, rule = apply_hedge("Why though?", utt, engine.hedge_rules, random.Random(1))
        assert text.startswith(("I see,", "Oh really,"))
        assert rule is not None

    def test_thanks_hedge(self, engine):
        utt = engine.annotator.annotate("thank you so much")
        text, _ = apply_hedge("No problem.", utt, engine.hedge_rules, random.Random(1))
        assert text.startswith("You're welcome.")

    def test_kidding_hedge(self, engine):
        utt = engine.annotator.annotate("are you kidding me")
        text, _ = apply_hedge("Really.", utt, engine.hedge_rules, random.Random(1))
        assert text.startswith("I kid you not.")

    def test_no_rule_no_hedge(self, engine):
        utt = engine.annotator.annotate("the sky exists")
        text, rule = apply_hedge("Indeed.", utt, engine.hedge_rules, random.Random(1))
        assert text == "Indeed." and rule is None

    def test_at_most_one_hedge(self, engine):
        utt = engine.annotator.annotate("thanks, I like blue")
        text, _ = apply_hedge("Sure.", utt, engine.hedge_rules, random.Random(1))
        assert text.count("You're welcome.") <= 1
        assert not text.startswith("You're welcome. I see,")

    def test_seeded_variant_choice_deterministic(self, engine):
        utt = engine.annotator.annotate("I like blue")
        picks = {apply_hedge("X", utt, engine.hedge_rules, random.Random(9))[0]
                 for _ in range(5)}
        assert len(picks) == 1


class TestMerge:
    def test_statement_picks_up_question(self):
        statement = cand("The Matrix is a 1999 film.", role=MERGE_STATEMENT,
                         confidence=0.95, entities=("the_matrix",))
        question = cand("What are your thoughts about the matrix?", role=MERGE_QUESTION,
                        confidence=0.9, entities=("the_matrix",),
                        dialogue_act=DialogueAct.OPEN_QUESTION)
        pool = ranked_pool([statement, question])
        text, partner = merge(statement, pool)
        assert text == ("The Matrix is a 1999 film. "
                        "What are your thoughts about the matrix?")
        assert partner == question.prompt_id

    def test_winner_question_untouched(self):
        question = cand("Any thoughts?", role=MERGE_QUESTION, confidence=0.9)
        pool = ranked_pool([question])
        assert merge(question, pool) == ("Any thoughts?", None)

    def test_no_shared_ground_no_merge(self):
        statement = cand("Statement about paris.", role=MERGE_STATEMENT,
                         confidence=0.95, entities=("paris",))
        question = cand("Thoughts on dinosaurs?", role=MERGE_QUESTION,
                        confidence=0.9, entities=("t_rex",))
        pool = ranked_pool([statement, question])
        assert merge(statement, pool)[1] is None

    def test_weak_partner_skipped(self):
        statement = cand("Statement about paris.", role=MERGE_STATEMENT,
                         confidence=0.95, entities=("paris",))
        weak = cand("Paris question?", role=MERGE_QUESTION, confidence=0.2,
                    entities=("paris",))
        pool = rank([statement, weak,
                     cand("fallback", module="out_of_domain", confidence=0.5)],
                    RankingContext(), random.Random(0))
        # the weak question's final is base 0.6 (context floor); threshold 0.6 keeps it
        text, partner = merge(statement, pool, partner_min_confidence=0.7)
        assert partner is None

    def test_topic_counts_as_shared_ground(self):
        statement = cand("Fact about reefs.", role=MERGE_STATEMENT, confidence=0.95,
                         topic="science")
        question = cand("More science?", role=MERGE_QUESTION, confidence=0.9,
                        topic="science")
        pool = ranked_pool([statement, question])
        assert merge(statement, pool)[1] == question.prompt_id

    def test_highest_confidence_partner_wins(self):
        statement = cand("Shared fact.", role=MERGE_STATEMENT, confidence=0.95,
                         topic="science")
        weak = cand("Weak question?", role=MERGE_QUESTION, confidence=0.85,
                    topic="science")
        strong = cand("Strong question?", role=MERGE_QUESTION, confidence=0.9,
                      topic="science")
        pool = ranked_pool([statement, weak, strong])
        assert merge(statement, pool)[1] == strong.prompt_id


class TestSsml:
    def test_pause_marker(self):
        display, ssml = emit_ssml("Hello. [[pause:500ms]] Goodbye.")
        assert display == "Hello. Goodbye."
        assert '<break time="500ms"/>' in ssml
        assert ssml.startswith("<speak>") and ssml.endswith("</speak>")

    def test_plain_text_wrapped(self):
        display, ssml = emit_ssml("Just words.")
        assert display == "Just words."
        assert ssml == "<speak>Just words.</speak>"

    def test_unknown_marker_named(self):
        with pytest.raises(EngineError, match="bogus"):
            emit_ssml("[[bogus]]")

    def test_emphasis_and_sayas(self):
        display, ssml = emit_ssml("A [[emph:crunchy]] pillow from [[sayas:characters:NASA]].")
        assert display == "A crunchy pillow from NASA."
        assert "<emphasis>crunchy</emphasis>" in ssml
        assert '<say-as interpret-as="characters">NASA</say-as>' in ssml

    def test_prosody(self):
        display, ssml = emit_ssml("[[prosody:rate=slow:Slow and steady.]]")
        assert display == "Slow and steady."
        assert '<prosody rate="slow">Slow and steady.</prosody>' in ssml

    def test_round_trip_strip(self):
        samples = [
            "Hello. [[pause:500ms]] Goodbye.",
            "A [[emph:big]] deal.",
            "[[prosody:rate=slow:Careful now.]] Done.",
            "No markers at all.",
        ]
        for text in samples:
            display, ssml = emit_ssml(text)
            assert strip_tags(ssml) == display

    def test_well_formed_and_whitelisted(self, engine):
        for story in engine.ltm.stories.values():
            for chunk in story.chunks:
                _, ssml = emit_ssml(f"{chunk.text} {chunk.tag_question}")
                root = ET.fromstring(ssml)
                assert root.tag == "speak"
                for element in root.iter():
                    assert element.tag in ("speak",) + SSML_WHITELIST

    @given(st.text(alphabet=st.characters(blacklist_characters="[]{}<>&",
                                          min_codepoint=32, max_codepoint=126),
                   max_size=60))
    def test_plain_text_always_round_trips(self, text):
        display, ssml = emit_ssml(text)
        assert strip_tags(ssml) == display
