import random

import pytest
from hypothesis import given, settings, strategies as st

from opendialog.candidates import ResponseCandidate
from opendialog.errors import EngineError
from opendialog.nlu import DialogueAct
from opendialog.ranker import (
    OOD_MODULE, RankingContext, WINNER_BY_OOD, WINNER_BY_PRIORITY, WINNER_BY_SCORE,
    context_score, loss, rank,
)


def cand(text="hello there", module="retrieval", confidence=0.6, **kwargs):
    kwargs.setdefault("dialogue_act", DialogueAct.STATEMENT)
    return ResponseCandidate(text=text, source_module=module, confidence=confidence,
                             **kwargs)


def ood(confidence=0.5):
    return cand(text="fallback text", module=OOD_MODULE, confidence=confidence,
                prompt_id="ood:x")


class TestContextScore:
    def test_direct_trigger_scores_one(self):
        c = cand(text="Video games are great. Want to talk about them?",
                 topic="video games", topic_keywords=("video games", "gaming"))
        ctx = RankingContext(utterance_text="i like video games")
        assert context_score(c, ctx) == 1.0

    def test_unrelated_topic_scores_base(self):
        c = cand(text="Video games are great.", topic="video games",
                 topic_keywords=("video games",))
        ctx = RankingContext(utterance_text="i like dogs",
                             utterance_content_words=frozenset({"dogs"}))
        assert context_score(c, ctx) == 0.6

    def test_one_shared_entity_adds_two_tenths(self):
        c = cand(text="a reply", entities=("paris",))
        ctx = RankingContext(utterance_text="thinking about paris",
                             utterance_entities=frozenset({"paris"}))
        assert context_score(c, ctx) == pytest.approx(0.8)

    def test_shared_content_word_adds_one_tenth(self):
        c = cand(text="the louvre is huge")
        ctx = RankingContext(utterance_text="tell me about the louvre",
                             utterance_content_words=frozenset({"louvre"}))
        assert context_score(c, ctx) == pytest.approx(0.7)

    def test_capped_at_one(self):
        c = cand(text="paris louvre museum art travel", entities=("paris", "louvre"))
        ctx = RankingContext(
            utterance_text="paris louvre museum art travel",
            utterance_content_words=frozenset({"paris", "louvre", "museum", "art", "travel"}),
            utterance_entities=frozenset({"paris", "louvre"}))
        assert context_score(c, ctx) <= 1.0


class TestLoss:
    def test_incoherence_for_foreign_module(self):
        ctx = RankingContext(active_module="storytelling")
        assert loss(cand(module="recursive"), ctx).incoherence == 0.15
        assert loss(cand(module="storytelling"), ctx).incoherence == 0.0

    def test_repeat_penalty(self):
        c = cand()
        ctx = RankingContext(surfaced_prompts={c.prompt_id})
        assert loss(c, ctx).repeat == 0.05

    def test_system_initiative_exempt_from_length(self):
        long_text = " ".join(["word"] * 50)
        ctx = RankingContext()
        assert loss(cand(text=long_text, module="storytelling"), ctx).sent_len == 0.0

    def test_mixed_initiative_length_penalty(self):
        long_text = " ".join(["word"] * 40)  # 10 tokens over the default 30
        ctx = RankingContext()
        assert loss(cand(text=long_text, module="retrieval"), ctx).sent_len == \
            pytest.approx(0.10)


class TestRank:
    def test_equation_arithmetic(self):
        # base 0.6 with incoherence (0.15) and repeat (0.05): 0.6 - 0.2 = 0.40
        c = cand(module="retrieval", confidence=0.6, prompt_id="seen")
        ctx = RankingContext(active_module="storytelling", surfaced_prompts={"seen"})
        ranked = rank([c, ood()], ctx, random.Random(0))
        scored = ranked.scored[0]
        assert abs(scored.final - 0.40) <= 1e-9

    def test_direct_trigger_beats_base(self):
        starter = cand(text="Want to talk games?", topic="video games",
                       topic_keywords=("video games",), confidence=0.6, module="flow:v")
        other = cand(text="unrelated", module="retrieval", confidence=0.6)
        ctx = RankingContext(utterance_text="i like video games")
        ranked = rank([starter, other, ood()], ctx, random.Random(0))
        assert ranked.winner.candidate is starter
        assert ranked.winner.final == 1.0
        assert ranked.winner_via == WINNER_BY_SCORE

    def test_priority_bypasses_scoring(self):
        strong = cand(text="high scorer", confidence=1.0, module="storytelling")
        stop = cand(text="goodbye", module="base", confidence=0.4, priority=True)
        ranked = rank([strong, stop, ood()], RankingContext(), random.Random(0))
        assert ranked.winner.candidate is stop
        assert ranked.winner_via == WINNER_BY_PRIORITY

    def test_profane_candidate_invalidated(self):
        bad = cand(text="something rude", profane=True, confidence=1.0)
        ranked = rank([bad, cand(confidence=0.9, module="storytelling"), ood()],
                      RankingContext(), random.Random(0))
        assert ranked.scored[0].invalidated
        assert ranked.winner.candidate is not bad

    def test_ood_substituted_when_gate_fails(self):
        weak = cand(confidence=0.7, module="storytelling", text="weak reply")
        ranked = rank([weak, ood()], RankingContext(), random.Random(0))
        assert ranked.winner.candidate.source_module == OOD_MODULE
        assert ranked.winner_via == WINNER_BY_OOD

    def test_winner_above_gate_stays(self):
        strong = cand(confidence=0.9, module="storytelling")
        ranked = rank([strong, ood()], RankingContext(), random.Random(0))
        assert ranked.winner.candidate is strong

    def test_empty_pool_is_an_error(self):
        with pytest.raises(EngineError):
            rank([], RankingContext(), random.Random(0))

    def test_gate_without_ood_candidate_is_an_error(self):
        with pytest.raises(EngineError):
            rank([cand(confidence=0.7, module="storytelling")],
                 RankingContext(), random.Random(0))

    def test_near_ties_are_not_randomized(self):
        a = cand(text="aaa", confidence=0.9, module="storytelling")
        b = cand(text="bbb", confidence=0.8999999, module="storytelling")
        winners = {rank([a, b, ood()], RankingContext(), random.Random(seed))
                   .winner.candidate.text for seed in range(50)}
        assert winners == {"aaa"}

    def test_fixed_seed_is_deterministic(self):
        pool = [cand(text=f"t{i}", confidence=0.9, module="storytelling")
                for i in range(4)]
        first = rank(pool, RankingContext(), random.Random(42)).winner.candidate.text
        for _ in range(10):
            again = rank(pool, RankingContext(), random.Random(42)).winner.candidate.text
            assert again == first


@st.composite
def candidate_pools(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    pool = []
    for i in range(n):
        pool.append(cand(
            text=draw(st.text(alphabet="abc ", min_size=1, max_size=40)) or "x",
            module=draw(st.sampled_from(["retrieval", "storytelling", "qa", "opinions"])),
            confidence=draw(st.floats(min_value=0, max_value=1)),
            prompt_id=f"p{i}-{draw(st.integers(0, 3))}",
        ))
    pool.append(ood(draw(st.floats(min_value=0, max_value=1))))
    return pool


@st.composite
def contexts(draw):
    return RankingContext(
        incoherence_penalty=draw(st.floats(min_value=0, max_value=0.5)),
        repeat_penalty=draw(st.floats(min_value=0, max_value=0.5)),
        length_penalty_rate=draw(st.floats(min_value=0, max_value=0.05)),
        ood_threshold=draw(st.floats(min_value=0, max_value=1)),
        active_module=draw(st.sampled_from([None, "storytelling", "recursive"])),
        surfaced_prompts={f"p{i}-0" for i in range(draw(st.integers(0, 6)))},
        utterance_text=draw(st.text(alphabet="abc ", max_size=30)),
    )


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(pool=candidate_pools(), ctx=contexts(), seed=st.integers(0, 999))
    def test_outputs_always_clamped(self, pool, ctx, seed):
        ranked = rank(pool, ctx, random.Random(seed))
        for entry in ranked.scored:
            assert 0.0 <= entry.final <= 1.0

    @settings(max_examples=100, deadline=None)
    @given(pool=candidate_pools(), ctx=contexts(), seed=st.integers(0, 999))
    def test_priority_always_wins(self, pool, ctx, seed):
        stop = cand(text="stop", module="base", confidence=0.1, priority=True)
        ranked = rank(pool + [stop], ctx, random.Random(seed))
        assert ranked.winner.candidate.priority

    @settings(max_examples=100, deadline=None)
    @given(ctx=contexts())
    def test_loss_monotone(self, ctx):
        c = cand(confidence=0.9, module="retrieval")
        base_loss = loss(c, ctx).total
        ctx_with_repeat = RankingContext(
            incoherence_penalty=ctx.incoherence_penalty,
            repeat_penalty=ctx.repeat_penalty,
            length_penalty_rate=ctx.length_penalty_rate,
            active_module=ctx.active_module,
            surfaced_prompts=ctx.surfaced_prompts | {c.prompt_id},
            utterance_text=ctx.utterance_text,
        )
        assert loss(c, ctx_with_repeat).total >= base_loss
