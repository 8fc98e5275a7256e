"""Candidate arbitration: context scoring, loss, and winner selection.

Final confidence per candidate is

    clamp(min(max(context, confidence) - loss, 1), 0, 1)

with loss = incoherence + repeat + sentLen. Priority candidates bypass
scoring entirely; the out-of-domain candidate is substituted as winner
whenever the pool's best score fails the 0.8 confidence gate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from opendialog.candidates import MIXED_INITIATIVE_MODULES, ResponseCandidate
from opendialog.errors import EngineError
from opendialog.nlu import tokenize

OOD_MODULE = "out_of_domain"

WINNER_BY_SCORE = "score"
WINNER_BY_PRIORITY = "priority"
WINNER_BY_OOD = "ood_fallback"


@dataclass
class RankingContext:
    base_confidence: float = 0.6
    incoherence_penalty: float = 0.15
    repeat_penalty: float = 0.05
    length_penalty_rate: float = 0.01
    length_threshold: int = 30
    ood_threshold: float = 0.8
    active_module: str | None = None
    surfaced_prompts: set[str] = field(default_factory=set)
    utterance_content_words: frozenset[str] = frozenset()
    utterance_entities: frozenset[str] = frozenset()
    utterance_text: str = ""
    active_topic: str | None = None

    def __post_init__(self):
        for name in ("incoherence_penalty", "repeat_penalty", "length_penalty_rate"):
            if getattr(self, name) < 0:
                raise EngineError(f"{name} must be >= 0")
        for name in ("base_confidence", "ood_threshold"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise EngineError(f"{name} must sit in [0, 1]")


@dataclass
class LossBreakdown:
    incoherence: float = 0.0
    repeat: float = 0.0
    sent_len: float = 0.0

    @property
    def total(self) -> float:
        return self.incoherence + self.repeat + self.sent_len


@dataclass
class ScoredCandidate:
    candidate: ResponseCandidate
    context: float
    loss: LossBreakdown
    final: float
    invalidated: bool = False


@dataclass
class RankedPool:
    scored: list[ScoredCandidate]
    winner: ScoredCandidate
    winner_via: str  # score | priority | ood_fallback


def context_score(candidate: ResponseCandidate, ctx: RankingContext) -> float:
    """Direct topic trigger scores 1.0; otherwise base plus overlap bonuses.

    Only candidates that declare trigger keywords (starters, offers) can hit
    the 1.0 branch; retrieved content competes through the overlap bonuses.
    """
    utterance = f" {' '.join(tokenize(ctx.utterance_text))} "
    for phrase in candidate.topic_keywords:
        normalized = " ".join(tokenize(phrase))
        if normalized and f" {normalized} " in utterance:
            return 1.0
    candidate_words = {t for t in tokenize(candidate.text)
                       if t in ctx.utterance_content_words}
    shared_entities = set(candidate.entities) & ctx.utterance_entities
    affinity = 1 if (candidate.topic is not None and candidate.topic == ctx.active_topic) else 0
    score = (ctx.base_confidence
             + 0.1 * len(candidate_words)
             + 0.2 * len(shared_entities)
             + 0.1 * affinity)
    return max(0.0, min(1.0, score))


def loss(candidate: ResponseCandidate, ctx: RankingContext) -> LossBreakdown:
    breakdown = LossBreakdown()
    acts_for = candidate.initiative_module or candidate.source_module
    if ctx.active_module is not None and acts_for != ctx.active_module:
        breakdown.incoherence = ctx.incoherence_penalty
    if candidate.prompt_id in ctx.surfaced_prompts:
        breakdown.repeat = ctx.repeat_penalty
    if candidate.source_module in MIXED_INITIATIVE_MODULES:
        over = max(0, len(tokenize(candidate.text)) - ctx.length_threshold)
        breakdown.sent_len = ctx.length_penalty_rate * over
    return breakdown


def rank(pool: Sequence[ResponseCandidate], ctx: RankingContext,
         rng: random.Random) -> RankedPool:
    """Score the pool and pick a winner.

    Steps: invalidate unsafe candidates; honor priority bypass; apply the
    scoring equation; break exact ties uniformly at random; substitute the
    out-of-domain candidate when the best score fails the confidence gate.
    """
    if not pool:
        raise EngineError("rank() called with an empty candidate pool")

    scored: list[ScoredCandidate] = []
    for candidate in pool:
        entry = ScoredCandidate(candidate, context=0.0, loss=LossBreakdown(), final=0.0)
        if candidate.profane:
            entry.invalidated = True
        else:
            entry.context = context_score(candidate, ctx)
            entry.loss = loss(candidate, ctx)
            raw = min(max(entry.context, candidate.confidence) - entry.loss.total, 1.0)
            entry.final = max(0.0, min(1.0, raw))
        scored.append(entry)

    valid = [s for s in scored if not s.invalidated]
    if not valid:
        raise EngineError("every candidate was invalidated; out-of-domain missing")

    priority = [s for s in valid if s.candidate.priority]
    if priority:
        winner = max(priority, key=lambda s: s.candidate.confidence)
        return RankedPool(scored, winner, WINNER_BY_PRIORITY)

    best = max(s.final for s in valid)
    tied = [s for s in valid if s.final == best]
    winner = tied[0] if len(tied) == 1 else rng.choice(tied)

    if winner.final <= ctx.ood_threshold:
        fallback = [s for s in valid if s.candidate.source_module == OOD_MODULE]
        if not fallback:
            raise EngineError("no out-of-domain candidate available for the fallback gate")
        if winner.candidate.source_module != OOD_MODULE:
            return RankedPool(scored, fallback[0], WINNER_BY_OOD)
    return RankedPool(scored, winner, WINNER_BY_SCORE)
