"""Index-backed candidates: curated turns retrieved by entity or topic."""

from __future__ import annotations

from opendialog.candidates import CONF_TOPICAL, MERGE_QUESTION, MERGE_STATEMENT, ResponseCandidate
from opendialog.memory import SessionState
from opendialog.modules import ModuleContext
from opendialog.nlu import AnnotatedUtterance, Mood
from opendialog.retrieval import RetrievalQuery


# Kinds that work as standalone replies; sequence questions, intimacy
# questions and jokes belong to their own modules.
_REPLY_KINDS = {"dialogue_turn", "fact", "trivia", "news_headline", "opinion"}


def propose(ctx: ModuleContext, state: SessionState,
            utterance: AnnotatedUtterance, mood: Mood) -> list[ResponseCandidate]:
    terms = ctx.content_words(utterance.tokens)
    results = []
    if utterance.entity_ids:
        results = ctx.index.search(RetrievalQuery(
            terms=terms, entities=utterance.entity_ids[:1], max_results=8))
    elif utterance.topic:
        results = ctx.index.search(RetrievalQuery(
            terms=terms, topic=utterance.topic, max_results=6))
    results = [(item, score) for item, score in results if item.kind in _REPLY_KINDS][:5]
    candidates = []
    for item, _score in results:
        role = MERGE_QUESTION if item.dialogue_act.is_question() else MERGE_STATEMENT
        candidates.append(ResponseCandidate(
            text=item.text, source_module="retrieval", confidence=CONF_TOPICAL,
            dialogue_act=item.dialogue_act, discourse_relation=item.discourse_relation,
            topic=item.topic, entities=item.entities,
            prompt_id=f"retrieval:{item.id}", mergeable_role=role))
    return candidates
