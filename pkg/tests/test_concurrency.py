import threading

from hypothesis import given, strategies as st

from opendialog.modules import MODULE_PROPOSERS, propose
from opendialog.nlu import tokenize


class TestSessionSerialization:
    def test_same_session_turns_never_interleave(self, engine):
        session = engine.create_session(seed=3)
        texts = ["tell me a story", "yes", "sure", "go on", "keep going",
                 "do you like watchmen", "what is the capitol city of mexico"]
        threads = [threading.Thread(target=engine.handle_turn, args=(session,),
                                    kwargs={"text": text}) for text in texts]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        history = engine.get_state(session).turn_history
        # strict user/agent alternation proves per-session serialization
        speakers = [record.speaker for record in history]
        assert speakers == ["user", "agent"] * len(texts)

    def test_distinct_sessions_run_in_parallel(self, engine):
        sessions = [engine.create_session(seed=i) for i in range(6)]
        errors = []

        def worker(session_id):
            try:
                for text in ("hello", "tell me a story", "yes"):
                    result = engine.handle_turn(session_id, text=text)
                    assert result.reply.display_text
            except Exception as exc:  # surface across the thread boundary
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(s,)) for s in sessions]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        for session_id in sessions:
            assert engine.get_state(session_id).turn_count == 3


class TestClassifierContracts:
    @given(st.text(alphabet="abcdefghijklmnop yes no", min_size=1, max_size=50))
    def test_intent_always_in_inventory(self, engine, text):
        tokens = tokenize(text) or ["x"]
        assert engine.nlu.intents.classify(tokens) in engine.nlu.intents.inventory


class TestModuleFailureIsolation:
    def test_failing_module_yields_empty_and_logs(self, engine, monkeypatch, caplog):
        def explode(*args, **kwargs):
            raise RuntimeError("synthetic module failure")

        monkeypatch.setitem(MODULE_PROPOSERS, "qa", explode)
        utterance = engine.annotator.annotate("what is the capitol city of mexico")
        state = engine.get_state(engine.create_session(seed=1))
        with caplog.at_level("WARNING"):
            result = propose("qa", engine.ctx, state, utterance, state.user_profile.mood)
        assert result == []
        assert any("qa" in record.message for record in caplog.records)

    def test_turn_survives_a_failing_module(self, engine, monkeypatch):
        def explode(*args, **kwargs):
            raise RuntimeError("synthetic module failure")

        monkeypatch.setitem(MODULE_PROPOSERS, "opinions", explode)
        session = engine.create_session(seed=2)
        result = engine.handle_turn(session, text="do you like watchmen")
        assert result.reply.display_text.strip()
