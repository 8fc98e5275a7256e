import pytest
from fastapi.testclient import TestClient

from opendialog.service import create_app


@pytest.fixture(scope="module")
def client(engine):
    return TestClient(create_app(engine))


def new_session(client, seed=None):
    body = {"seed": seed} if seed is not None else {}
    response = client.post("/v1/sessions", json=body)
    assert response.status_code == 200
    return response.json()["session_id"]


class TestHealth:
    def test_health_reports_resources(self, client):
        body = client.get("/v1/health").json()
        assert body["status"] == "ok"
        assert body["resources"]["flows"] == 42
        assert body["resources"]["entities"] > 0


class TestTurns:
    def test_round_trip(self, client):
        session_id = new_session(client, seed=7)
        response = client.post(f"/v1/sessions/{session_id}/turns",
                               json={"text": "tell me a story"})
        body = response.json()
        assert body["reply"]["text"]
        assert body["reply"]["ssml"].startswith("<speak>")
        assert body["ended"] is False
        pool = body["debug"]["pool"]
        assert any(c["id"] == body["debug"]["winner_id"] for c in pool)
        for candidate in pool:
            assert {"incoherence", "repeat", "sentLen"} <= set(candidate["loss"])

    def test_empty_turn_rejected(self, client):
        session_id = new_session(client)
        response = client.post(f"/v1/sessions/{session_id}/turns", json={})
        assert response.status_code == 422

    def test_unknown_session_404(self, client):
        assert client.post("/v1/sessions/zzz/turns",
                           json={"text": "hi"}).status_code == 404

    def test_asr_hypotheses_accepted(self, client):
        session_id = new_session(client)
        response = client.post(f"/v1/sessions/{session_id}/turns", json={
            "asr_hypotheses": [{"text": "do you like watchmen", "score": 0.9}]})
        assert "watchmen" in response.json()["reply"]["text"].lower()

    def test_bad_asr_score_rejected(self, client):
        session_id = new_session(client)
        response = client.post(f"/v1/sessions/{session_id}/turns", json={
            "asr_hypotheses": [{"text": "hi", "score": 2.0}]})
        assert response.status_code == 422


class TestSessionLifecycle:
    def test_summary_reconstructs_transcript(self, client):
        session_id = new_session(client, seed=7)
        client.post(f"/v1/sessions/{session_id}/turns", json={"text": "hello"})
        client.post(f"/v1/sessions/{session_id}/turns",
                    json={"text": "do you like watchmen"})
        summary = client.get(f"/v1/sessions/{session_id}").json()
        speakers = [t["speaker"] for t in summary["transcript"]]
        assert speakers == ["user", "agent", "user", "agent"]
        assert summary["turn_count"] == 2
        timestamps = [t["timestamp"] for t in summary["transcript"]]
        assert timestamps == sorted(timestamps)

    def test_delete_ends_session(self, client):
        session_id = new_session(client)
        assert client.delete(f"/v1/sessions/{session_id}").json() == {"ended": True}
        follow_up = client.post(f"/v1/sessions/{session_id}/turns",
                                json={"text": "hi"})
        assert follow_up.json()["ended"] is True

    def test_get_unknown_404(self, client):
        assert client.get("/v1/sessions/zzz").status_code == 404

    def test_seeded_sessions_reproducible_over_http(self, client):
        replies = []
        for _ in range(2):
            session_id = new_session(client, seed=42)
            response = client.post(f"/v1/sessions/{session_id}/turns",
                                   json={"text": "tell me about the matrix"})
            replies.append(response.json()["reply"]["text"])
        assert replies[0] == replies[1]
