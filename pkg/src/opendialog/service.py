"""HTTP JSON API over the engine.

POST /v1/sessions {seed?} -> {session_id}
POST /v1/sessions/{id}/turns {text, asr_hypotheses?} -> reply + debug + ended
GET /v1/sessions/{id} -> state summary (transcript, explored sets)
DELETE /v1/sessions/{id}
GET /v1/health -> resource counts
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from opendialog.engine import Engine
from opendialog.errors import InputError, UnknownSessionError
from opendialog.nlu import AsrHypothesis


class CreateSessionRequest(BaseModel):
    seed: int | None = None


class AsrHypothesisModel(BaseModel):
    text: str
    score: float


class TurnRequestModel(BaseModel):
    text: str | None = None
    asr_hypotheses: list[AsrHypothesisModel] | None = None


def create_app(engine: Engine, ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="opendialog", version="0.1.0")

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "resources": {
                "entities": len(engine.graph),
                "edges": len(engine.graph.edges),
                "content_items": len(engine.ltm.items),
                "flows": len(engine.flows),
                "stories": len(engine.ltm.stories),
            },
        }

    @app.post("/v1/sessions")
    def create_session(request: CreateSessionRequest | None = None):
        seed = request.seed if request else None
        return {"session_id": engine.create_session(seed=seed)}

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            return engine.session_summary(session_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail="unknown session") from None

    @app.delete("/v1/sessions/{session_id}")
    def delete_session(session_id: str):
        try:
            engine.end_session(session_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail="unknown session") from None
        return {"ended": True}

    @app.post("/v1/sessions/{session_id}/turns")
    def post_turn(session_id: str, request: TurnRequestModel):
        if not request.text and not request.asr_hypotheses:
            raise HTTPException(status_code=422, detail="text or asr_hypotheses required")
        hypotheses = None
        if request.asr_hypotheses:
            try:
                hypotheses = [AsrHypothesis(h.text, h.score) for h in request.asr_hypotheses]
            except InputError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from None
        try:
            result = engine.handle_turn(session_id, text=request.text,
                                        hypotheses=hypotheses)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail="unknown session") from None
        except InputError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return {
            "reply": {"text": result.reply.display_text, "ssml": result.reply.ssml_text},
            "debug": result.debug,
            "ended": result.ended,
        }

    if ui_dir is not None and ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
