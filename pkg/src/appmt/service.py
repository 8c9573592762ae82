"""HTTP API for the human evaluation service.

Endpoints (all JSON, UTF-8):

- ``POST /sessions`` ``{"evaluator_id", "language"}`` -> ``{"session_id"}``
- ``GET /sessions/{id}/next`` -> blinded item or ``{"done": true}``
- ``POST /sessions/{id}/ratings`` ``{"item_id", "scores": {"A","B","C"}}`` -> 204
- ``GET /report?language=xx`` -> aggregate statistics
- ``GET /export`` -> all ratings as JSONL

Blinding is enforced here: responses never include the slot-to-system
mapping or the raw reference field.
"""

from __future__ import annotations

import dataclasses
import json
from typing import Optional

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from .errors import ConflictError, ContractViolation, NotFoundError, SizingError
from .humaneval import EvalStore

__all__ = ["create_app", "RATING_ANCHORS"]

# anchor descriptions shown to raters for the 0..6 quality scale
RATING_ANCHORS = {
    0: "completely nonsense translation",
    2: "preserves some of the meaning of the source sentence but misses significant parts",
    4: "retains most of the meaning of the source sentence, but may have some grammar mistakes",
    6: "perfect translation: meaning fully consistent with the source, grammar correct",
}


class SessionRequest(BaseModel):
    evaluator_id: str = Field(min_length=1)
    language: str = Field(min_length=1)


class RatingRequest(BaseModel):
    item_id: str
    scores: dict[str, int]


def create_app(store: EvalStore) -> FastAPI:
    app = FastAPI(title="appmt human evaluation")
    # the rating UI is served statically from anywhere; the API is the
    # only shared surface
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.post("/sessions")
    def create_session(body: SessionRequest):
        try:
            session = store.create_session(body.evaluator_id, body.language)
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except SizingError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"session_id": session.session_id, "n_items": len(session.queue)}

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str):
        try:
            item = store.next_item(session_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        session = store.get_session(session_id)
        progress = {"completed": len(session.completed), "total": len(session.queue)}
        if item is None:
            return {"done": True, "progress": progress}
        return {"item": item, "anchors": RATING_ANCHORS, "progress": progress}

    @app.post("/sessions/{session_id}/ratings", status_code=204)
    def submit_rating(session_id: str, body: RatingRequest):
        try:
            store.submit_rating(session_id, body.item_id, body.scores)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ContractViolation as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return Response(status_code=204)

    @app.get("/report")
    def report(language: Optional[str] = None):
        return dataclasses.asdict(store.aggregate(language))

    @app.get("/export")
    def export():
        lines = "".join(
            json.dumps(r, ensure_ascii=False) + "\n" for r in store.export_ratings()
        )
        return PlainTextResponse(lines, media_type="application/x-ndjson")

    return app
