"""HTTP JSON API over the annotation store.

GET  /api/task?annotator=ID  -> next task (qualification batch or one main task)
POST /api/judgment           -> persist one judgment (idempotent; first wins)
POST /api/qualify            -> score a qualification batch
GET  /api/progress           -> global and per-annotator progress
"""

from __future__ import annotations

import logging
from dataclasses import asdict
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel, Field

from ..jsonl import read_jsonl
from .store import (
    AnnotationStore,
    CapExceeded,
    DuplicateJudgment,
    QualificationLocked,
    UnknownTask,
)

log = logging.getLogger(__name__)


class JudgmentPayload(BaseModel):
    annotator_id: str
    task_id: str
    q1: bool
    q2: bool
    q3: bool
    q4: bool
    quality: float = Field(ge=0.0, le=1.0)


class QualificationAnswer(BaseModel):
    task_id: str
    q1: bool
    q2: bool
    q3: bool
    q4: bool
    quality: Optional[float] = Field(default=None, ge=0.0, le=1.0)


class QualificationPayload(BaseModel):
    annotator_id: str
    answers: list[QualificationAnswer]


def create_app(store: AnnotationStore) -> FastAPI:
    app = FastAPI(title="factexpl annotation service")
    app.state.store = store

    @app.get("/api/task")
    def get_task(annotator: str = Query(min_length=1)) -> Any:
        result = store.next_task(annotator)
        if result is None:
            return Response(status_code=204)
        if isinstance(result, list):
            return {"phase": "qualification", "tasks": [asdict(t) for t in result]}
        return {"phase": "main", "tasks": [asdict(result)]}

    @app.post("/api/judgment", status_code=201)
    def post_judgment(payload: JudgmentPayload) -> dict[str, Any]:
        try:
            record_id = store.submit_judgment(
                payload.annotator_id,
                payload.task_id,
                payload.model_dump(),
            )
        except UnknownTask as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except DuplicateJudgment as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except CapExceeded as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"record_id": record_id}

    @app.post("/api/qualify")
    def post_qualify(payload: QualificationPayload) -> dict[str, Any]:
        try:
            qualified = store.qualify(payload.annotator_id, [a.model_dump() for a in payload.answers])
        except QualificationLocked as exc:
            raise HTTPException(status_code=423, detail=str(exc))
        return {"annotator_id": payload.annotator_id, "qualified": qualified}

    @app.get("/api/progress")
    def get_progress(annotator: Optional[str] = None) -> dict[str, Any]:
        return store.progress(annotator)

    return app


def build_store(
    summaries_file: str | Path,
    db_path: str | Path,
    qualification_file: str | Path | None = None,
    char_min: int = 1000,
    char_max: int = 2500,
    lease_seconds: float | None = None,
    seed: int | None = None,
) -> AnnotationStore:
    kwargs: dict[str, Any] = {"char_min": char_min, "char_max": char_max, "seed": seed}
    if lease_seconds is not None:
        kwargs["lease_seconds"] = lease_seconds
    store = AnnotationStore(db_path, **kwargs)
    store.load_summaries(list(read_jsonl(summaries_file)))
    if qualification_file:
        store.load_qualification_items(list(read_jsonl(qualification_file)))
    return store


def serve(store: AnnotationStore, host: str = "127.0.0.1", port: int = 8008):
    import uvicorn

    uvicorn.run(create_app(store), host=host, port=port, log_level="info")
