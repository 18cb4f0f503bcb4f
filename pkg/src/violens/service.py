"""HTTP service for annotation jobs and the historian review queue.

The review UI talks only to these endpoints. Jobs run on a single in-process
worker (inference is the bottleneck and corpora are desk-scale); verdicts
and predictions persist through the corpus store, whose transactions make
duplicate-verdict detection atomic.

Auth is a single bearer token read from ``VIOLENS_API_TOKEN``; when the
variable is unset the service is open (local desk use).
"""

from __future__ import annotations

import os
import threading
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from . import models
from .jsonl import dumps_line
from .records import (
    ConflictError,
    NotFoundError,
    ReviewVerdict,
    ValidationError,
)
from .store import CorpusStore, new_id

TOKEN_ENV = "VIOLENS_API_TOKEN"
PREDICTION_BATCH = 64


class JobRequest(BaseModel):
    task: str
    model_id: str
    works: list[str] = Field(default_factory=list)
    force: bool = False


class VerdictRequest(BaseModel):
    decision: str
    reviewer: str
    corrected_label: str | None = None


def create_app(
    store: CorpusStore,
    run_dir: str | Path,
    token: str | None = None,
) -> FastAPI:
    app = FastAPI(title="violens review service", version="0.1.0")
    app.state.store = store
    app.state.run_dir = Path(run_dir)
    app.state.token = token if token is not None else os.environ.get(TOKEN_ENV)
    app.state.job_lock = threading.Lock()  # at most one running job
    app.state.model_cache = {}

    def require_token(request: Request):
        expected = app.state.token
        if not expected:
            return
        supplied = request.headers.get("Authorization", "")
        if supplied != f"Bearer {expected}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    guarded = [Depends(require_token)]

    @app.exception_handler(ValidationError)
    async def _validation(_, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(NotFoundError)
    async def _notfound(_, exc):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ConflictError)
    async def _conflict(_, exc):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/jobs", dependencies=guarded, status_code=201)
    def create_job(req: JobRequest):
        if req.task not in store.registries:
            raise ValidationError(f"unknown task: {req.task!r}")
        handle = _load_model(app, req.model_id)
        if handle is None:
            raise NotFoundError(f"no model {req.model_id}")
        if handle.task != req.task:
            raise ValidationError(
                f"model {req.model_id} serves task {handle.task}, not {req.task}"
            )
        passages = store.list_passages(work_ids=req.works or None)
        if not passages:
            raise HTTPException(status_code=400, detail="no passages match the work filter")
        if not req.force:
            existing = store.find_job(req.task, req.model_id, req.works)
            if existing is not None:
                return existing
        job = store.create_job(req.task, req.model_id, req.works)
        thread = threading.Thread(
            target=_run_job, args=(app, job["id"], handle, passages), daemon=True
        )
        thread.start()
        return store.get_job(job["id"])

    @app.get("/jobs/{job_id}", dependencies=guarded)
    def get_job(job_id: str):
        return store.get_job(job_id)

    @app.get("/review/queue", dependencies=guarded)
    def review_queue(task: str | None = None, status: str = "pending", limit: int = 50,
                     offset: int = 0):
        if status != "pending":
            raise ValidationError(f"unsupported queue status: {status!r}")
        items = store.pending_review(task=task)
        page = items[offset : offset + limit]
        return {
            "total": len(items),
            "items": [_queue_item(pred, passage) for pred, passage in page],
        }

    @app.post("/review/{prediction_id}/verdict", dependencies=guarded)
    def post_verdict(prediction_id: str, req: VerdictRequest):
        verdict = ReviewVerdict(
            id=new_id("ver"),
            prediction_id=prediction_id,
            decision=req.decision,
            reviewer=req.reviewer,
            corrected_label=req.corrected_label,
        )
        stored = store.record_verdict(verdict)
        return {
            "id": stored.id,
            "prediction_id": stored.prediction_id,
            "decision": stored.decision,
            "corrected_label": stored.corrected_label,
            "reviewer": stored.reviewer,
            "created_at": stored.created_at,
        }

    @app.get("/export/feedback", dependencies=guarded)
    def export_feedback(task: str):
        if task not in store.registries:
            raise ValidationError(f"unknown task: {task!r}")
        examples = store.export_feedback(task)

        def lines():
            for example in examples:
                yield dumps_line(example.to_json())

        return StreamingResponse(lines(), media_type="application/x-ndjson")

    @app.get("/passages/{passage_id}", dependencies=guarded)
    def get_passage(passage_id: str):
        p = store.get_passage(passage_id)
        return dict(p.to_json(), citation=p.ref.display())

    @app.get("/registry/{task}", dependencies=guarded)
    def get_registry(task: str):
        if task not in store.registries:
            raise NotFoundError(f"no registry for task {task!r}")
        reg = store.registries[task]
        return {
            "task": task,
            "labels": [
                {"name": lab, "description": reg.descriptions.get(lab, "")}
                for lab in reg.labels
            ],
        }

    return app


def _queue_item(pred, passage) -> dict:
    return {
        "prediction_id": pred.id,
        "passage_id": passage.id,
        "task": pred.task,
        "label": pred.label,
        "score": pred.score,
        "model_id": pred.model_id,
        "truncated": pred.truncated,
        "text": passage.text,
        "work_id": passage.ref.work_id,
        "chapter": passage.ref.chapter,
        "section": passage.ref.section,
        "citation": passage.ref.display(),
    }


def _load_model(app: FastAPI, model_id: str):
    cache = app.state.model_cache
    if model_id not in cache:
        try:
            cache[model_id] = models.load_model(app.state.run_dir, model_id)
        except Exception:
            return None
    return cache[model_id]


def _run_job(app: FastAPI, job_id: str, handle, passages):
    store: CorpusStore = app.state.store
    with app.state.job_lock:
        store.update_job(job_id, status="running")
        try:
            processed = 0
            class_counts: dict[str, int] = {}
            for start in range(0, len(passages), PREDICTION_BATCH):
                batch = passages[start : start + PREDICTION_BATCH]
                preds = models.predict_for_task(handle, batch)
                store.add_predictions(preds)
                processed += len(preds)
                for p in preds:
                    class_counts[p.label] = class_counts.get(p.label, 0) + 1
                store.update_job(job_id, processed=processed, class_counts=class_counts)
            store.update_job(job_id, status="done")
        except Exception as exc:  # failure is a terminal job state, not a crash
            store.update_job(job_id, status="failed", error=str(exc))
