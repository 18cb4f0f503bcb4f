"""Single-file embedded store for passages, events, predictions and verdicts.

Backed by sqlite3: desk-scale data (thousands of rows), transactional, and a
single handle can be shared across threads (writes are serialized on an
internal lock, sqlite enforces referential integrity).
"""

from __future__ import annotations

import json
import math
import sqlite3
import threading
import time
import uuid
from pathlib import Path

from .records import (
    TASK_DETECT,
    LABEL_VIOLENT,
    LABEL_NONVIOLENT,
    ConflictError,
    CuratedEvent,
    LabeledExample,
    NotFoundError,
    Passage,
    Prediction,
    ReviewVerdict,
    SourceRef,
    ValidationError,
)
from .registries import LabelRegistry, load_registries

_SCHEMA = """
CREATE TABLE IF NOT EXISTS passages (
    id TEXT PRIMARY KEY,
    work_id TEXT NOT NULL,
    chapter INTEGER NOT NULL,
    section INTEGER NOT NULL,
    text TEXT NOT NULL,
    lang TEXT NOT NULL DEFAULT 'en',
    UNIQUE (work_id, chapter, section)
);
CREATE TABLE IF NOT EXISTS events (
    id TEXT PRIMARY KEY,
    title TEXT NOT NULL DEFAULT '',
    work_id TEXT NOT NULL,
    chapter INTEGER NOT NULL,
    section INTEGER NOT NULL,
    translation_text TEXT NOT NULL,
    level TEXT NOT NULL,
    context TEXT NOT NULL,
    motive TEXT NOT NULL,
    consequence TEXT NOT NULL,
    extras TEXT NOT NULL DEFAULT '{}'
);
CREATE TABLE IF NOT EXISTS predictions (
    id TEXT PRIMARY KEY,
    passage_id TEXT NOT NULL REFERENCES passages(id),
    task TEXT NOT NULL,
    label TEXT NOT NULL,
    score REAL NOT NULL,
    model_id TEXT NOT NULL,
    created_at REAL NOT NULL,
    truncated INTEGER NOT NULL DEFAULT 0,
    probs TEXT
);
CREATE TABLE IF NOT EXISTS verdicts (
    id TEXT PRIMARY KEY,
    prediction_id TEXT NOT NULL REFERENCES predictions(id),
    decision TEXT NOT NULL,
    corrected_label TEXT,
    reviewer TEXT NOT NULL,
    created_at REAL NOT NULL,
    UNIQUE (prediction_id, reviewer)
);
CREATE TABLE IF NOT EXISTS jobs (
    id TEXT PRIMARY KEY,
    task TEXT NOT NULL,
    model_id TEXT NOT NULL,
    work_filter TEXT NOT NULL,
    status TEXT NOT NULL,
    processed INTEGER NOT NULL DEFAULT 0,
    class_counts TEXT NOT NULL DEFAULT '{}',
    error TEXT,
    created_at REAL NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_predictions_task ON predictions(task);
CREATE INDEX IF NOT EXISTS idx_verdicts_prediction ON verdicts(prediction_id);
"""


def _row_passage(row) -> Passage:
    return Passage(
        id=row[0], ref=SourceRef(row[1], row[2], row[3]), text=row[4], lang=row[5]
    )


def _row_event(row) -> CuratedEvent:
    return CuratedEvent(
        id=row[0],
        title=row[1],
        ref=SourceRef(row[2], row[3], row[4]),
        translation_text=row[5],
        level=row[6],
        context=row[7],
        motive=row[8],
        consequence=row[9],
        extras=json.loads(row[10]),
    )


def _row_prediction(row) -> Prediction:
    return Prediction(
        id=row[0],
        passage_id=row[1],
        task=row[2],
        label=row[3],
        score=row[4],
        model_id=row[5],
        created_at=row[6],
        truncated=bool(row[7]),
        probs=json.loads(row[8]) if row[8] else None,
    )


def _row_verdict(row) -> ReviewVerdict:
    return ReviewVerdict(
        id=row[0],
        prediction_id=row[1],
        decision=row[2],
        corrected_label=row[3],
        reviewer=row[4],
        created_at=row[5],
    )


def new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


class CorpusStore:
    """Store handle; safe to share across threads."""

    def __init__(self, path: str | Path = ":memory:"):
        self.path = str(path)
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.execute("PRAGMA foreign_keys = ON")
        self._lock = threading.RLock()
        self.registries: dict[str, LabelRegistry] = load_registries()
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self):
        self._conn.close()

    # -- passages ---------------------------------------------------------

    def put_passages(self, passages: list[Passage]) -> int:
        """Store passages, idempotent on (work_id, chapter, section).

        Re-ingesting a ref with identical text is a no-op; the same ref with
        different text raises ConflictError.
        """
        stored = 0
        with self._lock, self._conn:
            for p in passages:
                cur = self._conn.execute(
                    "SELECT id, text FROM passages WHERE work_id=? AND chapter=? AND section=?",
                    (p.ref.work_id, p.ref.chapter, p.ref.section),
                )
                row = cur.fetchone()
                if row is not None:
                    if row[1] != p.text:
                        raise ConflictError(
                            f"passage {p.ref.display()} already stored with different text"
                        )
                    continue
                try:
                    self._conn.execute(
                        "INSERT INTO passages (id, work_id, chapter, section, text, lang)"
                        " VALUES (?,?,?,?,?,?)",
                        (p.id, p.ref.work_id, p.ref.chapter, p.ref.section, p.text, p.lang),
                    )
                except sqlite3.IntegrityError as exc:
                    raise ConflictError(f"duplicate passage id {p.id}") from exc
                stored += 1
        return stored

    def get_passage(self, passage_id: str) -> Passage:
        cur = self._conn.execute(
            "SELECT id, work_id, chapter, section, text, lang FROM passages WHERE id=?",
            (passage_id,),
        )
        row = cur.fetchone()
        if row is None:
            raise NotFoundError(f"no passage {passage_id}")
        return _row_passage(row)

    def find_passage(self, ref: SourceRef) -> Passage | None:
        cur = self._conn.execute(
            "SELECT id, work_id, chapter, section, text, lang FROM passages"
            " WHERE work_id=? AND chapter=? AND section=?",
            (ref.work_id, ref.chapter, ref.section),
        )
        row = cur.fetchone()
        return _row_passage(row) if row else None

    def list_passages(self, work_ids: list[str] | None = None) -> list[Passage]:
        sql = "SELECT id, work_id, chapter, section, text, lang FROM passages"
        params: tuple = ()
        if work_ids:
            sql += f" WHERE work_id IN ({','.join('?' * len(work_ids))})"
            params = tuple(work_ids)
        sql += " ORDER BY work_id, chapter, section"
        return [_row_passage(r) for r in self._conn.execute(sql, params)]

    def work_ids(self) -> list[str]:
        return [
            r[0]
            for r in self._conn.execute(
                "SELECT DISTINCT work_id FROM passages ORDER BY work_id"
            )
        ]

    def delete_passage(self, passage_id: str):
        """Rejected while predictions reference the passage."""
        with self._lock, self._conn:
            try:
                cur = self._conn.execute("DELETE FROM passages WHERE id=?", (passage_id,))
            except sqlite3.IntegrityError as exc:
                raise ConflictError(
                    f"passage {passage_id} is referenced by predictions"
                ) from exc
            if cur.rowcount == 0:
                raise NotFoundError(f"no passage {passage_id}")

    # -- curated events ----------------------------------------------------

    def put_events(self, events: list[CuratedEvent]) -> int:
        for e in events:
            self.registries["level"].validate(e.level)
            self.registries["context"].validate(e.context)
            self.registries["motive"].validate(e.motive)
            self.registries["consequence"].validate(e.consequence)
        stored = 0
        with self._lock, self._conn:
            for e in events:
                self._conn.execute(
                    "INSERT OR REPLACE INTO events"
                    " (id, title, work_id, chapter, section, translation_text,"
                    "  level, context, motive, consequence, extras)"
                    " VALUES (?,?,?,?,?,?,?,?,?,?,?)",
                    (
                        e.id,
                        e.title,
                        e.ref.work_id,
                        e.ref.chapter,
                        e.ref.section,
                        e.translation_text,
                        e.level,
                        e.context,
                        e.motive,
                        e.consequence,
                        json.dumps(e.extras, ensure_ascii=False),
                    ),
                )
                stored += 1
        return stored

    def list_events(self) -> list[CuratedEvent]:
        rows = self._conn.execute(
            "SELECT id, title, work_id, chapter, section, translation_text,"
            " level, context, motive, consequence, extras FROM events ORDER BY id"
        )
        return [_row_event(r) for r in rows]

    # -- predictions --------------------------------------------------------

    def add_predictions(self, predictions: list[Prediction]) -> int:
        for p in predictions:
            self.registries[p.task].validate(p.label)
        stored = 0
        with self._lock, self._conn:
            for p in predictions:
                try:
                    self._conn.execute(
                        "INSERT INTO predictions"
                        " (id, passage_id, task, label, score, model_id, created_at,"
                        "  truncated, probs)"
                        " VALUES (?,?,?,?,?,?,?,?,?)",
                        (
                            p.id,
                            p.passage_id,
                            p.task,
                            p.label,
                            p.score,
                            p.model_id,
                            p.created_at,
                            int(p.truncated),
                            json.dumps(p.probs) if p.probs is not None else None,
                        ),
                    )
                except sqlite3.IntegrityError as exc:
                    raise ConflictError(
                        f"prediction {p.id}: unknown passage {p.passage_id} or duplicate id"
                    ) from exc
                stored += 1
        return stored

    def get_prediction(self, prediction_id: str) -> Prediction:
        cur = self._conn.execute(
            "SELECT id, passage_id, task, label, score, model_id, created_at,"
            " truncated, probs FROM predictions WHERE id=?",
            (prediction_id,),
        )
        row = cur.fetchone()
        if row is None:
            raise NotFoundError(f"no prediction {prediction_id}")
        return _row_prediction(row)

    def list_predictions(
        self, task: str | None = None, model_id: str | None = None
    ) -> list[Prediction]:
        sql = (
            "SELECT id, passage_id, task, label, score, model_id, created_at,"
            " truncated, probs FROM predictions"
        )
        clauses, params = [], []
        if task:
            clauses.append("task=?")
            params.append(task)
        if model_id:
            clauses.append("model_id=?")
            params.append(model_id)
        if clauses:
            sql += " WHERE " + " AND ".join(clauses)
        sql += " ORDER BY created_at, id"
        return [_row_prediction(r) for r in self._conn.execute(sql, params)]

    def pending_review(self, task: str | None = None) -> list[tuple[Prediction, Passage]]:
        """Predictions with no verdict yet, most uncertain first.

        Detection orders by ascending distance from the 0.5 boundary;
        categorization by descending entropy of the class distribution.
        """
        sql = (
            "SELECT p.id, p.passage_id, p.task, p.label, p.score, p.model_id,"
            " p.created_at, p.truncated, p.probs FROM predictions p"
            " WHERE NOT EXISTS (SELECT 1 FROM verdicts v WHERE v.prediction_id = p.id)"
        )
        params: list = []
        if task:
            sql += " AND p.task=?"
            params.append(task)
        preds = [_row_prediction(r) for r in self._conn.execute(sql, params)]

        def uncertainty_key(p: Prediction):
            if p.task == TASK_DETECT:
                return (abs(p.score - 0.5), p.created_at, p.id)
            return (-_entropy(p), p.created_at, p.id)

        preds.sort(key=uncertainty_key)
        return [(p, self.get_passage(p.passage_id)) for p in preds]

    # -- verdicts ------------------------------------------------------------

    def record_verdict(self, verdict: ReviewVerdict) -> ReviewVerdict:
        pred = self.get_prediction(verdict.prediction_id)  # raises NotFoundError
        if verdict.decision == "relabel":
            self.registries[pred.task].validate(verdict.corrected_label)
        with self._lock, self._conn:
            try:
                self._conn.execute(
                    "INSERT INTO verdicts"
                    " (id, prediction_id, decision, corrected_label, reviewer, created_at)"
                    " VALUES (?,?,?,?,?,?)",
                    (
                        verdict.id,
                        verdict.prediction_id,
                        verdict.decision,
                        verdict.corrected_label,
                        verdict.reviewer,
                        verdict.created_at,
                    ),
                )
            except sqlite3.IntegrityError as exc:
                raise ConflictError(
                    f"reviewer {verdict.reviewer} already judged {verdict.prediction_id}"
                ) from exc
        return verdict

    def list_verdicts(self, task: str | None = None) -> list[ReviewVerdict]:
        sql = (
            "SELECT v.id, v.prediction_id, v.decision, v.corrected_label,"
            " v.reviewer, v.created_at FROM verdicts v"
        )
        params: list = []
        if task:
            sql += " JOIN predictions p ON p.id = v.prediction_id WHERE p.task=?"
            params.append(task)
        sql += " ORDER BY v.created_at, v.id"
        return [_row_verdict(r) for r in self._conn.execute(sql, params)]

    def export_feedback(self, task: str) -> list[LabeledExample]:
        """Turn review verdicts into labeled examples for the next training round.

        Accepts keep the predicted label, relabels carry the corrected label.
        A reject on a detect-task "violent" prediction asserts the passage is
        non-violent; any other reject carries no usable label and is dropped.
        """
        examples: list[LabeledExample] = []
        for verdict in self.list_verdicts(task=task):
            pred = self.get_prediction(verdict.prediction_id)
            passage = self.get_passage(pred.passage_id)
            if verdict.decision == "accept":
                label = pred.label
            elif verdict.decision == "relabel":
                label = verdict.corrected_label
            elif pred.task == TASK_DETECT and pred.label == LABEL_VIOLENT:
                label = LABEL_NONVIOLENT
            else:
                continue
            examples.append(
                LabeledExample(
                    source_id=passage.id, text=passage.text, task=task, label=label
                )
            )
        return examples

    def export_verdicts_jsonl(self, path: str | Path, task: str | None = None) -> int:
        from .jsonl import write_jsonl

        return write_jsonl(
            path,
            (
                {
                    "prediction_id": v.prediction_id,
                    "decision": v.decision,
                    **({"corrected_label": v.corrected_label} if v.corrected_label else {}),
                    "reviewer": v.reviewer,
                }
                for v in self.list_verdicts(task=task)
            ),
        )

    def import_verdicts_jsonl(self, path: str | Path) -> int:
        """Record verdicts from a JSONL file; ids and timestamps are assigned
        here. Stops on the first invalid row."""
        from .jsonl import read_jsonl

        count = 0
        for obj in read_jsonl(path):
            self.record_verdict(
                ReviewVerdict(
                    id=new_id("ver"),
                    prediction_id=obj["prediction_id"],
                    decision=obj["decision"],
                    corrected_label=obj.get("corrected_label"),
                    reviewer=obj["reviewer"],
                )
            )
            count += 1
        return count

    # -- annotation jobs -------------------------------------------------------

    def create_job(self, task: str, model_id: str, work_filter: list[str]) -> dict:
        job = {
            "id": new_id("job"),
            "task": task,
            "model_id": model_id,
            "work_filter": sorted(work_filter),
            "status": "queued",
            "processed": 0,
            "class_counts": {},
            "error": None,
            "created_at": time.time(),
        }
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO jobs (id, task, model_id, work_filter, status, processed,"
                " class_counts, error, created_at) VALUES (?,?,?,?,?,?,?,?,?)",
                (
                    job["id"],
                    task,
                    model_id,
                    json.dumps(job["work_filter"]),
                    job["status"],
                    0,
                    "{}",
                    None,
                    job["created_at"],
                ),
            )
        return job

    def find_job(self, task: str, model_id: str, work_filter: list[str]) -> dict | None:
        cur = self._conn.execute(
            "SELECT id FROM jobs WHERE task=? AND model_id=? AND work_filter=?"
            " ORDER BY created_at DESC LIMIT 1",
            (task, model_id, json.dumps(sorted(work_filter))),
        )
        row = cur.fetchone()
        return self.get_job(row[0]) if row else None

    def get_job(self, job_id: str) -> dict:
        cur = self._conn.execute(
            "SELECT id, task, model_id, work_filter, status, processed, class_counts,"
            " error, created_at FROM jobs WHERE id=?",
            (job_id,),
        )
        row = cur.fetchone()
        if row is None:
            raise NotFoundError(f"no job {job_id}")
        return {
            "id": row[0],
            "task": row[1],
            "model_id": row[2],
            "work_filter": json.loads(row[3]),
            "status": row[4],
            "processed": row[5],
            "class_counts": json.loads(row[6]),
            "error": row[7],
            "created_at": row[8],
        }

    def update_job(
        self,
        job_id: str,
        status: str | None = None,
        processed: int | None = None,
        class_counts: dict | None = None,
        error: str | None = None,
    ):
        # status transitions are monotone: queued -> running -> done|failed
        order = {"queued": 0, "running": 1, "done": 2, "failed": 2}
        with self._lock, self._conn:
            if status is not None:
                current = self.get_job(job_id)["status"]
                if order[status] < order[current]:
                    raise ValidationError(
                        f"job {job_id}: cannot move {current} -> {status}"
                    )
                self._conn.execute(
                    "UPDATE jobs SET status=? WHERE id=?", (status, job_id)
                )
            if processed is not None:
                self._conn.execute(
                    "UPDATE jobs SET processed=? WHERE id=?", (processed, job_id)
                )
            if class_counts is not None:
                self._conn.execute(
                    "UPDATE jobs SET class_counts=? WHERE id=?",
                    (json.dumps(class_counts), job_id),
                )
            if error is not None:
                self._conn.execute("UPDATE jobs SET error=? WHERE id=?", (error, job_id))


def _entropy(pred: Prediction) -> float:
    if pred.probs:
        ps = [v for v in pred.probs.values() if v > 0]
    else:
        p = min(max(pred.score, 0.0), 1.0)
        ps = [q for q in (p, 1.0 - p) if q > 0]
    return -sum(p * math.log(p) for p in ps)
