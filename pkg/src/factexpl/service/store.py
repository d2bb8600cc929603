"""Embedded relational store for the annotation service.

Single sqlite file, WAL journal, append-only judgments table. All writes
funnel through one lock (single-writer discipline); assignment re-checks
the judgment count inside the insert transaction so the 3-judgment cap
holds under concurrent annotators. Leases park a summary with an annotator
for a bounded time and are released on submit or expiry.
"""

from __future__ import annotations

import datetime as dt
import random
import sqlite3
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

MAX_JUDGMENTS_PER_SUMMARY = 3
DEFAULT_LEASE_SECONDS = 30 * 60
DEFAULT_QUAL_ATTEMPTS = 2
DEFAULT_QUAL_REQUIRED = 3  # of the gold items, how many must match exactly

_SCHEMA = """
CREATE TABLE IF NOT EXISTS summaries (
    summary_id TEXT PRIMARY KEY,
    claim TEXT NOT NULL,
    article_text TEXT NOT NULL,
    explanation TEXT NOT NULL,
    char_count INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS qual_items (
    item_id TEXT PRIMARY KEY,
    claim TEXT NOT NULL,
    article_text TEXT NOT NULL,
    explanation TEXT NOT NULL,
    gold_q1 INTEGER NOT NULL, gold_q2 INTEGER NOT NULL,
    gold_q3 INTEGER NOT NULL, gold_q4 INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS annotators (
    annotator_id TEXT PRIMARY KEY,
    qualified INTEGER NOT NULL DEFAULT 0,
    qual_attempts INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS judgments (
    record_id INTEGER PRIMARY KEY AUTOINCREMENT,
    summary_id TEXT NOT NULL,
    annotator_id TEXT NOT NULL,
    q1 INTEGER NOT NULL, q2 INTEGER NOT NULL, q3 INTEGER NOT NULL, q4 INTEGER NOT NULL,
    quality REAL NOT NULL,
    ts TEXT NOT NULL,
    UNIQUE (summary_id, annotator_id)
);
CREATE TABLE IF NOT EXISTS leases (
    task_id TEXT PRIMARY KEY,
    summary_id TEXT NOT NULL,
    annotator_id TEXT NOT NULL,
    expires REAL NOT NULL,
    UNIQUE (summary_id, annotator_id)
);
"""


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    summary_id: str
    claim: str
    article_text: str
    generated_explanation: str
    phase: str  # qualification | main


class CapExceeded(RuntimeError):
    pass


class DuplicateJudgment(RuntimeError):
    pass


class UnknownTask(KeyError):
    pass


class QualificationLocked(RuntimeError):
    pass


class AnnotationStore:
    def __init__(
        self,
        db_path: str | Path,
        char_min: int = 1000,
        char_max: int = 2500,
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
        qual_attempt_limit: int = DEFAULT_QUAL_ATTEMPTS,
        qual_required: int = DEFAULT_QUAL_REQUIRED,
        seed: Optional[int] = None,
    ):
        self.db_path = str(db_path)
        self.char_min, self.char_max = char_min, char_max
        self.lease_seconds = lease_seconds
        self.qual_attempt_limit = qual_attempt_limit
        self.qual_required = qual_required
        self._rng = random.Random(seed)
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(self.db_path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute("PRAGMA foreign_keys=ON")
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    # -- loading ------------------------------------------------------------

    def load_summaries(self, rows: list[dict[str, Any]]):
        with self._lock, self._conn:
            for row in rows:
                article = row["article"]
                self._conn.execute(
                    "INSERT OR REPLACE INTO summaries VALUES (?, ?, ?, ?, ?)",
                    (row["summary_id"], row["claim"], article, row["explanation"], len(article)),
                )

    def load_qualification_items(self, rows: list[dict[str, Any]]):
        with self._lock, self._conn:
            for row in rows:
                gold = row["gold"]
                self._conn.execute(
                    "INSERT OR REPLACE INTO qual_items VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                    (
                        row["item_id"], row["claim"], row["article"], row["explanation"],
                        int(gold["q1"]), int(gold["q2"]), int(gold["q3"]), int(gold["q4"]),
                    ),
                )

    def has_qualification_items(self) -> bool:
        return self._conn.execute("SELECT COUNT(*) FROM qual_items").fetchone()[0] > 0

    # -- sessions -------------------------------------------------------------

    def touch_annotator(self, annotator_id: str) -> sqlite3.Row:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR IGNORE INTO annotators (annotator_id, qualified) VALUES (?, ?)",
                (annotator_id, 0 if self.has_qualification_items() else 1),
            )
        return self._conn.execute(
            "SELECT * FROM annotators WHERE annotator_id = ?", (annotator_id,)
        ).fetchone()

    # -- task assignment ------------------------------------------------------

    def _purge_expired_leases(self):
        self._conn.execute("DELETE FROM leases WHERE expires < ?", (time.time(),))

    def next_task(self, annotator_id: str) -> Optional[AnnotationTask] | list[AnnotationTask]:
        """A main-phase task the annotator has not judged, from summaries
        still below the 3-judgment cap; qualification items first when the
        annotator is not yet qualified. None when nothing is eligible."""
        session = self.touch_annotator(annotator_id)
        if not session["qualified"]:
            return self.qualification_tasks()
        with self._lock, self._conn:
            self._purge_expired_leases()
            existing = self._conn.execute(
                "SELECT task_id, summary_id FROM leases WHERE annotator_id = ?", (annotator_id,)
            ).fetchone()
            if existing:
                row = self._conn.execute(
                    "SELECT * FROM summaries WHERE summary_id = ?", (existing["summary_id"],)
                ).fetchone()
                return self._main_task(existing["task_id"], row)
            eligible = self._conn.execute(
                """
                SELECT s.* FROM summaries s
                WHERE s.char_count BETWEEN ? AND ?
                  AND s.summary_id NOT IN (SELECT summary_id FROM judgments WHERE annotator_id = ?)
                  AND (
                    (SELECT COUNT(*) FROM judgments j WHERE j.summary_id = s.summary_id)
                    + (SELECT COUNT(*) FROM leases l WHERE l.summary_id = s.summary_id)
                  ) < ?
                ORDER BY s.summary_id
                """,
                (self.char_min, self.char_max, annotator_id, MAX_JUDGMENTS_PER_SUMMARY),
            ).fetchall()
            if not eligible:
                return None
            chosen = self._rng.choice(eligible)
            task_id = uuid.uuid4().hex
            self._conn.execute(
                "INSERT INTO leases VALUES (?, ?, ?, ?)",
                (task_id, chosen["summary_id"], annotator_id, time.time() + self.lease_seconds),
            )
            return self._main_task(task_id, chosen)

    @staticmethod
    def _main_task(task_id: str, row: sqlite3.Row) -> AnnotationTask:
        return AnnotationTask(
            task_id=task_id,
            summary_id=row["summary_id"],
            claim=row["claim"],
            article_text=row["article_text"],
            generated_explanation=row["explanation"],
            phase="main",
        )

    def qualification_tasks(self) -> list[AnnotationTask]:
        rows = self._conn.execute("SELECT * FROM qual_items ORDER BY item_id").fetchall()
        return [
            AnnotationTask(
                task_id=row["item_id"],
                summary_id=row["item_id"],
                claim=row["claim"],
                article_text=row["article_text"],
                generated_explanation=row["explanation"],
                phase="qualification",
            )
            for row in rows
        ]

    # -- judgments --------------------------------------------------------------

    def submit_judgment(self, annotator_id: str, task_id: str, payload: dict[str, Any]) -> int:
        """Atomically persist one judgment; first submission wins.

        The 3-cap is re-checked inside the transaction, making assignment
        compare-and-set under concurrency.
        """
        with self._lock:
            lease = self._conn.execute("SELECT * FROM leases WHERE task_id = ?", (task_id,)).fetchone()
            if lease is None or lease["annotator_id"] != annotator_id:
                raise UnknownTask(f"task {task_id!r} is not assigned to {annotator_id!r}")
            summary_id = lease["summary_id"]
            try:
                with self._conn:
                    count = self._conn.execute(
                        "SELECT COUNT(*) FROM judgments WHERE summary_id = ?", (summary_id,)
                    ).fetchone()[0]
                    if count >= MAX_JUDGMENTS_PER_SUMMARY:
                        raise CapExceeded(f"summary {summary_id} already has {count} judgments")
                    cursor = self._conn.execute(
                        "INSERT INTO judgments (summary_id, annotator_id, q1, q2, q3, q4, quality, ts)"
                        " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                        (
                            summary_id, annotator_id,
                            int(payload["q1"]), int(payload["q2"]),
                            int(payload["q3"]), int(payload["q4"]),
                            float(payload["quality"]),
                            dt.datetime.now(dt.timezone.utc).isoformat(),
                        ),
                    )
                    self._conn.execute("DELETE FROM leases WHERE task_id = ?", (task_id,))
                    return int(cursor.lastrowid)
            except sqlite3.IntegrityError as exc:
                raise DuplicateJudgment(f"{annotator_id} already judged {summary_id}") from exc

    # -- qualification -------------------------------------------------------

    def qualify(self, annotator_id: str, answers: list[dict[str, Any]]) -> bool:
        """Score a batch of qualification answers against the gold items.

        An item counts when all four binary answers match its gold exactly;
        the annotator qualifies with at least `qual_required` matching
        items. Attempts beyond the limit raise QualificationLocked.
        """
        session = self.touch_annotator(annotator_id)
        if session["qualified"]:
            return True
        if session["qual_attempts"] >= self.qual_attempt_limit:
            raise QualificationLocked(f"{annotator_id} exhausted {self.qual_attempt_limit} attempts")
        gold = {
            row["item_id"]: (row["gold_q1"], row["gold_q2"], row["gold_q3"], row["gold_q4"])
            for row in self._conn.execute("SELECT * FROM qual_items").fetchall()
        }
        correct = 0
        for answer in answers:
            expected = gold.get(answer.get("task_id"))
            if expected is None:
                continue
            got = tuple(int(bool(answer.get(k))) for k in ("q1", "q2", "q3", "q4"))
            if got == expected:
                correct += 1
        qualified = correct >= self.qual_required
        with self._lock, self._conn:
            self._conn.execute(
                "UPDATE annotators SET qualified = ?, qual_attempts = qual_attempts + 1 WHERE annotator_id = ?",
                (int(qualified), annotator_id),
            )
        return qualified

    # -- progress ---------------------------------------------------------------

    def progress(self, annotator_id: Optional[str] = None) -> dict[str, Any]:
        total = self._conn.execute("SELECT COUNT(*) FROM summaries").fetchone()[0]
        judged = self._conn.execute("SELECT COUNT(*) FROM judgments").fetchone()[0]
        complete = self._conn.execute(
            "SELECT COUNT(*) FROM (SELECT summary_id FROM judgments GROUP BY summary_id HAVING COUNT(*) >= ?)",
            (MAX_JUDGMENTS_PER_SUMMARY,),
        ).fetchone()[0]
        out: dict[str, Any] = {
            "total_summaries": total,
            "total_judgments": judged,
            "fully_annotated": complete,
        }
        if annotator_id is not None:
            session = self.touch_annotator(annotator_id)
            rows = self._conn.execute(
                "SELECT * FROM judgments WHERE annotator_id = ? ORDER BY record_id", (annotator_id,)
            ).fetchall()
            out["annotator"] = {
                "annotator_id": annotator_id,
                "qualified": bool(session["qualified"]),
                "completed_count": len(rows),
                "judgments": [
                    {
                        "record_id": row["record_id"],
                        "summary_id": row["summary_id"],
                        "annotator_id": row["annotator_id"],
                        "q1": bool(row["q1"]), "q2": bool(row["q2"]),
                        "q3": bool(row["q3"]), "q4": bool(row["q4"]),
                        "quality": row["quality"],
                        "ts": row["ts"],
                    }
                    for row in rows
                ],
            }
        return out

    def export_judgments(self) -> list[dict[str, Any]]:
        rows = self._conn.execute("SELECT * FROM judgments ORDER BY record_id").fetchall()
        return [
            {
                "summary_id": row["summary_id"],
                "annotator_id": row["annotator_id"],
                "q1": bool(row["q1"]), "q2": bool(row["q2"]),
                "q3": bool(row["q3"]), "q4": bool(row["q4"]),
                "quality": row["quality"],
                "ts": row["ts"],
            }
            for row in rows
        ]

    def close(self):
        self._conn.close()
