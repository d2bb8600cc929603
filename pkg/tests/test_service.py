"""Annotation service protocol: assignment rules, idempotent persistence,
qualification flow, and the 3-annotator simulation."""

from __future__ import annotations

import itertools

import pytest
from fastapi.testclient import TestClient

from factexpl.service.app import create_app
from factexpl.service.store import AnnotationStore


def summaries_fixture(n: int, char_count: int = 1200) -> list[dict]:
    body = ("evidence text " * ((char_count // 14) + 1))[:char_count]
    return [
        {
            "summary_id": f"sum{i:03d}",
            "claim": f"claim {i}",
            "article": body,
            "explanation": f"generated explanation {i}",
        }
        for i in range(n)
    ]


def qual_fixture() -> list[dict]:
    return [
        {
            "item_id": f"qual{i}",
            "claim": f"qual claim {i}",
            "article": "article " * 20,
            "explanation": "explanation",
            "gold": {"q1": i % 2 == 0, "q2": False, "q3": True, "q4": i % 3 == 0},
        }
        for i in range(4)
    ]


@pytest.fixture()
def store(tmp_path):
    s = AnnotationStore(tmp_path / "ann.db", seed=7)
    s.load_summaries(summaries_fixture(20))
    yield s
    s.close()


@pytest.fixture()
def client(store):
    return TestClient(create_app(store))


def valid_payload(annotator, task_id, quality=0.5):
    return {
        "annotator_id": annotator,
        "task_id": task_id,
        "q1": True,
        "q2": False,
        "q3": False,
        "q4": True,
        "quality": quality,
    }


def take_task(client, annotator):
    resp = client.get("/api/task", params={"annotator": annotator})
    if resp.status_code == 204:
        return None
    body = resp.json()
    assert body["phase"] == "main"
    return body["tasks"][0]


# --- assignment rules ------------------------------------------------------------


def test_task_served_with_all_fields(client):
    task = take_task(client, "w1")
    assert set(task) == {"task_id", "summary_id", "claim", "article_text", "generated_explanation", "phase"}
    assert 1000 <= len(task["article_text"]) <= 2500


def test_annotator_never_sees_same_summary_twice(client):
    seen = set()
    for _ in range(20):
        task = take_task(client, "w1")
        assert task is not None
        assert task["summary_id"] not in seen
        seen.add(task["summary_id"])
        assert client.post("/api/judgment", json=valid_payload("w1", task["task_id"])).status_code == 201
    assert take_task(client, "w1") is None  # pool exhausted for this annotator


def test_summary_with_three_judgments_never_assigned(tmp_path):
    store = AnnotationStore(tmp_path / "one.db", seed=1)
    store.load_summaries(summaries_fixture(1))
    client = TestClient(create_app(store))
    for worker in ("w1", "w2", "w3"):
        task = take_task(client, worker)
        assert task["summary_id"] == "sum000"
        client.post("/api/judgment", json=valid_payload(worker, task["task_id"]))
    assert take_task(client, "w4") is None


def test_char_window_filters_main_tasks(tmp_path):
    store = AnnotationStore(tmp_path / "w.db", char_min=1000, char_max=2500, seed=1)
    rows = summaries_fixture(2, char_count=1500) + [
        {"summary_id": "tiny", "claim": "c", "article": "too short", "explanation": "e"},
        {"summary_id": "huge", "claim": "c", "article": "x" * 5000, "explanation": "e"},
    ]
    store.load_summaries(rows)
    client = TestClient(create_app(store))
    served = set()
    for worker in ("a", "b", "c"):
        for _ in range(2):
            task = take_task(client, worker)
            if task:
                served.add(task["summary_id"])
                client.post("/api/judgment", json=valid_payload(worker, task["task_id"]))
    assert "tiny" not in served and "huge" not in served


def test_lease_blocks_other_annotators_but_expires(tmp_path):
    store = AnnotationStore(tmp_path / "l.db", seed=3, lease_seconds=0.0)
    store.load_summaries(summaries_fixture(1))
    client = TestClient(create_app(store))
    first = take_task(client, "w1")
    assert first is not None
    # lease expired immediately; another annotator can take the same summary
    second = take_task(client, "w2")
    assert second is not None and second["summary_id"] == first["summary_id"]


def test_existing_lease_is_returned_again(client):
    first = take_task(client, "w1")
    second = take_task(client, "w1")
    assert first["task_id"] == second["task_id"]


# --- submission ----------------------------------------------------------------------


def test_valid_submission_gets_record_id(client):
    task = take_task(client, "w1")
    resp = client.post("/api/judgment", json=valid_payload("w1", task["task_id"]))
    assert resp.status_code == 201
    assert isinstance(resp.json()["record_id"], int)


def test_resubmission_conflicts_and_keeps_original(client, store):
    task = take_task(client, "w1")
    assert client.post("/api/judgment", json=valid_payload("w1", task["task_id"], quality=0.25)).status_code == 201
    # second lease on a new summary, then try to resubmit the first task id
    dup = client.post("/api/judgment", json=valid_payload("w1", task["task_id"], quality=1.0))
    assert dup.status_code == 404  # lease consumed; unknown task
    judgments = store.export_judgments()
    assert len(judgments) == 1 and judgments[0]["quality"] == 0.25


def test_duplicate_summary_submission_is_rejected(tmp_path):
    # force the same summary via direct store access with a fresh lease
    store = AnnotationStore(tmp_path / "d.db", seed=5)
    store.load_summaries(summaries_fixture(1))
    client = TestClient(create_app(store))
    task = take_task(client, "w1")
    assert client.post("/api/judgment", json=valid_payload("w1", task["task_id"])).status_code == 201
    again = take_task(client, "w1")
    assert again is None  # cannot be assigned the judged summary again


def test_missing_dimension_is_422(client):
    task = take_task(client, "w1")
    payload = valid_payload("w1", task["task_id"])
    del payload["q3"]
    assert client.post("/api/judgment", json=payload).status_code == 422


def test_quality_out_of_range_is_422(client):
    task = take_task(client, "w1")
    payload = valid_payload("w1", task["task_id"], quality=1.3)
    assert client.post("/api/judgment", json=payload).status_code == 422


def test_unknown_task_is_404(client):
    assert client.post("/api/judgment", json=valid_payload("w1", "nope")).status_code == 404


# --- qualification ----------------------------------------------------------------------


@pytest.fixture()
def qual_client(tmp_path):
    store = AnnotationStore(tmp_path / "q.db", seed=11)
    store.load_summaries(summaries_fixture(5))
    store.load_qualification_items(qual_fixture())
    return TestClient(create_app(store))


def answers_from_gold(matches: int) -> list[dict]:
    answers = []
    for i, item in enumerate(qual_fixture()):
        gold = item["gold"]
        if i < matches:
            row = {"task_id": item["item_id"], **gold}
        else:
            row = {"task_id": item["item_id"], "q1": not gold["q1"], "q2": not gold["q2"],
                   "q3": not gold["q3"], "q4": not gold["q4"]}
        answers.append(row)
    return answers


def test_unqualified_annotator_gets_qualification_batch(qual_client):
    resp = qual_client.get("/api/task", params={"annotator": "fresh"})
    body = resp.json()
    assert body["phase"] == "qualification"
    assert len(body["tasks"]) == 4


def test_perfect_match_qualifies(qual_client):
    resp = qual_client.post("/api/qualify", json={"annotator_id": "w", "answers": answers_from_gold(4)})
    assert resp.json()["qualified"] is True
    task = qual_client.get("/api/task", params={"annotator": "w"}).json()
    assert task["phase"] == "main"


def test_three_of_four_matches_qualifies(qual_client):
    resp = qual_client.post("/api/qualify", json={"annotator_id": "w", "answers": answers_from_gold(3)})
    assert resp.json()["qualified"] is True


def test_all_wrong_fails(qual_client):
    resp = qual_client.post("/api/qualify", json={"annotator_id": "w", "answers": answers_from_gold(0)})
    assert resp.json()["qualified"] is False


def test_attempts_beyond_limit_locked(qual_client):
    for _ in range(2):
        qual_client.post("/api/qualify", json={"annotator_id": "w", "answers": answers_from_gold(0)})
    resp = qual_client.post("/api/qualify", json={"annotator_id": "w", "answers": answers_from_gold(4)})
    assert resp.status_code == 423


# --- progress ----------------------------------------------------------------------------


def test_progress_reports_judgments(client):
    for _ in range(3):
        task = take_task(client, "w9")
        client.post("/api/judgment", json=valid_payload("w9", task["task_id"]))
    body = client.get("/api/progress", params={"annotator": "w9"}).json()
    assert body["total_summaries"] == 20
    assert body["annotator"]["completed_count"] == 3
    assert len(body["annotator"]["judgments"]) == 3
    row = body["annotator"]["judgments"][0]
    assert {"record_id", "summary_id", "annotator_id", "q1", "q2", "q3", "q4", "quality", "ts"} <= set(row)


# --- the protocol simulation --------------------------------------------------------------


def simulate(n_summaries: int, annotators: list[str], tmp_path, seed=123):
    store = AnnotationStore(tmp_path / "sim.db", seed=seed)
    store.load_summaries(summaries_fixture(n_summaries))
    client = TestClient(create_app(store))
    quality_cycle = itertools.cycle([0.0, 0.25, 0.5, 0.75, 1.0])
    active = True
    while active:
        active = False
        for annotator in annotators:
            task = take_task(client, annotator)
            if task is None:
                continue
            active = True
            resp = client.post(
                "/api/judgment",
                json=valid_payload(annotator, task["task_id"], quality=next(quality_cycle)),
            )
            assert resp.status_code == 201
    return store


def test_three_annotators_twenty_summaries_terminate_with_60_judgments(tmp_path):
    store = simulate(20, ["w1", "w2", "w3"], tmp_path)
    judgments = store.export_judgments()
    assert len(judgments) == 60
    per_summary: dict[str, set[str]] = {}
    for row in judgments:
        per_summary.setdefault(row["summary_id"], set()).add(row["annotator_id"])
    assert len(per_summary) == 20
    for annotator_set in per_summary.values():
        assert len(annotator_set) == 3  # 3 distinct annotators, no repeats
    per_annotator: dict[str, list[str]] = {}
    for row in judgments:
        per_annotator.setdefault(row["annotator_id"], []).append(row["summary_id"])
    for summaries in per_annotator.values():
        assert len(summaries) == len(set(summaries)) == 20


def test_single_shot_annotators_fill_capacity_exactly(tmp_path):
    store = AnnotationStore(tmp_path / "u.db", seed=20240809)
    store.load_summaries(summaries_fixture(40))
    client = TestClient(create_app(store))
    submitted = 0
    for i in range(400):
        annotator = f"probe{i}"
        task = take_task(client, annotator)
        if task is None:
            continue
        assert client.post("/api/judgment", json=valid_payload(annotator, task["task_id"])).status_code == 201
        submitted += 1
    assert submitted == 40 * 3  # every summary filled to the cap, never beyond
    judgments = store.export_judgments()
    per_summary: dict[str, int] = {}
    for row in judgments:
        per_summary[row["summary_id"]] = per_summary.get(row["summary_id"], 0) + 1
    assert set(per_summary.values()) == {3}


def test_restart_shows_only_complete_records(tmp_path):
    # simulate a restart: a second store instance opens the same database
    db = tmp_path / "restart.db"
    store = AnnotationStore(db, seed=2)
    store.load_summaries(summaries_fixture(3))
    client = TestClient(create_app(store))
    for i in range(3):
        task = take_task(client, "w1")
        client.post("/api/judgment", json=valid_payload("w1", task["task_id"], quality=0.25 * i))
    store.close()

    reopened = AnnotationStore(db, seed=2)
    rows = reopened.export_judgments()
    assert len(rows) == 3
    for row in rows:
        # no partial record: every one of the five dimensions is present and typed
        assert all(isinstance(row[k], bool) for k in ("q1", "q2", "q3", "q4"))
        assert 0.0 <= row["quality"] <= 1.0
        assert row["ts"]
    reopened.close()


def test_uniformity_chi_square_without_capacity(tmp_path):
    from scipy.stats import chisquare

    store = AnnotationStore(tmp_path / "u2.db", seed=7, lease_seconds=0.0)
    store.load_summaries(summaries_fixture(25))
    counts = {f"sum{i:03d}": 0 for i in range(25)}
    # leases expire instantly, no judgments: every draw sees all 25 eligible
    for i in range(2500):
        task = store.next_task(f"probe{i}")
        counts[task.summary_id] += 1
    stat, p = chisquare(list(counts.values()))
    assert p > 0.001
