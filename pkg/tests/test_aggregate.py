"""Aggregation of judgments into labels, tie adjudication, and the metric
dataset export."""

from __future__ import annotations

import json

import pytest

from factexpl.annotation.adjudicator import (
    Adjudicator,
    AdjudicationError,
    FixtureAdjudicator,
    LiveAdjudicator,
    SubjectiveDimensionError,
    SummaryBundle,
    build_prompt,
    parse_yes_no,
)
from factexpl.annotation.aggregate import AggregatedLabel, aggregate, export_metric_dataset, metric_input_text
from factexpl.annotation.judgments import JudgmentRecord, read_judgments
from factexpl.jsonl import read_jsonl


def judgment(summary_id, annotator_id, answers, quality=0.5):
    q1, q2, q3, q4 = answers
    return JudgmentRecord(
        summary_id=summary_id,
        annotator_id=annotator_id,
        article_contradiction=q1,
        self_contradiction=q2,
        hallucination=q3,
        convincingness=q4,
        overall_quality=quality,
    )


def bundles_for(summary_ids):
    return {
        sid: SummaryBundle(
            summary_id=sid,
            claim=f"claim {sid}",
            evidence=f"evidence {sid}",
            explanation=f"explanation {sid}",
            verdict="False.",
        )
        for sid in summary_ids
    }


# --- adjudicator client -----------------------------------------------------------


def test_prompt_contains_all_task_parts():
    bundle = SummaryBundle("s1", "the moon is cheese", "lunar rock data", "False. It is rock.", "False.")
    prompt = build_prompt(bundle, "self_contradiction")
    assert "the moon is cheese" in prompt
    assert "lunar rock data" in prompt
    assert "False. It is rock." in prompt
    assert "contradict itself" in prompt
    assert "yes or no" in prompt


def test_subjective_dimension_refused():
    adjudicator = Adjudicator(FixtureAdjudicator.__new__(FixtureAdjudicator))
    bundle = SummaryBundle("s1", "c", "e", "x", "v")
    with pytest.raises(SubjectiveDimensionError):
        adjudicator.adjudicate_tie(bundle, "convincingness")


def test_parse_yes_no():
    assert parse_yes_no("Yes") is True
    assert parse_yes_no(" no. ") is False
    assert parse_yes_no("Yes, it contradicts the evidence.") is True
    with pytest.raises(AdjudicationError):
        parse_yes_no("maybe?")


def test_fixture_adjudicator_pass_through(tmp_path):
    path = tmp_path / "adj.json"
    path.write_text(json.dumps({"s1:hallucination": True}), encoding="utf-8")
    adjudicator = Adjudicator(FixtureAdjudicator(path), log_path=tmp_path / "log.jsonl")
    bundle = SummaryBundle("s1", "c", "e", "x", "v")
    assert adjudicator.adjudicate_tie(bundle, "hallucination") is True
    with pytest.raises(AdjudicationError):
        adjudicator.adjudicate_tie(SummaryBundle("s2", "c", "e", "x", "v"), "hallucination")
    logged = list(read_jsonl(tmp_path / "log.jsonl"))
    assert logged == [{"summary_id": "s1", "dimension": "hallucination", "verdict": True}]


def test_live_adjudicator_round_trip_with_stub_session():
    class StubSession:
        def post(self, url, headers=None, json=None, timeout=None):
            class Resp:
                status_code = 200

                def raise_for_status(self):
                    pass

                def json(self):
                    return {"choices": [{"message": {"content": "No."}}]}

            assert "chat/completions" in url
            assert json["temperature"] == 0
            return Resp()

    client = LiveAdjudicator(api_key="k", session=StubSession())
    adjudicator = Adjudicator(client)
    assert adjudicator.adjudicate_tie(SummaryBundle("s1", "c", "e", "x", "v"), "hallucination") is False


# --- aggregation rules --------------------------------------------------------------


def test_majority_of_three():
    judgments = [
        judgment("s1", "a", (True, True, False, True)),
        judgment("s1", "b", (True, False, False, True)),
        judgment("s1", "c", (False, False, False, True)),
    ]
    labels, stats = aggregate(judgments)
    assert labels[0].binary_labels == {
        "article_contradiction": True,
        "self_contradiction": False,
        "hallucination": False,
        "convincingness": True,
    }
    assert stats.adjudicated == 0


def test_quality_is_mean():
    judgments = [
        judgment("s1", "a", (True, True, True, True), quality=0.6),
        judgment("s1", "b", (True, True, True, True), quality=0.8),
        judgment("s1", "c", (True, True, True, True), quality=1.0),
    ]
    labels, _ = aggregate(judgments)
    assert labels[0].quality_score == pytest.approx(0.8)


def test_tie_goes_to_adjudicator_with_provenance(tmp_path):
    path = tmp_path / "adj.json"
    path.write_text(json.dumps({"s1:article_contradiction": False}), encoding="utf-8")
    adjudicator = Adjudicator(FixtureAdjudicator(path))
    judgments = [
        judgment("s1", "a", (True, False, False, False)),
        judgment("s1", "b", (False, False, False, False)),
    ]
    labels, stats = aggregate(judgments, adjudicator, bundles_for(["s1"]))
    assert labels[0].binary_labels["article_contradiction"] is False
    assert labels[0].tie_broken_by_adjudicator == {"article_contradiction"}
    assert stats.adjudicated == 1


def test_subjective_tie_is_dropped_per_dimension(tmp_path):
    path = tmp_path / "adj.json"
    path.write_text("{}", encoding="utf-8")
    adjudicator = Adjudicator(FixtureAdjudicator(path))
    judgments = [
        judgment("s1", "a", (False, False, False, True)),
        judgment("s1", "b", (False, False, False, False)),
    ]
    labels, stats = aggregate(judgments, adjudicator, bundles_for(["s1"]))
    assert "convincingness" not in labels[0].binary_labels
    assert stats.unresolved_by_dimension == {"convincingness": 1}


def test_unreachable_adjudicator_leaves_tie_unresolved(tmp_path):
    path = tmp_path / "adj.json"
    path.write_text("{}", encoding="utf-8")  # no recorded answers
    adjudicator = Adjudicator(FixtureAdjudicator(path))
    judgments = [
        judgment("s1", "a", (True, False, False, False)),
        judgment("s1", "b", (False, False, False, False)),
    ]
    labels, stats = aggregate(judgments, adjudicator, bundles_for(["s1"]))
    assert "article_contradiction" not in labels[0].binary_labels
    assert stats.unresolved_by_dimension == {"article_contradiction": 1}


def test_aggregate_is_permutation_invariant(tmp_path):
    path = tmp_path / "adj.json"
    path.write_text(json.dumps({"s1:hallucination": True}), encoding="utf-8")
    judgments = [
        judgment("s1", "a", (True, False, True, False), quality=0.25),
        judgment("s1", "b", (True, False, False, False), quality=0.75),
        judgment("s2", "a", (False, False, False, False), quality=0.5),
    ]
    baseline = None
    for perm in ([0, 1, 2], [2, 1, 0], [1, 2, 0]):
        adjudicator = Adjudicator(FixtureAdjudicator(path))
        labels, _ = aggregate([judgments[i] for i in perm], adjudicator, bundles_for(["s1", "s2"]))
        rows = [lbl.to_row() for lbl in labels]
        if baseline is None:
            baseline = rows
        assert rows == baseline


def test_provenance_only_on_objective_dimensions():
    with pytest.raises(ValueError):
        AggregatedLabel("s1", {}, 0.5, tie_broken_by_adjudicator={"convincingness"})


# --- the 50-summary audit ----------------------------------------------------------


def test_aggregation_audit_matches_handwritten_expected_file(data_dir, tmp_path):
    fixture = data_dir / "aggregation"
    judgments = read_judgments(fixture / "judgments.jsonl")
    log_path = tmp_path / "adjudications.jsonl"
    adjudicator = Adjudicator(FixtureAdjudicator(fixture / "adjudicator.json"), log_path=log_path)
    summary_ids = sorted({j.summary_id for j in judgments})
    labels, stats = aggregate(judgments, adjudicator, bundles_for(summary_ids))
    produced = [lbl.to_row() for lbl in labels]
    expected = json.loads((fixture / "expected_labels.json").read_text(encoding="utf-8"))
    assert produced == expected
    assert stats.summaries == 50
    assert stats.adjudicated == 8
    assert stats.unresolved_by_dimension == {"convincingness": 4, "hallucination": 3}
    # every tie provenance entry is reproducible from the adjudication log
    logged = {(row["summary_id"], row["dimension"]) for row in read_jsonl(log_path)}
    provenance = {
        (lbl.summary_id, dim) for lbl in labels for dim in lbl.tie_broken_by_adjudicator
    }
    assert logged == provenance


# --- export ---------------------------------------------------------------------------


def make_labels(n):
    return [
        AggregatedLabel(
            summary_id=f"s{i:03d}",
            binary_labels={"article_contradiction": i % 3 == 0, "self_contradiction": False,
                           "hallucination": i % 4 == 0, "convincingness": i % 2 == 0},
            quality_score=(i % 5) / 4,
        )
        for i in range(n)
    ]


def test_export_metric_dataset_sizes_and_text(tmp_path):
    labels = make_labels(10)
    bundles = bundles_for([lbl.summary_id for lbl in labels])
    train_path, eval_path = export_metric_dataset(labels, bundles, (8, 2), seed=3, out_dir=tmp_path)
    train_rows = list(read_jsonl(train_path))
    eval_rows = list(read_jsonl(eval_path))
    assert len(train_rows) == 8 and len(eval_rows) == 2
    row = train_rows[0]
    sid = row["summary_id"]
    assert row["text"] == f"claim {sid}\nFalse.\nexplanation {sid}"
    assert set(row["labels"]) <= {"article_contradiction", "self_contradiction", "hallucination", "convincingness"}


def test_export_deterministic_under_seed(tmp_path):
    labels = make_labels(10)
    bundles = bundles_for([lbl.summary_id for lbl in labels])
    ids = []
    for run in range(3):
        out = tmp_path / f"run{run}"
        train_path, eval_path = export_metric_dataset(labels, bundles, (8, 2), seed=42, out_dir=out)
        ids.append(
            (
                [r["summary_id"] for r in read_jsonl(train_path)],
                [r["summary_id"] for r in read_jsonl(eval_path)],
            )
        )
    assert ids[0] == ids[1] == ids[2]
    # train and eval are disjoint
    assert not set(ids[0][0]) & set(ids[0][1])


def test_export_insufficient_labels_errors(tmp_path):
    labels = make_labels(5)
    bundles = bundles_for([lbl.summary_id for lbl in labels])
    with pytest.raises(ValueError, match="8\\+2=10"):
        export_metric_dataset(labels, bundles, (8, 2), seed=1, out_dir=tmp_path)


def test_metric_input_text_order():
    bundle = SummaryBundle("s", "the claim", "the evidence", "the generated explanation", "Verdict.")
    assert metric_input_text(bundle) == "the claim\nVerdict.\nthe generated explanation"


def test_paper_reference_export_sizes_recorded():
    # The original corpus exports 2100 training and 521 evaluation examples
    # out of 2621 annotated summaries.
    assert 2100 + 521 == 2621
