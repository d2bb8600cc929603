"""End-to-end pipeline orchestration from one TOML config.

Stages run in dependency order; each stage writes a manifest (input hashes,
output hashes, seed) into its own directory under the run root, plus a
verbatim echo of the effective config. Reruns of a deterministic config
produce hash-identical manifests.
"""

from __future__ import annotations

import hashlib
import json
import logging
import shutil
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

STAGE_ORDER = [
    "ingest",
    "build",
    "split",
    "train-explainer",
    "score",
    "agreement",
    "aggregate",
    "export-metric-data",
    "train-metric",
    "significance",
]

# producer of each consumable artifact, for actionable missing-input errors
ARTIFACT_PRODUCERS = {
    "raw_store": "ingest",
    "articles": "ingest",
    "dataset": "build",
    "train_split": "split",
    "test_split": "split",
    "predictions": "train-explainer",
    "profiles": "agreement",
    "labels": "aggregate",
    "metric_train": "export-metric-data",
    "metric_eval": "export-metric-data",
}

_ALLOWED_KEYS: dict[str, set[str]] = {
    "pipeline": {"out_dir", "seed", "stages"},
    "ingest": {"mode", "sources", "raw_fixture", "articles_fixture", "snippets_fixture", "query"},
    "build": {"evidence", "mapping"},
    "split": {"ratio"},
    "explainer": {"checkpoint", "epochs", "lr", "batch", "max_input", "max_output", "beam_width", "warmup_steps"},
    "score": {"metric"},
    "agreement": {"judgments"},
    "aggregate": {"judgments", "summaries", "adjudicator", "threshold", "filter_mode"},
    "export-metric-data": {"train", "eval"},
    "metric": {"checkpoint", "dimensions", "epochs", "lr", "batch", "feature_dim"},
    "significance": {"runs", "dimensions", "checkpoints"},
}


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    pass


@dataclass
class PipelineConfig:
    raw_text: str
    data: dict[str, Any]
    out_dir: Path
    seed: int
    stages: list[str]

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        raw_text = path.read_text(encoding="utf-8")
        try:
            data = tomllib.loads(raw_text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config is not valid TOML: {exc}") from exc
        for section, keys in data.items():
            if section not in _ALLOWED_KEYS:
                raise ConfigError(f"unknown config section [{section}]")
            if not isinstance(keys, dict):
                raise ConfigError(f"top-level key {section!r} must be a section")
            unknown = set(keys) - _ALLOWED_KEYS[section]
            if unknown:
                raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
        pipeline = data.get("pipeline", {})
        if "out_dir" not in pipeline:
            raise ConfigError("[pipeline].out_dir is required")
        stages = pipeline.get("stages", [])
        for stage in stages:
            if stage not in STAGE_ORDER:
                raise ConfigError(f"unknown stage {stage!r}; known: {STAGE_ORDER}")
        return cls(
            raw_text=raw_text,
            data=data,
            out_dir=Path(pipeline["out_dir"]),
            seed=int(pipeline.get("seed", 13)),
            stages=sorted(stages, key=STAGE_ORDER.index),
        )

    def section(self, name: str) -> dict[str, Any]:
        return self.data.get(name, {})


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _hash_artifact(path: Path) -> str:
    if path.is_dir():
        digest = hashlib.sha256()
        for child in sorted(p for p in path.rglob("*") if p.is_file()):
            if child.name.endswith(".meta.json"):
                continue  # fetch-timestamp sidecars would defeat rerun hash equality
            digest.update(str(child.relative_to(path)).encode())
            digest.update(_sha256_file(child).encode())
        return digest.hexdigest()
    return _sha256_file(path)


def _require(path: Path, artifact: str) -> Path:
    if not path.exists():
        producer = ARTIFACT_PRODUCERS.get(artifact, "?")
        raise StageError(
            f"missing {artifact} artifact at {path}; run the `{producer}` stage first"
        )
    return path


@dataclass
class StageContext:
    config: PipelineConfig
    paths: dict[str, Path] = field(default_factory=dict)

    def artifact(self, name: str) -> Path:
        return _require(self.paths[name], name)


def _write_manifest(stage_dir: Path, stage: str, seed: int, config: PipelineConfig,
                    inputs: dict[str, Path], outputs: dict[str, Path]):
    stage_dir.mkdir(parents=True, exist_ok=True)
    (stage_dir / "config.toml").write_text(config.raw_text, encoding="utf-8")
    manifest = {
        "stage": stage,
        "seed": seed,
        "config_sha256": hashlib.sha256(config.raw_text.encode()).hexdigest(),
        "inputs": {name: _hash_artifact(p) for name, p in sorted(inputs.items()) if p.exists()},
        "outputs": {name: _hash_artifact(p) for name, p in sorted(outputs.items()) if p.exists()},
    }
    (stage_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# --- stage implementations ---------------------------------------------------


def _stage_ingest(ctx: StageContext) -> tuple[dict[str, Path], dict[str, Path]]:
    from .ingest.factcheck import load_raw_entries, persist_raw_entries

    section = ctx.config.section("ingest")
    stage_dir = ctx.paths["ingest_dir"]
    raw_dir = stage_dir / "raw"
    articles_path = stage_dir / "articles.jsonl"
    inputs: dict[str, Path] = {}

    if section.get("mode", "fixture") == "fixture":
        fixture_dir = Path(section["raw_fixture"])
        inputs["raw_fixture"] = fixture_dir
        for src_file in sorted(Path(fixture_dir).glob("*.jsonl")):
            entries = load_raw_entries(src_file)
            persist_raw_entries(entries, raw_dir, src_file.stem)
        articles_fixture = Path(section["articles_fixture"])
        inputs["articles_fixture"] = articles_fixture
        raw_dir.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(articles_fixture, articles_path)
    else:
        from .ingest.factcheck import fetch_factcheck_entries
        from .ingest.scraper import ArticleScraper
        from .jsonl import write_jsonl

        scraper = ArticleScraper(cache_dir=stage_dir / "scrape-cache")
        rows = []
        for source in section.get("sources", ["fullfact"]):
            entries = fetch_factcheck_entries(source, query=section.get("query", ""))
            persist_raw_entries(entries, raw_dir, source)
            for entry in entries:
                article = scraper.scrape(entry.review_url)
                rows.append(
                    {
                        "url": article.url,
                        "body_text": article.body_text,
                        "char_count": article.char_count,
                        "fetch_status": article.fetch_status,
                    }
                )
        write_jsonl(articles_path, rows)

    ctx.paths["raw_store"] = raw_dir
    ctx.paths["articles"] = articles_path
    return inputs, {"raw_store": raw_dir, "articles": articles_path}


def _stage_build(ctx: StageContext) -> tuple[dict[str, Path], dict[str, Path]]:
    from .dataset.build import assemble_dataset
    from .dataset.records import write_records

    section = ctx.config.section("build")
    raw_store = ctx.artifact("raw_store")
    articles = ctx.artifact("articles")
    stage_dir = ctx.paths["build_dir"]
    stage_dir.mkdir(parents=True, exist_ok=True)
    records, report = assemble_dataset(raw_store, articles, evidence_kind=section.get("evidence", "article"))
    dataset_path = stage_dir / "dataset.jsonl"
    write_records(dataset_path, records)
    (stage_dir / "build_report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    ctx.paths["dataset"] = dataset_path
    return {"raw_store": raw_store, "articles": articles}, {"dataset": dataset_path}


def _stage_split(ctx: StageContext) -> tuple[dict[str, Path], dict[str, Path]]:
    from .dataset.records import read_records, write_records
    from .dataset.splits import split_dataset

    section = ctx.config.section("split")
    dataset = ctx.artifact("dataset")
    stage_dir = ctx.paths["split_dir"]
    records = read_records(dataset)
    result = split_dataset(records, ratio=float(section.get("ratio", 0.8)), seed=ctx.config.seed)
    train_path, test_path = stage_dir / "train.jsonl", stage_dir / "test.jsonl"
    write_records(train_path, result.train)
    write_records(test_path, result.test)
    ctx.paths["train_split"] = train_path
    ctx.paths["test_split"] = test_path
    return {"dataset": dataset}, {"train_split": train_path, "test_split": test_path}


def _stage_train_explainer(ctx: StageContext) -> tuple[dict[str, Path], dict[str, Path]]:
    from .dataset.records import read_records
    from .explainer.inputs import build_input
    from .explainer.model import GenerationConfig, generate, train
    from .explainer.pretrain import ensure_tiny_checkpoint
    from .jsonl import write_jsonl

    section = ctx.config.section("explainer")
    train_path = ctx.artifact("train_split")
    test_path = ctx.artifact("test_split")
    stage_dir = ctx.paths["train-explainer_dir"]

    checkpoint = section.get("checkpoint", "tiny-pretrained")
    if checkpoint == "tiny-pretrained":
        checkpoint = str(ensure_tiny_checkpoint())
    config = GenerationConfig(
        checkpoint_name=checkpoint,
        max_input_tokens=int(section.get("max_input", 1024)),
        max_output_tokens=int(section.get("max_output", 128)),
        learning_rate=float(section.get("lr", 5e-5)),
        epochs=int(section.get("epochs", 3)),
        per_device_batch=int(section.get("batch", 8)),
        warmup_steps=int(section.get("warmup_steps", 0)),
        seed=ctx.config.seed,
    )
    train_records = read_records(train_path)
    model = train(train_records, config, out_dir=stage_dir / "model", save_each_epoch=False)

    beam = int(section.get("beam_width", 4))
    predictions_path = stage_dir / "predictions.jsonl"
    rows = []
    for record in read_records(test_path):
        seq = build_input(record.claim, record.evidence, token_budget=config.max_input_tokens)
        rows.append(
            {
                "id": record.id,
                "claim": record.claim,
                "prediction": generate(model, seq, beam_width=beam),
                "reference": record.explanation,
            }
        )
    write_jsonl(predictions_path, rows)
    ctx.paths["predictions"] = predictions_path
    return (
        {"train_split": train_path, "test_split": test_path},
        {"model": stage_dir / "model", "predictions": predictions_path},
    )


def _stage_score(ctx: StageContext) -> tuple[dict[str, Path], dict[str, Path]]:
    from .nlg_eval.rouge import corpus_rouge, write_report

    predictions = ctx.artifact("predictions")
    stage_dir = ctx.paths["score_dir"]
    stage_dir.mkdir(parents=True, exist_ok=True)
    score = corpus_rouge(predictions)
    report_path = stage_dir / "rouge.json"
    write_report(score, report_path, per_example_path=stage_dir / "per_example.jsonl")
    return {"predictions": predictions}, {"rouge_report": report_path}


def _stage_agreement(ctx: StageContext) -> tuple[dict[str, Path], dict[str, Path]]:
    from .annotation.agreement import compute_agreement
    from .annotation.judgments import read_judgments
    from .jsonl import write_jsonl

    section = ctx.config.section("agreement")
    judgments_path = Path(section["judgments"])
    _require(judgments_path, "judgments(file from annotation service)")
    stage_dir = ctx.paths["agreement_dir"]
    stage_dir.mkdir(parents=True, exist_ok=True)
    profiles = compute_agreement(read_judgments(judgments_path))
    profiles_path = stage_dir / "profiles.jsonl"
    write_jsonl(
        profiles_path,
        (
            {
                "annotator_id": p.annotator_id,
                "overall": p.overall_agreement,
                "per_question": p.per_question_agreement,
            }
            for p in profiles
        ),
    )
    ctx.paths["profiles"] = profiles_path
    return {"judgments": judgments_path}, {"profiles": profiles_path}


def _load_summary_bundles(path: Path) -> dict[str, Any]:
    from .annotation.adjudicator import SummaryBundle
    from .jsonl import read_jsonl

    bundles = {}
    for row in read_jsonl(path):
        bundles[row["summary_id"]] = SummaryBundle(
            summary_id=row["summary_id"],
            claim=row["claim"],
            evidence=row.get("article", row.get("evidence", "")),
            explanation=row["explanation"],
            verdict=row.get("verdict", ""),
        )
    return bundles


def _stage_aggregate(ctx: StageContext) -> tuple[dict[str, Path], dict[str, Path]]:
    import os

    from .annotation.adjudicator import adjudicator_from_env
    from .annotation.agreement import compute_agreement, filter_annotators
    from .annotation.aggregate import aggregate
    from .annotation.judgments import read_judgments
    from .jsonl import write_jsonl

    section = ctx.config.section("aggregate")
    judgments_path = Path(section["judgments"])
    _require(judgments_path, "judgments(file from annotation service)")
    summaries_path = Path(section["summaries"])
    _require(summaries_path, "summaries(file served for annotation)")
    stage_dir = ctx.paths["aggregate_dir"]
    stage_dir.mkdir(parents=True, exist_ok=True)

    judgments = read_judgments(judgments_path)
    profiles = compute_agreement(judgments)
    filtered = filter_annotators(
        judgments, profiles,
        threshold=float(section.get("threshold", 0.75)),
        mode=section.get("filter_mode", "overall"),
    )
    if "adjudicator" in section:
        os.environ["ADJUDICATOR_BACKEND"] = section["adjudicator"]
    adjudication_log = stage_dir / "adjudications.jsonl"
    adjudication_log.unlink(missing_ok=True)  # fresh log per stage run
    adjudicator = adjudicator_from_env(log_path=adjudication_log)
    labels, stats = aggregate(
        filtered.judgments,
        adjudicator=adjudicator,
        summaries=_load_summary_bundles(summaries_path),
        annotator_dimensions=filtered.annotator_dimensions,
    )
    labels_path = stage_dir / "labels.jsonl"
    write_jsonl(labels_path, (lbl.to_row() for lbl in labels))
    (stage_dir / "stats.json").write_text(
        json.dumps(
            {
                "summaries": stats.summaries,
                "adjudicated": stats.adjudicated,
                "unresolved_by_dimension": stats.unresolved_by_dimension,
                "judgments_removed": filtered.judgments_removed,
                "summaries_dropped": filtered.summaries_dropped,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    ctx.paths["labels"] = labels_path
    ctx.paths["summaries_file"] = summaries_path
    return {"judgments": judgments_path, "summaries": summaries_path}, {"labels": labels_path}


def _stage_export_metric(ctx: StageContext) -> tuple[dict[str, Path], dict[str, Path]]:
    from .annotation.aggregate import AggregatedLabel, export_metric_dataset
    from .jsonl import read_jsonl

    section = ctx.config.section("export-metric-data")
    labels_path = ctx.artifact("labels")
    summaries_path = ctx.paths.get("summaries_file") or Path(ctx.config.section("aggregate")["summaries"])
    stage_dir = ctx.paths["export-metric-data_dir"]
    labels = [
        AggregatedLabel(
            summary_id=row["summary_id"],
            binary_labels=row["labels"],
            quality_score=row["quality"],
            tie_broken_by_adjudicator=set(row["tie_broken_by_adjudicator"]),
        )
        for row in read_jsonl(labels_path)
    ]
    train_path, eval_path = export_metric_dataset(
        labels,
        _load_summary_bundles(summaries_path),
        split_sizes=(int(section["train"]), int(section["eval"])),
        seed=ctx.config.seed,
        out_dir=stage_dir,
    )
    ctx.paths["metric_train"] = train_path
    ctx.paths["metric_eval"] = eval_path
    return {"labels": labels_path}, {"metric_train": train_path, "metric_eval": eval_path}


def _metric_config(section: dict[str, Any], seed: int, overrides: dict[str, Any] | None = None):
    from .metric.train import MetricModelConfig

    kwargs: dict[str, Any] = {
        "checkpoint_name": section.get("checkpoint", "tiny"),
        "epochs": int(section.get("epochs", 4)),
        "learning_rate": float(section.get("lr", 3e-6)),
        "per_device_batch": int(section.get("batch", 4)),
        "seed": seed,
    }
    if "feature_dim" in section:
        kwargs["feature_dim"] = int(section["feature_dim"])
    kwargs.update(overrides or {})
    return MetricModelConfig(**kwargs)


def _stage_train_metric(ctx: StageContext) -> tuple[dict[str, Path], dict[str, Path]]:
    from .metric.train import ALL_DIMENSIONS, evaluate_metric_model, load_metric_rows, train_metric_model

    section = ctx.config.section("metric")
    train_rows_path = ctx.artifact("metric_train")
    eval_rows_path = ctx.artifact("metric_eval")
    stage_dir = ctx.paths["train-metric_dir"]
    stage_dir.mkdir(parents=True, exist_ok=True)
    train_rows = load_metric_rows(train_rows_path)
    eval_rows = load_metric_rows(eval_rows_path)
    report = {}
    for dimension in section.get("dimensions", list(ALL_DIMENSIONS)):
        config = _metric_config(section, ctx.config.seed)
        model = train_metric_model(train_rows, dimension, config, out_dir=stage_dir / dimension)
        report[dimension] = evaluate_metric_model(model, eval_rows, train_rows=train_rows)
    report_path = stage_dir / "eval.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return (
        {"metric_train": train_rows_path, "metric_eval": eval_rows_path},
        {"eval_report": report_path},
    )


def _stage_significance(ctx: StageContext) -> tuple[dict[str, Path], dict[str, Path]]:
    import random as _random

    from .metric.scores import mcc_from_predictions
    from .metric.significance import significance_from_scores
    from .metric.train import load_metric_rows, rows_for_dimension, train_metric_model

    section = ctx.config.section("significance")
    train_rows_path = ctx.artifact("metric_train")
    eval_rows_path = ctx.artifact("metric_eval")
    stage_dir = ctx.paths["significance_dir"]
    stage_dir.mkdir(parents=True, exist_ok=True)
    all_rows = load_metric_rows(train_rows_path) + load_metric_rows(eval_rows_path)
    n_runs = int(section.get("runs", 5))
    if n_runs < 2:
        raise StageError("significance needs runs >= 2")
    dimensions = section.get("dimensions", ["article_contradiction"])
    checkpoints = section.get("checkpoints", ["tiny"])
    seeds = list(range(1, n_runs + 1))

    reports = {}
    for dimension in dimensions:
        scores_by_condition: dict[str, list[float]] = {}
        for checkpoint in checkpoints:
            scores = []
            for seed in seeds:
                shuffled = list(all_rows)
                _random.Random(seed).shuffle(shuffled)
                cut = int(len(shuffled) * 0.8)
                train_rows, eval_rows = shuffled[:cut], shuffled[cut:]
                config = _metric_config(section | {"checkpoint": checkpoint}, seed)
                model = train_metric_model(train_rows, dimension, config)
                texts, targets = rows_for_dimension(eval_rows, dimension)
                preds = [bool(p >= 0.5) for p in model.predict(texts)]
                scores.append(mcc_from_predictions(preds, [t >= 0.5 for t in targets]))
            scores_by_condition[checkpoint] = scores
        reports[dimension] = significance_from_scores(scores_by_condition, seeds=seeds).to_report()
    report_path = stage_dir / "significance.json"
    report_path.write_text(json.dumps(reports, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return (
        {"metric_train": train_rows_path, "metric_eval": eval_rows_path},
        {"significance_report": report_path},
    )


_STAGE_FUNCS: dict[str, Callable[[StageContext], tuple[dict[str, Path], dict[str, Path]]]] = {
    "ingest": _stage_ingest,
    "build": _stage_build,
    "split": _stage_split,
    "train-explainer": _stage_train_explainer,
    "score": _stage_score,
    "agreement": _stage_agreement,
    "aggregate": _stage_aggregate,
    "export-metric-data": _stage_export_metric,
    "train-metric": _stage_train_metric,
    "significance": _stage_significance,
}


def run_pipeline(config: PipelineConfig, stages: list[str] | None = None) -> int:
    """Run the requested stages in dependency order. Returns the exit code
    contract: 0 ok, 1 stage failure (includes missing upstream artifacts)."""
    requested = sorted(stages or config.stages, key=STAGE_ORDER.index)
    ctx = StageContext(config=config)
    for stage in STAGE_ORDER:
        ctx.paths[f"{stage}_dir"] = config.out_dir / stage
    # artifacts from stages that already ran in an earlier invocation
    _adopt_existing_artifacts(ctx)

    for stage in requested:
        stage_dir = ctx.paths[f"{stage}_dir"]
        log.info("stage %s -> %s", stage, stage_dir)
        try:
            inputs, outputs = _STAGE_FUNCS[stage](ctx)
        except StageError as exc:
            log.error("stage %s failed: %s", stage, exc)
            print(f"error: stage {stage}: {exc}", file=sys.stderr)
            return 1
        _write_manifest(stage_dir, stage, config.seed, config, inputs, outputs)
    return 0


def _adopt_existing_artifacts(ctx: StageContext):
    mapping = {
        "raw_store": ctx.paths["ingest_dir"] / "raw",
        "articles": ctx.paths["ingest_dir"] / "articles.jsonl",
        "dataset": ctx.paths["build_dir"] / "dataset.jsonl",
        "train_split": ctx.paths["split_dir"] / "train.jsonl",
        "test_split": ctx.paths["split_dir"] / "test.jsonl",
        "predictions": ctx.paths["train-explainer_dir"] / "predictions.jsonl",
        "profiles": ctx.paths["agreement_dir"] / "profiles.jsonl",
        "labels": ctx.paths["aggregate_dir"] / "labels.jsonl",
        "metric_train": ctx.paths["export-metric-data_dir"] / "metric_train.jsonl",
        "metric_eval": ctx.paths["export-metric-data_dir"] / "metric_eval.jsonl",
    }
    ctx.paths.update(mapping)
