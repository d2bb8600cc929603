"""Command-line entry point: one subcommand per pipeline operation plus the
`pipeline` orchestrator."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .jsonl import read_jsonl, write_jsonl

log = logging.getLogger(__name__)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


# --- ingest ------------------------------------------------------------------


@main.command()
@click.option("--source", type=click.Choice(["bbc", "fullfact", "factcheck"]), required=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--query", default="", help="Optional API query term.")
@click.option("--scrape/--no-scrape", default=True, help="Also fetch the fact-check articles.")
def ingest(source: str, out_dir: Path, query: str, scrape: bool):
    """Fetch claim reviews for one outlet and persist the raw store."""
    from .ingest.factcheck import fetch_factcheck_entries, persist_raw_entries
    from .ingest.scraper import ArticleScraper

    entries = fetch_factcheck_entries(source, query=query)
    path = persist_raw_entries(entries, out_dir, source)
    click.echo(f"{len(entries)} entries -> {path}")
    if scrape:
        scraper = ArticleScraper(cache_dir=out_dir / "scrape-cache")
        rows = []
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
        articles_path = out_dir / "articles.jsonl"
        write_jsonl(articles_path, rows)
        ok = sum(1 for r in rows if r["fetch_status"] == "ok")
        click.echo(f"{ok}/{len(rows)} articles scraped -> {articles_path}")


@main.command()
@click.option("--claims", "claims_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--exclude-domain", required=True)
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
def snippets(claims_file: Path, exclude_domain: str, out_file: Path):
    """Fetch search snippets per claim (backend from SEARCH_BACKEND)."""
    from .ingest.search import backend_from_env, fetch_snippets

    backend = backend_from_env()
    rows = []
    for row in read_jsonl(claims_file):
        claim = row["claim"] if isinstance(row, dict) else str(row)
        rows.append(fetch_snippets(claim, exclude_domain, backend=backend).to_row())
    write_jsonl(out_file, rows)
    click.echo(f"{len(rows)} snippet sets -> {out_file}")


# --- dataset -------------------------------------------------------------------


@main.command("build-dataset")
@click.option("--raw", "raw_store", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--articles", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--snippets", "snippets_file", type=click.Path(exists=True, path_type=Path))
@click.option("--evidence", type=click.Choice(["article", "snippets"]), default="article")
@click.option("--mapping", "mapping_file", type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
@click.option("--report", "report_file", type=click.Path(path_type=Path))
def build_dataset(raw_store, articles, snippets_file, evidence, mapping_file, out_file, report_file):
    """Join raw entries + articles (+snippets) into the dataset JSONL."""
    from .dataset.build import assemble_dataset
    from .dataset.records import write_records
    from .dataset.verdicts import VerdictMapping

    mapping = VerdictMapping.from_tsv(mapping_file) if mapping_file else VerdictMapping.shipped()
    records, report = assemble_dataset(raw_store, articles, snippets_file, evidence_kind=evidence, mapping=mapping)
    write_records(out_file, records)
    click.echo(f"{report.assembled} records -> {out_file}")
    if report_file:
        Path(report_file).write_text(report.to_json() + "\n", encoding="utf-8")
    else:
        click.echo(report.to_json())


@main.command()
@click.option("--data", "data_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--ratio", type=float, default=0.8, show_default=True)
@click.option("--seed", type=int, default=13, show_default=True)
@click.option("--out-train", type=click.Path(path_type=Path), required=True)
@click.option("--out-test", type=click.Path(path_type=Path), required=True)
def split(data_file: Path, ratio: float, seed: int, out_train: Path, out_test: Path):
    """Deterministic train/test split (floor rule)."""
    from .dataset.records import read_records, write_records
    from .dataset.splits import split_dataset

    result = split_dataset(read_records(data_file), ratio=ratio, seed=seed)
    write_records(out_train, result.train)
    write_records(out_test, result.test)
    click.echo(f"train={len(result.train)} test={len(result.test)} seed={seed}")


@main.command()
@click.option("--snippets", "snippets_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--pages", "pages_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--strategy", type=click.Choice(["em", "ls"]), required=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
def expand(snippets_file, pages_file, strategy, threshold, out_file):
    """Expand snippets with matching paragraphs from their source pages."""
    from .dataset.build import load_articles
    from .dataset.expansion import expand_snippets
    from .ingest.search import SearchSnippetSet

    pages = load_articles(pages_file)
    strategy_name = "exact_match" if strategy == "em" else "lexical_sim"
    rows = []
    for row in read_jsonl(snippets_file):
        snippet_set = SearchSnippetSet.from_row(row)
        bundle = expand_snippets(snippet_set, pages, strategy_name, ls_threshold=threshold)
        rows.append({"claim": snippet_set.claim_text, "snippets": list(bundle.snippets or ())})
    write_jsonl(out_file, rows)
    click.echo(f"{len(rows)} expanded snippet sets -> {out_file}")


@main.command()
@click.option("--data", "data_file", type=click.Path(exists=True, path_type=Path), required=True,
              help="Dataset JSONL; uses the claim field.")
@click.option("--k", "n_topics", type=int, default=10, show_default=True)
@click.option("--max-features", type=int, default=500, show_default=True)
@click.option("--max-df", type=float, default=0.5, show_default=True)
@click.option("--min-df", type=int, default=10, show_default=True)
@click.option("--max-iter", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_file", type=click.Path(path_type=Path))
def topics(data_file, n_topics, max_features, max_df, min_df, max_iter, seed, out_file):
    """Fit the descriptive LDA topic model over claims."""
    from .dataset.topics import fit_topic_model

    claims = [row["claim"] for row in read_jsonl(data_file)]
    model = fit_topic_model(
        claims, n_topics=n_topics, max_features=max_features,
        max_df=max_df, min_df=min_df, max_iter=max_iter, seed=seed,
    )
    table = model.table(10)
    for topic_id, terms in enumerate(table):
        click.echo(f"topic {topic_id}: " + ", ".join(f"{t} ({w:.3f})" for t, w in terms))
    if out_file:
        Path(out_file).write_text(
            json.dumps([{t: w for t, w in terms} for terms in table], indent=2) + "\n", encoding="utf-8"
        )


# --- explainer -----------------------------------------------------------------


@main.command("train-explainer")
@click.option("--data", "data_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--checkpoint", default="tiny-pretrained", show_default=True,
              help="t5-small/base/large, led-base, tiny, tiny-pretrained, or a model dir.")
@click.option("--max-input", type=click.Choice(["1024", "2048"]), default="1024", show_default=True)
@click.option("--epochs", type=int, default=3, show_default=True)
@click.option("--lr", type=float, default=5e-5, show_default=True)
@click.option("--batch", type=int, default=8, show_default=True)
@click.option("--seed", type=int, default=13, show_default=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--predict", "predict_file", type=click.Path(exists=True, path_type=Path),
              help="Also generate predictions for this dataset JSONL.")
def train_explainer(data_file, checkpoint, max_input, epochs, lr, batch, seed, out_dir, predict_file):
    """Fine-tune an explanation generator on (claim+evidence -> explanation)."""
    from .dataset.records import read_records
    from .explainer.inputs import build_input
    from .explainer.model import GenerationConfig, generate, train
    from .explainer.pretrain import ensure_tiny_checkpoint

    if checkpoint == "tiny-pretrained":
        checkpoint = str(ensure_tiny_checkpoint())
    config = GenerationConfig(
        checkpoint_name=checkpoint,
        max_input_tokens=int(max_input),
        epochs=epochs,
        learning_rate=lr,
        per_device_batch=batch,
        seed=seed,
    )
    records = read_records(data_file)
    model = train(records, config, out_dir=out_dir)
    first, last = model.training_loss_curve[0][1], model.training_loss_curve[-1][1]
    click.echo(f"trained {len(records)} records, loss {first:.4f} -> {last:.4f}, model in {out_dir}")
    if predict_file:
        rows = []
        for record in read_records(predict_file):
            seq = build_input(record.claim, record.evidence, token_budget=config.max_input_tokens)
            rows.append(
                {"id": record.id, "claim": record.claim,
                 "prediction": generate(model, seq), "reference": record.explanation}
            )
        predictions_path = Path(out_dir) / "predictions.jsonl"
        write_jsonl(predictions_path, rows)
        click.echo(f"{len(rows)} predictions -> {predictions_path}")


@main.command()
@click.option("--model", "model_dir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--claim", required=True)
@click.option("--evidence", "evidence_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--beam", type=int, default=4, show_default=True)
def explain(model_dir, claim, evidence_file, beam):
    """Generate one explanation for a claim given an evidence text file."""
    from .dataset.records import EvidenceBundle
    from .explainer.inputs import build_input
    from .explainer.model import generate, load_explainer

    model = load_explainer(model_dir)
    evidence = EvidenceBundle(kind="article", article_text=Path(evidence_file).read_text(encoding="utf-8"))
    seq = build_input(claim, evidence, token_budget=model.config.max_input_tokens)
    click.echo(generate(model, seq, beam_width=beam))


# --- evaluation ------------------------------------------------------------------


@main.command()
@click.option("--pred", "pred_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--metric", type=click.Choice(["rouge", "all"]), default="rouge", show_default=True)
@click.option("--out", "out_file", type=click.Path(path_type=Path))
def score(pred_file, metric, out_file):
    """Corpus ROUGE over a predictions JSONL file."""
    from .nlg_eval.rouge import corpus_rouge, write_report

    result = corpus_rouge(pred_file)
    click.echo(
        f"ROUGE-1 {result.rouge1_f:.2f}  ROUGE-2 {result.rouge2_f:.2f}  "
        f"ROUGE-L {result.rougeL_f:.2f}  (n={result.n})"
    )
    if out_file:
        write_report(result, out_file, per_example_path=Path(out_file).with_suffix(".per_example.jsonl"))


@main.command()
@click.option("--pred-a", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--pred-b", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--test", "test_kind", type=click.Choice(["paired-t"]), default="paired-t", show_default=True)
@click.option("--metric", type=click.Choice(["rouge1", "rouge2", "rougeL"]), default="rouge1", show_default=True)
def compare(pred_a, pred_b, test_kind, metric):
    """Paired significance test between two prediction files (paired by id)."""
    from .nlg_eval.rouge import score_pair
    from .nlg_eval.stats import paired_t_test

    idx = {"rouge1": 0, "rouge2": 1, "rougeL": 2}[metric]
    rows_a = {row["id"]: row for row in read_jsonl(pred_a)}
    rows_b = {row["id"]: row for row in read_jsonl(pred_b)}
    common = sorted(set(rows_a) & set(rows_b))
    if len(common) < 2:
        raise click.ClickException(f"only {len(common)} shared example ids between the two files")
    scores_a = [score_pair(rows_a[i]["prediction"], rows_a[i]["reference"])[idx] for i in common]
    scores_b = [score_pair(rows_b[i]["prediction"], rows_b[i]["reference"])[idx] for i in common]
    result = paired_t_test(scores_a, scores_b)
    click.echo(f"{metric}: t={result.t_statistic:.4f} p={result.p_value:.4g} n={result.n}")


# --- annotation -------------------------------------------------------------------


@main.command()
@click.option("--in", "judgments_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_file", type=click.Path(path_type=Path))
def agreement(judgments_file, out_file):
    """Per-annotator agreement profiles plus the perfect/partial table."""
    from .annotation.agreement import compute_agreement, perfect_partial_agreement
    from .annotation.judgments import read_judgments

    judgments = read_judgments(judgments_file)
    profiles = compute_agreement(judgments)
    for p in profiles:
        overall = "n/a" if p.overall_agreement is None else f"{p.overall_agreement:.3f}"
        click.echo(f"{p.annotator_id}: overall={overall}")
    table, excluded = perfect_partial_agreement(judgments)
    for dim, (perfect, partial) in table.items():
        click.echo(f"{dim}: perfect={perfect:.2f} partial={partial:.2f}")
    if excluded:
        click.echo(f"(excluded {excluded} summaries without exactly 3 judgments)")
    if out_file:
        write_jsonl(
            out_file,
            (
                {"annotator_id": p.annotator_id, "overall": p.overall_agreement,
                 "per_question": p.per_question_agreement}
                for p in profiles
            ),
        )


@main.command("filter")
@click.option("--in", "judgments_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--threshold", type=float, default=0.75, show_default=True)
@click.option("--mode", type=click.Choice(["overall", "per_question"]), default="overall", show_default=True)
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
def filter_cmd(judgments_file, threshold, mode, out_file):
    """Drop judgments from annotators at or below the agreement threshold."""
    from .annotation.agreement import compute_agreement, filter_annotators
    from .annotation.judgments import read_judgments, write_judgments

    judgments = read_judgments(judgments_file)
    result = filter_annotators(judgments, compute_agreement(judgments), threshold, mode=mode)
    write_judgments(out_file, result.judgments)
    click.echo(
        f"kept {len(result.judgments)} judgments "
        f"(removed {result.judgments_removed}, dropped {result.summaries_dropped} summaries)"
    )


@main.command()
@click.option("--in", "judgments_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--summaries", "summaries_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
@click.option("--adjudication-log", type=click.Path(path_type=Path))
def aggregate(judgments_file, summaries_file, out_file, adjudication_log):
    """Aggregate filtered judgments; ADJUDICATOR_BACKEND breaks 1-1 ties."""
    from .annotation.adjudicator import adjudicator_from_env
    from .annotation.aggregate import aggregate as run_aggregate
    from .annotation.judgments import read_judgments
    from .pipeline import _load_summary_bundles

    judgments = read_judgments(judgments_file)
    adjudicator = adjudicator_from_env(log_path=adjudication_log)
    labels, stats = run_aggregate(judgments, adjudicator, _load_summary_bundles(Path(summaries_file)))
    write_jsonl(out_file, (lbl.to_row() for lbl in labels))
    click.echo(
        f"{stats.summaries} summaries aggregated, {stats.adjudicated} ties adjudicated, "
        f"unresolved: {stats.unresolved_by_dimension or 'none'}"
    )


@main.command("export-metric-data")
@click.option("--labels", "labels_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--summaries", "summaries_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--train", "train_n", type=int, default=2100, show_default=True)
@click.option("--eval", "eval_n", type=int, default=521, show_default=True)
@click.option("--seed", type=int, default=13, show_default=True)
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def export_metric_data(labels_file, summaries_file, train_n, eval_n, seed, out_dir):
    """Deterministically split aggregated labels into metric train/eval files."""
    from .annotation.aggregate import AggregatedLabel, export_metric_dataset
    from .pipeline import _load_summary_bundles

    labels = [
        AggregatedLabel(
            summary_id=row["summary_id"],
            binary_labels=row["labels"],
            quality_score=row["quality"],
            tie_broken_by_adjudicator=set(row["tie_broken_by_adjudicator"]),
        )
        for row in read_jsonl(labels_file)
    ]
    train_path, eval_path = export_metric_dataset(
        labels, _load_summary_bundles(Path(summaries_file)), (train_n, eval_n), seed, out_dir
    )
    click.echo(f"{train_n} train -> {train_path}\n{eval_n} eval -> {eval_path}")


@main.command("serve-annotation")
@click.option("--summaries", "summaries_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--qualification", "qualification_file", type=click.Path(exists=True, path_type=Path))
@click.option("--db", "db_path", type=click.Path(path_type=Path), default="annotation.db", show_default=True)
@click.option("--port", type=int, default=8008, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--char-min", type=int, default=1000, show_default=True)
@click.option("--char-max", type=int, default=2500, show_default=True)
@click.option("--seed", type=int, default=None, help="Seed the task-assignment RNG.")
def serve_annotation(summaries_file, qualification_file, db_path, port, host, char_min, char_max, seed):
    """Serve the annotation HTTP API for the browser UI."""
    from .service.app import build_store, serve

    store = build_store(
        summaries_file, db_path,
        qualification_file=qualification_file,
        char_min=char_min, char_max=char_max, seed=seed,
    )
    serve(store, host=host, port=port)


# --- metric learning --------------------------------------------------------------


@main.command("train-metric")
@click.option("--data", "train_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--dimension", type=click.Choice(
    ["article_contradiction", "self_contradiction", "hallucination", "convincingness", "quality"]), required=True)
@click.option("--checkpoint", default="tiny", show_default=True,
              help="deberta-base, deberta-xxlarge or tiny.")
@click.option("--epochs", type=int, default=4, show_default=True)
@click.option("--lr", type=float, default=3e-6, show_default=True)
@click.option("--batch", type=int, default=4, show_default=True)
@click.option("--seed", type=int, default=13, show_default=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
def train_metric(train_file, dimension, checkpoint, epochs, lr, batch, seed, out_dir):
    """Train one quality-dimension predictor."""
    from .metric.train import MetricModelConfig, load_metric_rows, train_metric_model

    config = MetricModelConfig(
        checkpoint_name=checkpoint, epochs=epochs, learning_rate=lr,
        per_device_batch=batch, seed=seed,
    )
    model = train_metric_model(load_metric_rows(train_file), dimension, config, out_dir=out_dir)
    click.echo(f"{dimension} model trained ({len(model.loss_curve)} steps) -> {out_dir}")


@main.command("eval-metric")
@click.option("--model", "model_dir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--data", "eval_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--train-data", "train_file", type=click.Path(exists=True, path_type=Path),
              help="Baseline statistics come from these labels when given.")
def eval_metric(model_dir, eval_file, train_file):
    """Evaluate a trained metric model against the baseline."""
    from .metric.train import (
        MetricModelConfig,
        TinyMetricBackend,
        TrainedMetricModel,
        evaluate_metric_model,
        load_metric_rows,
    )

    meta = json.loads((Path(model_dir) / "training.json").read_text(encoding="utf-8"))
    backend = TinyMetricBackend.load(Path(model_dir))
    model = TrainedMetricModel(
        backend=backend, dimension=meta["dimension"], config=MetricModelConfig(**meta["config"])
    )
    report = evaluate_metric_model(
        model,
        load_metric_rows(eval_file),
        train_rows=load_metric_rows(train_file) if train_file else None,
    )
    click.echo(json.dumps(report, indent=2, sort_keys=True))


@main.command()
@click.option("--data", "data_dir", type=click.Path(exists=True, path_type=Path), required=True,
              help="Directory holding metric_train.jsonl and metric_eval.jsonl.")
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--dimension", "dimensions", multiple=True, default=["article_contradiction"], show_default=True)
@click.option("--checkpoint", "checkpoints", multiple=True, default=["tiny"], show_default=True)
@click.option("--lr", type=float, default=3e-6, show_default=True)
@click.option("--epochs", type=int, default=4, show_default=True)
@click.option("--out", "out_file", type=click.Path(path_type=Path))
def significance(data_dir, runs, dimensions, checkpoints, lr, epochs, out_file):
    """Re-run metric training over fresh splits and test significance."""
    from .pipeline import ConfigError, PipelineConfig, StageContext, _stage_significance

    config = PipelineConfig(
        raw_text="", data={
            "significance": {
                "runs": runs, "dimensions": list(dimensions),
                "checkpoints": list(checkpoints), "lr": lr, "epochs": epochs,
            }
        },
        out_dir=Path(data_dir).parent if Path(data_dir).name == "export-metric-data" else Path(data_dir),
        seed=13, stages=[],
    )
    ctx = StageContext(config=config)
    ctx.paths["significance_dir"] = Path(out_file).parent if out_file else Path(data_dir) / "significance"
    ctx.paths["metric_train"] = Path(data_dir) / "metric_train.jsonl"
    ctx.paths["metric_eval"] = Path(data_dir) / "metric_eval.jsonl"
    try:
        _stage_significance(ctx)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    report_path = ctx.paths["significance_dir"] / "significance.json"
    click.echo(report_path.read_text(encoding="utf-8"))


# --- pipeline ------------------------------------------------------------------------


@main.group()
def pipeline():
    """Multi-stage pipeline orchestration."""


@pipeline.command("run")
@click.option("--config", "config_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--stages", "stages_csv", help="Comma-separated stage subset (default: config's list).")
def pipeline_run(config_file, stages_csv):
    """Run pipeline stages in dependency order (exit 0/1/2)."""
    from .pipeline import ConfigError, PipelineConfig, run_pipeline

    try:
        config = PipelineConfig.load(config_file)
        stages = [s.strip() for s in stages_csv.split(",")] if stages_csv else None
        if stages:
            from .pipeline import STAGE_ORDER

            for stage in stages:
                if stage not in STAGE_ORDER:
                    raise ConfigError(f"unknown stage {stage!r}; known: {STAGE_ORDER}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        sys.exit(2)
    sys.exit(run_pipeline(config, stages))


if __name__ == "__main__":
    main()
