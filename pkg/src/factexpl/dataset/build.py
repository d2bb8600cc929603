"""Assembly of the explanation-generation dataset from ingestion outputs.

Joins raw fact-check entries with their scraped articles (and optionally
search snippets), applies the publisher explanation rule, normalizes the
verdict label, and accounts for every dropped record in a build report.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from ..ingest.factcheck import RawFactCheckEntry, load_raw_entries
from ..ingest.scraper import ScrapedArticle
from ..ingest.search import SearchSnippetSet
from ..jsonl import read_jsonl
from .records import ClaimRecord, EvidenceBundle
from .verdicts import VerdictMapping, normalize_verdict

log = logging.getLogger(__name__)


@dataclass
class BuildReport:
    total_raw: int = 0
    assembled: int = 0
    dropped: dict[str, int] = field(default_factory=dict)

    def drop(self, reason: str):
        self.dropped[reason] = self.dropped.get(reason, 0) + 1

    def to_json(self) -> str:
        return json.dumps(
            {"total_raw": self.total_raw, "assembled": self.assembled, "dropped": self.dropped},
            indent=2,
            sort_keys=True,
        )


def record_id(entry: RawFactCheckEntry) -> str:
    key = f"{entry.review_publisher}|{entry.review_url}|{entry.claim_text}"
    return hashlib.sha1(key.encode("utf-8")).hexdigest()[:16]


def explanation_for(entry: RawFactCheckEntry) -> str | None:
    """bbc/fullfact carry a sentence-long verdict that is the explanation;
    factcheck has no long-form verdict, so its review title serves instead."""
    if entry.review_publisher == "factcheck":
        return entry.review_title or None
    return entry.textual_verdict or None


def load_articles(path: str | Path) -> dict[str, ScrapedArticle]:
    """Articles JSONL ({url, body_text, char_count, fetch_status}) keyed by URL."""
    articles = {}
    for row in read_jsonl(path):
        articles[row["url"]] = ScrapedArticle(
            url=row["url"],
            body_text=row["body_text"],
            char_count=row["char_count"],
            fetch_status=row["fetch_status"],
        )
    return articles


def load_snippet_sets(path: str | Path) -> dict[str, SearchSnippetSet]:
    return {row["claim"]: SearchSnippetSet.from_row(row) for row in read_jsonl(path)}


def assemble_dataset(
    raw_store: str | Path,
    articles: str | Path,
    snippets: str | Path | None = None,
    evidence_kind: str = "article",
    mapping: VerdictMapping | None = None,
) -> tuple[list[ClaimRecord], BuildReport]:
    """Join raw entries, articles and (optionally) snippets into ClaimRecords.

    `raw_store` is a JSONL file or a directory of per-source JSONL files.
    Records whose article fetch failed, or that lack a join key, are dropped
    with a per-reason count; nothing here raises on bad rows.
    """
    raw_store = Path(raw_store)
    paths = sorted(raw_store.glob("*.jsonl")) if raw_store.is_dir() else [raw_store]
    article_map = load_articles(articles)
    snippet_map = load_snippet_sets(snippets) if snippets else {}
    mapping = mapping or VerdictMapping.shipped()

    report = BuildReport()
    records: list[ClaimRecord] = []
    for path in paths:
        for entry in load_raw_entries(path):
            report.total_raw += 1
            explanation = explanation_for(entry)
            if not explanation:
                report.drop("missing_explanation")
                continue
            if not entry.claim_text:
                report.drop("missing_claim")
                continue

            if evidence_kind == "article":
                article = article_map.get(entry.review_url)
                if article is None:
                    report.drop("missing_article")
                    log.warning("no scraped article for %s; record skipped", entry.review_url)
                    continue
                if article.fetch_status != "ok":
                    report.drop("scrape_failed")
                    continue
                evidence = EvidenceBundle(kind="article", article_text=article.body_text)
            elif evidence_kind == "snippets":
                snippet_set = snippet_map.get(entry.claim_text)
                if snippet_set is None or not snippet_set.snippets:
                    report.drop("missing_snippets")
                    continue
                evidence = EvidenceBundle(
                    kind="snippets",
                    snippets=tuple(s.snippet_text for s in snippet_set.snippets),
                )
            else:
                raise ValueError(f"unknown evidence_kind {evidence_kind!r}")

            verdict_text = entry.textual_verdict or ""
            records.append(
                ClaimRecord(
                    id=record_id(entry),
                    claim=entry.claim_text,
                    evidence=evidence,
                    verdict_text=verdict_text,
                    explanation=explanation,
                    publisher=entry.review_publisher,
                    nominal_label=normalize_verdict(verdict_text, mapping).category if verdict_text else None,
                )
            )
            report.assembled += 1
    return records, report
