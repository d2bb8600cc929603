"""Client for the Google FactCheck claim-search API plus the raw JSONL store.

Each targeted outlet (bbc, fullfact, factcheck) is queried through its
review-publisher site filter. bbc and fullfact return a free-form textual
verdict that doubles as the explanation downstream; factcheck entries have
no long-form verdict, so the review title serves as explanation.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Optional
from urllib.parse import urlparse

import requests

from ..jsonl import read_jsonl, write_jsonl

log = logging.getLogger(__name__)

API_URL = "https://factchecktools.googleapis.com/v1alpha1/claims:search"
PUBLISHER_SITES = {
    "bbc": "bbc.co.uk",
    "fullfact": "fullfact.org",
    "factcheck": "factcheck.org",
}

RETRY_ATTEMPTS = 3
RETRY_BASE_DELAY = 1.0  # seconds, doubled per attempt


class TransportError(RuntimeError):
    """Raised when the upstream API stays unreachable after retries."""


@dataclass(frozen=True)
class RawFactCheckEntry:
    claim_text: str
    claimant: Optional[str]
    claim_date: Optional[str]  # ISO-8601 date
    review_publisher: str
    review_url: str
    review_title: str
    textual_verdict: Optional[str]
    language_code: str

    def __post_init__(self):
        if self.review_publisher not in PUBLISHER_SITES:
            raise ValueError(f"unknown review publisher {self.review_publisher!r}")
        parsed = urlparse(self.review_url)
        if not (parsed.scheme and parsed.netloc):
            raise ValueError(f"review_url not parseable: {self.review_url!r}")

    def to_row(self) -> dict[str, Any]:
        """Raw-store JSONL row with the stable field names."""
        return {
            "claim": self.claim_text,
            "claimant": self.claimant,
            "claim_date": self.claim_date,
            "publisher": self.review_publisher,
            "url": self.review_url,
            "title": self.review_title,
            "verdict": self.textual_verdict,
            "language": self.language_code,
        }

    @classmethod
    def from_row(cls, row: dict[str, Any]) -> "RawFactCheckEntry":
        return cls(
            claim_text=row["claim"],
            claimant=row.get("claimant"),
            claim_date=row.get("claim_date"),
            review_publisher=row["publisher"],
            review_url=row["url"],
            review_title=row["title"],
            textual_verdict=row.get("verdict"),
            language_code=row.get("language") or "en",
        )


def _request_with_retry(
    session: requests.Session,
    params: dict[str, Any],
    sleep: Callable[[float], None] = time.sleep,
) -> dict[str, Any]:
    delay = RETRY_BASE_DELAY
    last_exc: Exception | None = None
    for attempt in range(RETRY_ATTEMPTS):
        try:
            resp = session.get(API_URL, params=params, timeout=30)
            resp.raise_for_status()
            return resp.json()
        except (requests.ConnectionError, requests.Timeout, requests.HTTPError) as exc:
            last_exc = exc
            if attempt < RETRY_ATTEMPTS - 1:
                log.warning("factcheck API attempt %d failed (%s); retrying in %.0fs", attempt + 1, exc, delay)
                sleep(delay)
                delay *= 2
    raise TransportError(f"factcheck API unreachable after {RETRY_ATTEMPTS} attempts: {last_exc}")


def _parse_claim(item: dict[str, Any], source: str) -> Optional[RawFactCheckEntry]:
    """One API claim object -> entry, or None when the payload is unusable."""
    try:
        reviews = item.get("claimReview") or []
        if not reviews:
            raise KeyError("claimReview")
        review = reviews[0]
        return RawFactCheckEntry(
            claim_text=item["text"],
            claimant=item.get("claimant"),
            claim_date=(item.get("claimDate") or "")[:10] or None,
            review_publisher=source,
            review_url=review["url"],
            review_title=review.get("title") or "",
            textual_verdict=review.get("textualRating"),
            language_code=review.get("languageCode") or "en",
        )
    except (KeyError, ValueError, TypeError) as exc:
        fragment = str(item)[:200]
        log.warning("skipping malformed factcheck payload (%s): %s", exc, fragment)
        return None


def _in_window(entry: RawFactCheckEntry, window: tuple[dt.date, dt.date] | None) -> bool:
    if window is None or entry.claim_date is None:
        return True
    try:
        day = dt.date.fromisoformat(entry.claim_date)
    except ValueError:
        return True
    return window[0] <= day <= window[1]


def fetch_factcheck_entries(
    source: str,
    query_window: tuple[dt.date, dt.date] | None = None,
    query: str = "",
    api_key: str | None = None,
    session: requests.Session | None = None,
    page_size: int = 100,
    max_pages: int = 200,
    sleep: Callable[[float], None] = time.sleep,
) -> list[RawFactCheckEntry]:
    """Fetch and deduplicate claim-review entries for one outlet.

    Dedup key is (claim_text, review_url); first occurrence wins. Entries
    whose claim date falls outside the window are dropped client-side.
    """
    if source not in PUBLISHER_SITES:
        raise ValueError(f"unknown source {source!r}; expected one of {sorted(PUBLISHER_SITES)}")
    api_key = api_key or os.environ.get("FACTCHECK_API_KEY")
    if not api_key:
        raise RuntimeError("FACTCHECK_API_KEY is not configured")
    session = session or requests.Session()

    entries: list[RawFactCheckEntry] = []
    seen: set[tuple[str, str]] = set()
    params: dict[str, Any] = {
        "key": api_key,
        "reviewPublisherSiteFilter": PUBLISHER_SITES[source],
        "pageSize": page_size,
        "languageCode": "en",
    }
    if query:
        params["query"] = query
    for _ in range(max_pages):
        payload = _request_with_retry(session, dict(params), sleep=sleep)
        for item in payload.get("claims") or []:
            entry = _parse_claim(item, source)
            if entry is None or not _in_window(entry, query_window):
                continue
            key = (entry.claim_text, entry.review_url)
            if key in seen:
                continue
            seen.add(key)
            entries.append(entry)
        token = payload.get("nextPageToken")
        if not token:
            break
        params["pageToken"] = token
    return entries


def persist_raw_entries(entries: Iterable[RawFactCheckEntry], out_dir: str | Path, source: str) -> Path:
    """Write one JSONL file per source, sorted by (claim, url) so that
    re-running ingestion over the same responses is byte-identical.

    The fetch timestamp lives in a sidecar meta file, keeping the data file
    stable across reruns.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = sorted((e.to_row() for e in entries), key=lambda r: (r["claim"], r["url"]))
    path = out_dir / f"{source}.jsonl"
    n = write_jsonl(path, rows)
    meta = {"source": source, "count": n, "fetched_at": dt.datetime.now(dt.timezone.utc).isoformat()}
    (out_dir / f"{source}.meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return path


def load_raw_entries(path: str | Path) -> list[RawFactCheckEntry]:
    return [RawFactCheckEntry.from_row(row) for row in read_jsonl(path)]
