"""FactCheck API client, article scraper and snippet retrieval."""

from __future__ import annotations

import json

import pytest
import requests

from factexpl.ingest.factcheck import (
    RawFactCheckEntry,
    TransportError,
    fetch_factcheck_entries,
    load_raw_entries,
    persist_raw_entries,
)
from factexpl.ingest.scraper import ArticleScraper, ScrapedArticle, extract_main_text
from factexpl.ingest.search import FixtureSearchBackend, SearchSnippetSet, fetch_snippets

# --- stub HTTP session ---------------------------------------------------------


class StubResponse:
    def __init__(self, payload=None, status_code=200, text=""):
        self._payload = payload
        self.status_code = status_code
        self.text = text

    def json(self):
        return self._payload

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.HTTPError(f"status {self.status_code}")


class StubSession:
    """Queue of responses/exceptions; records request params."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def get(self, url, params=None, timeout=None, headers=None):
        self.calls.append({"url": url, "params": params})
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


def api_payload(claims, next_token=None):
    payload = {"claims": claims}
    if next_token:
        payload["nextPageToken"] = next_token
    return payload


def api_claim(text, url, title="Some title", rating="Not true.", publisher_site="fullfact.org"):
    return {
        "text": text,
        "claimant": "somebody",
        "claimDate": "2021-03-04T00:00:00Z",
        "claimReview": [
            {
                "publisher": {"site": publisher_site},
                "url": url,
                "title": title,
                "textualRating": rating,
                "languageCode": "en",
            }
        ],
    }


# --- factcheck API -----------------------------------------------------------------


def test_fetch_parses_free_form_verdicts_for_fullfact():
    session = StubSession([StubResponse(api_payload([
        api_claim("claim one", "https://fullfact.org/a", rating="The real number is lower."),
    ]))])
    entries = fetch_factcheck_entries("fullfact", api_key="k", session=session)
    assert len(entries) == 1
    assert entries[0].textual_verdict == "The real number is lower."
    assert entries[0].claim_date == "2021-03-04"
    assert session.calls[0]["params"]["reviewPublisherSiteFilter"] == "fullfact.org"


def test_fetch_factcheck_entries_without_verdict_keep_title():
    session = StubSession([StubResponse(api_payload([
        {
            "text": "a satirical claim",
            "claimReview": [
                {"url": "https://factcheck.org/x", "title": "Viral post is satire", "languageCode": "en"}
            ],
        }
    ]))])
    entries = fetch_factcheck_entries("factcheck", api_key="k", session=session)
    assert entries[0].textual_verdict is None
    assert entries[0].review_title == "Viral post is satire"


def test_fetch_deduplicates_on_claim_and_url():
    claim = api_claim("dup claim", "https://fullfact.org/a")
    session = StubSession([
        StubResponse(api_payload([claim, dict(claim)], next_token="t2")),
        StubResponse(api_payload([dict(claim)])),
    ])
    entries = fetch_factcheck_entries("fullfact", api_key="k", session=session)
    assert len(entries) == 1


def test_fetch_empty_response_is_empty_list():
    session = StubSession([StubResponse({"claims": []})])
    assert fetch_factcheck_entries("fullfact", api_key="k", session=session) == []


def test_fetch_skips_malformed_payload_entries(caplog):
    session = StubSession([StubResponse(api_payload([
        {"text": "no review at all"},
        api_claim("good claim", "https://fullfact.org/good"),
    ]))])
    entries = fetch_factcheck_entries("fullfact", api_key="k", session=session)
    assert [e.claim_text for e in entries] == ["good claim"]


def test_fetch_retries_with_backoff_then_succeeds():
    sleeps = []
    session = StubSession([
        requests.ConnectionError("down"),
        requests.ConnectionError("still down"),
        StubResponse(api_payload([api_claim("c", "https://fullfact.org/a")])),
    ])
    entries = fetch_factcheck_entries("fullfact", api_key="k", session=session, sleep=sleeps.append)
    assert len(entries) == 1
    assert sleeps == [1.0, 2.0]  # exponential from 1s


def test_fetch_surfaces_transport_error_after_three_attempts():
    sleeps = []
    session = StubSession([requests.ConnectionError("down")] * 3)
    with pytest.raises(TransportError):
        fetch_factcheck_entries("fullfact", api_key="k", session=session, sleep=sleeps.append)
    assert len(sleeps) == 2


def test_fetch_applies_date_window_client_side():
    import datetime as dt

    session = StubSession([StubResponse(api_payload([
        api_claim("inside", "https://fullfact.org/in"),
        {**api_claim("outside", "https://fullfact.org/out"), "claimDate": "2019-01-01T00:00:00Z"},
    ]))])
    window = (dt.date(2021, 1, 1), dt.date(2021, 12, 31))
    entries = fetch_factcheck_entries("fullfact", query_window=window, api_key="k", session=session)
    assert [e.claim_text for e in entries] == ["inside"]


def test_fetch_requires_api_key(monkeypatch):
    monkeypatch.delenv("FACTCHECK_API_KEY", raising=False)
    with pytest.raises(RuntimeError, match="FACTCHECK_API_KEY"):
        fetch_factcheck_entries("fullfact")


def test_entry_validation():
    with pytest.raises(ValueError):
        RawFactCheckEntry("c", None, None, "unknown", "https://x.org/a", "t", None, "en")
    with pytest.raises(ValueError):
        RawFactCheckEntry("c", None, None, "bbc", "not a url", "t", None, "en")


# --- raw store ------------------------------------------------------------------------


def entry(i: int) -> RawFactCheckEntry:
    return RawFactCheckEntry(
        claim_text=f"claim {i}",
        claimant=None,
        claim_date="2021-01-02",
        review_publisher="fullfact",
        review_url=f"https://fullfact.org/{i}",
        review_title=f"title {i}",
        textual_verdict="Not true.",
        language_code="en",
    )


def test_persist_is_byte_identical_across_reruns(tmp_path):
    entries = [entry(3), entry(1), entry(2)]
    path1 = persist_raw_entries(entries, tmp_path / "a", "fullfact")
    path2 = persist_raw_entries(list(reversed(entries)), tmp_path / "b", "fullfact")
    assert path1.read_bytes() == path2.read_bytes()


def test_raw_entry_round_trip(tmp_path):
    entries = [entry(i) for i in range(4)]
    path = persist_raw_entries(entries, tmp_path, "fullfact")
    loaded = load_raw_entries(path)
    assert sorted(loaded, key=lambda e: e.review_url) == sorted(entries, key=lambda e: e.review_url)


def test_raw_store_uses_stable_field_names(tmp_path):
    path = persist_raw_entries([entry(0)], tmp_path, "fullfact")
    row = json.loads(path.read_text().splitlines()[0])
    assert set(row) == {"claim", "claimant", "claim_date", "publisher", "url", "title", "verdict", "language"}


# --- scraper ------------------------------------------------------------------------------


def fixture_paragraphs() -> list[str]:
    """Deterministic paragraphs whose extracted text is exactly 1800 chars
    (600 + 600 + 598 joined by two newlines); lengths asserted independently."""
    words = (
        "officials said the numbers were drawn from provisional weekly returns "
        "and revised after audit checks were completed in the following quarter "
    ).split()

    def make(target: int, offset: int) -> str:
        text = ""
        i = offset
        while len(text) < target:
            text += words[i % len(words)] + " "
            i += 1
        text = text[:target]
        while text.endswith(" "):
            text = text[:-1] + "x"
        return text

    return [make(600, 0), make(600, 3), make(598, 7)]


def fixture_html(paragraphs: list[str]) -> str:
    return f"""<html><head><title>Page</title><script>var x = 1;</script>
<style>.a {{ color: red }}</style></head>
<body>
<nav><a href="/">Home</a> <a href="/about">About this site and more</a></nav>
<header><div>Site header with a very long banner text that should vanish</div></header>
<article>
<p>{paragraphs[0]}</p>
<div>ad</div>
<p>{paragraphs[1]}</p>
<p>{paragraphs[2]}</p>
</article>
<footer><p>Copyright notice that also must not appear anywhere at all</p></footer>
</body></html>"""


def test_extracted_text_has_expected_char_count():
    paragraphs = fixture_paragraphs()
    expected_text = "\n".join(paragraphs)
    # independent count of the fixture's extracted text
    assert [len(p) for p in paragraphs] == [600, 600, 598]
    assert len(expected_text) == 1800
    text = extract_main_text(fixture_html(paragraphs))
    assert text == expected_text
    assert len(text) == 1800


def test_extractor_strips_boilerplate_and_short_blocks():
    text = extract_main_text(fixture_html(fixture_paragraphs()))
    assert "Copyright" not in text
    assert "Home" not in text
    assert "banner" not in text
    assert "var x" not in text
    assert "ad" not in text.split("\n")


def test_scraper_success_and_cache(tmp_path):
    html = fixture_html(fixture_paragraphs())
    session = StubSession([StubResponse(status_code=200, text=html)])
    scraper = ArticleScraper(session=session, cache_dir=tmp_path)
    first = scraper.scrape("https://example.org/article")
    assert first.fetch_status == "ok"
    assert first.char_count == 1800
    # cached: no further HTTP call
    second = scraper.scrape("https://example.org/article")
    assert second == first
    assert len(session.calls) == 1
    # a fresh scraper hits the disk cache, not the network
    fresh = ArticleScraper(session=StubSession([]), cache_dir=tmp_path)
    assert fresh.scrape("https://example.org/article") == first


def test_scraper_http_error_gives_empty_body():
    session = StubSession([StubResponse(status_code=404, text="nope")])
    article = ArticleScraper(session=session).scrape("https://example.org/missing")
    assert article.fetch_status == "http_error"
    assert article.char_count == 0


def test_scraper_unparseable_content_is_parse_error():
    session = StubSession([StubResponse(status_code=200, text="<script>only chrome</script>")])
    article = ArticleScraper(session=session).scrape("https://example.org/empty")
    assert article.fetch_status == "parse_error"
    assert article.char_count == 0


def test_scraped_article_invariants():
    with pytest.raises(ValueError):
        ScrapedArticle("u", "text", 99, "ok")  # char_count mismatch
    with pytest.raises(ValueError):
        ScrapedArticle("u", "", 0, "ok")  # ok requires body


# --- snippets ----------------------------------------------------------------------------


def fixture_backend(tmp_path, hits):
    path = tmp_path / "search.json"
    path.write_text(json.dumps({"some claim": hits}), encoding="utf-8")
    return FixtureSearchBackend(path)


def test_snippets_exclude_domain_and_preserve_order(tmp_path):
    hits = [{"snippet": f"snippet {i}", "url": f"https://site{i}.example/p"} for i in range(10)]
    hits[4]["url"] = "https://fullfact.org/the-check"
    backend = fixture_backend(tmp_path, hits)
    result = fetch_snippets("some claim", "fullfact.org", backend=backend)
    assert len(result.snippets) == 9
    assert [s.rank for s in result.snippets] == [1, 2, 3, 4, 6, 7, 8, 9, 10]
    assert [s.snippet_text for s in result.snippets] == [f"snippet {i}" for i in range(10) if i != 4]


def test_snippets_excludes_www_variant(tmp_path):
    hits = [{"snippet": "x", "url": "https://www.fullfact.org/a"}]
    result = fetch_snippets("some claim", "fullfact.org", backend=fixture_backend(tmp_path, hits))
    assert result.snippets == ()


def test_snippets_zero_results_is_valid_empty_set(tmp_path):
    result = fetch_snippets("some claim", "fullfact.org", backend=fixture_backend(tmp_path, []))
    assert result.snippets == ()


def test_fixture_backend_order_is_deterministic(tmp_path):
    hits = [{"snippet": f"s{i}", "url": f"https://h{i}.example"} for i in range(5)]
    backend = fixture_backend(tmp_path, hits)
    a = fetch_snippets("some claim", "none.example", backend=backend)
    b = fetch_snippets("some claim", "none.example", backend=backend)
    assert a.to_row() == b.to_row()
    assert [s.snippet_text for s in a.snippets] == [f"s{i}" for i in range(5)]


def test_snippet_set_invariants():
    from factexpl.ingest.search import SearchSnippet

    with pytest.raises(ValueError, match="excluded domain"):
        SearchSnippetSet(
            claim_text="c",
            snippets=(SearchSnippet(1, "s", "https://bad.org/x"),),
            excluded_domain="bad.org",
        )
    with pytest.raises(ValueError, match="unique and ascending"):
        SearchSnippetSet(
            claim_text="c",
            snippets=(
                SearchSnippet(2, "s", "https://a.org/x"),
                SearchSnippet(1, "s", "https://b.org/x"),
            ),
            excluded_domain="z.org",
        )


def test_snippet_set_round_trip(tmp_path):
    hits = [{"snippet": "alpha", "url": "https://a.example/1"}, {"snippet": "beta", "url": "https://b.example/2"}]
    result = fetch_snippets("some claim", "none.example", backend=fixture_backend(tmp_path, hits))
    assert SearchSnippetSet.from_row(result.to_row()) == result
