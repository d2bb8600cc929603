"""Fact-check article scraper with a readability-style main-text heuristic.

The extractor walks the HTML with the stdlib parser, ignores script/style
and obvious chrome containers (nav, header, footer, aside, forms), collects
block-level text runs, and keeps the paragraphs that look like prose.
Whitespace is normalized to single spaces inside a paragraph and paragraphs
are joined with a newline. Results are cached by URL.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from html.parser import HTMLParser
from pathlib import Path
from typing import Optional

import requests

log = logging.getLogger(__name__)

_SKIP_CONTAINERS = {"script", "style", "noscript", "nav", "header", "footer", "aside", "form", "svg", "iframe"}
_BLOCK_TAGS = {"p", "div", "article", "section", "li", "blockquote", "h1", "h2", "h3", "h4", "td", "pre", "br"}
# prose heuristic: keep blocks with enough words unless they read like link lists
_MIN_PARAGRAPH_WORDS = 4


@dataclass(frozen=True)
class ScrapedArticle:
    url: str
    body_text: str
    char_count: int
    fetch_status: str  # ok | http_error | parse_error

    def __post_init__(self):
        if self.char_count != len(self.body_text):
            raise ValueError("char_count must equal len(body_text)")
        if self.fetch_status == "ok" and self.char_count == 0:
            raise ValueError("fetch_status=ok requires non-empty body_text")


class _MainTextParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self._skip_depth = 0
        self._chunks: list[str] = []
        self._current: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_CONTAINERS:
            self._skip_depth += 1
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_endtag(self, tag):
        if tag in _SKIP_CONTAINERS and self._skip_depth > 0:
            self._skip_depth -= 1
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_data(self, data):
        if self._skip_depth == 0 and data.strip():
            self._current.append(data)

    def _flush(self):
        if self._current:
            text = re.sub(r"\s+", " ", " ".join(self._current)).strip()
            if text:
                self._chunks.append(text)
            self._current = []

    def paragraphs(self) -> list[str]:
        self._flush()
        kept = []
        for chunk in self._chunks:
            words = chunk.split()
            if len(words) >= _MIN_PARAGRAPH_WORDS:
                kept.append(chunk)
        return kept


def extract_main_text(html: str) -> str:
    """Boilerplate-stripped article text: paragraphs separated by '\\n'."""
    parser = _MainTextParser()
    parser.feed(html)
    parser.close()
    return "\n".join(parser.paragraphs())


class ArticleScraper:
    """URL-keyed caching scraper; safe to call concurrently across URLs."""

    def __init__(self, session: Optional[requests.Session] = None, cache_dir: str | Path | None = None):
        self.session = session or requests.Session()
        self.cache: dict[str, ScrapedArticle] = {}
        self.cache_dir = Path(cache_dir) if cache_dir else None
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)

    def _cache_path(self, url: str) -> Optional[Path]:
        if not self.cache_dir:
            return None
        import hashlib

        return self.cache_dir / (hashlib.sha256(url.encode()).hexdigest()[:24] + ".json")

    def scrape(self, url: str) -> ScrapedArticle:
        if url in self.cache:
            return self.cache[url]
        path = self._cache_path(url)
        if path and path.exists():
            import json

            row = json.loads(path.read_text(encoding="utf-8"))
            article = ScrapedArticle(**row)
            self.cache[url] = article
            return article

        article = self._fetch(url)
        self.cache[url] = article
        if path:
            import json

            path.write_text(
                json.dumps(
                    {
                        "url": article.url,
                        "body_text": article.body_text,
                        "char_count": article.char_count,
                        "fetch_status": article.fetch_status,
                    }
                ),
                encoding="utf-8",
            )
        return article

    def _fetch(self, url: str) -> ScrapedArticle:
        try:
            resp = self.session.get(url, timeout=30, headers={"User-Agent": "factexpl/0.1"})
        except requests.RequestException as exc:
            log.warning("fetch failed for %s: %s", url, exc)
            return ScrapedArticle(url, "", 0, "http_error")
        if resp.status_code >= 400:
            return ScrapedArticle(url, "", 0, "http_error")
        try:
            text = extract_main_text(resp.text)
        except Exception as exc:  # html.parser rarely raises, but stay total
            log.warning("parse failed for %s: %s", url, exc)
            return ScrapedArticle(url, "", 0, "parse_error")
        if not text:
            return ScrapedArticle(url, "", 0, "parse_error")
        return ScrapedArticle(url, text, len(text), "ok")


def scrape_article(url: str, scraper: ArticleScraper | None = None) -> ScrapedArticle:
    """Fetch one article; module-level convenience over ArticleScraper."""
    return (scraper or ArticleScraper()).scrape(url)
