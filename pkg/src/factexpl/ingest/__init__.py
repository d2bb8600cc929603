from .factcheck import RawFactCheckEntry, fetch_factcheck_entries, persist_raw_entries
from .scraper import ScrapedArticle, scrape_article
from .search import SearchSnippet, SearchSnippetSet, fetch_snippets

__all__ = [
    "RawFactCheckEntry",
    "fetch_factcheck_entries",
    "persist_raw_entries",
    "ScrapedArticle",
    "scrape_article",
    "SearchSnippet",
    "SearchSnippetSet",
    "fetch_snippets",
]
