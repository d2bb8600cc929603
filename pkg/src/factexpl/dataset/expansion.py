"""Snippet expansion: augment each search snippet with a matching paragraph
from the page it came from.

Two strategies: exact_match (the snippet text appears verbatim inside a
paragraph) and lexical_sim (token-set Jaccard between snippet and paragraph
reaches the threshold). Unmatched snippets pass through unchanged, order is
preserved, and a snippet is never shortened.
"""

from __future__ import annotations

from ..ingest.scraper import ScrapedArticle
from ..ingest.search import SearchSnippetSet
from ..textutil import jaccard, strip_punctuation
from .records import EvidenceBundle

STRATEGIES = ("exact_match", "lexical_sim")


def _paragraphs(article: ScrapedArticle) -> list[str]:
    return [p for p in article.body_text.split("\n") if p.strip()]


def _normalize_for_containment(text: str) -> str:
    return " ".join(strip_punctuation(text.lower()).split())


def _best_paragraph(snippet_text: str, paragraphs: list[str], strategy: str, threshold: float) -> str | None:
    if strategy == "exact_match":
        needle = _normalize_for_containment(snippet_text)
        if not needle:
            return None
        for para in paragraphs:
            if needle in _normalize_for_containment(para):
                return para
        return None
    best, best_sim = None, 0.0
    for para in paragraphs:
        sim = jaccard(snippet_text, para)
        if sim > best_sim:
            best, best_sim = para, sim
    return best if best_sim >= threshold else None


def expand_snippets(
    snippets: SearchSnippetSet,
    pages: dict[str, ScrapedArticle],
    strategy: str,
    ls_threshold: float = 0.5,
) -> EvidenceBundle:
    """Expand each snippet with the matching paragraph of its source page.

    `pages` maps source_url to the scraped page; a missing or failed page
    leaves that snippet unchanged. Expanded snippets become
    ``snippet + "\\n" + paragraph``.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown expansion strategy {strategy!r}")
    if strategy == "lexical_sim" and not 0.0 <= ls_threshold <= 1.0:
        raise ValueError(f"ls_threshold must be in [0, 1], got {ls_threshold}")

    expanded: list[str] = []
    for snippet in snippets.snippets:
        page = pages.get(snippet.source_url)
        para = None
        if page is not None and page.fetch_status == "ok":
            para = _best_paragraph(snippet.snippet_text, _paragraphs(page), strategy, ls_threshold)
        expanded.append(snippet.snippet_text if para is None else snippet.snippet_text + "\n" + para)

    return EvidenceBundle(
        kind="snippets_expanded",
        snippets=tuple(expanded),
        expansion_strategy=strategy,
        ls_threshold=ls_threshold if strategy == "lexical_sim" else None,
    )
