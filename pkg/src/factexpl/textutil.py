"""Shared text normalization helpers."""

from __future__ import annotations

import unicodedata


def strip_punctuation(text: str) -> str:
    """Replace every Unicode punctuation character with a space."""
    return "".join(" " if unicodedata.category(ch).startswith("P") else ch for ch in text)


def simple_tokens(text: str) -> list[str]:
    """Lowercase, strip punctuation (Unicode-aware), split on whitespace."""
    return strip_punctuation(text.lower()).split()


def token_set(text: str) -> set[str]:
    return set(simple_tokens(text))


def jaccard(a: str, b: str) -> float:
    """Jaccard similarity of the two texts' lowercased, punctuation-stripped token sets."""
    sa, sb = token_set(a), token_set(b)
    if not sa and not sb:
        return 0.0
    union = sa | sb
    return len(sa & sb) / len(union)
