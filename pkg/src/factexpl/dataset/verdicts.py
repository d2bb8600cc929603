"""Normalization of free-form textual verdicts to seven nominal categories.

The mapping ships as an editable TSV (pattern<TAB>category). Patterns are
matched case-insensitively as substrings, longest pattern first, first match
wins; anything unmatched falls back to the configured default and logs a
miss. The shipped table is a best-effort reconstruction and is expected to
be overridden for serious runs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

log = logging.getLogger(__name__)

CATEGORIES = ("TRUE", "ALMOST", "HALF", "HARDLY", "FALSE", "MISLEADING", "SATIRE")


@dataclass(frozen=True)
class NominalVerdict:
    category: str

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown nominal category {self.category!r}")


class VerdictMapping:
    """Ordered pattern table driving `normalize_verdict`."""

    def __init__(self, patterns: list[tuple[str, str]], default: str = "FALSE"):
        if default not in CATEGORIES:
            raise ValueError(f"unknown default category {default!r}")
        for pattern, category in patterns:
            if category not in CATEGORIES:
                raise ValueError(f"unknown category {category!r} for pattern {pattern!r}")
            if not pattern:
                raise ValueError("empty pattern")
        # longest first so "mostly true" beats "true"; ties keep file order
        self.patterns = sorted(
            [(p.lower(), c) for p, c in patterns],
            key=lambda pc: -len(pc[0]),
        )
        self.default = default
        self.miss_count = 0

    @classmethod
    def from_tsv(cls, path: str | Path, default: str = "FALSE") -> "VerdictMapping":
        patterns = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'pattern<TAB>category', got {line!r}")
                patterns.append((parts[0], parts[1]))
        return cls(patterns, default=default)

    @classmethod
    def shipped(cls, default: str = "FALSE") -> "VerdictMapping":
        ref = resources.files("factexpl.dataset").joinpath("data/verdict_mapping.tsv")
        with resources.as_file(ref) as path:
            return cls.from_tsv(path, default=default)

    def lookup(self, verdict_text: str) -> str:
        lowered = verdict_text.lower()
        for pattern, category in self.patterns:
            if pattern in lowered:
                return category
        self.miss_count += 1
        log.info("verdict %r matched no pattern; defaulting to %s", verdict_text, self.default)
        return self.default


def normalize_verdict(verdict_text: str, mapping: VerdictMapping) -> NominalVerdict:
    """Deterministic, total mapping of a verdict string to its nominal category."""
    return NominalVerdict(mapping.lookup(verdict_text or ""))
