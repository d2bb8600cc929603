"""Model input construction: the claim is prepended to the evidence behind a
fixed task prefix, separated by a single newline."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..dataset.records import EvidenceBundle

log = logging.getLogger(__name__)

TASK_PREFIX = "summarize: "
SEPARATOR = "\n"


@dataclass(frozen=True)
class InputSequence:
    text: str
    token_budget: int
    empty_evidence: bool = False

    def __post_init__(self):
        if not self.text.startswith(TASK_PREFIX):
            raise ValueError(f"input text must start with {TASK_PREFIX!r}")


def build_input(claim: str, evidence: EvidenceBundle, token_budget: int = 1024) -> InputSequence:
    """``summarize: <claim>\\n<evidence>``; snippet evidence joins with newlines.

    Empty evidence still yields a valid prefixed sequence, flagged so
    callers can count it.
    """
    if not claim:
        raise ValueError("claim must be non-empty")
    evidence_text = evidence.text()
    if not evidence_text:
        log.warning("empty evidence for claim %r", claim[:60])
        return InputSequence(TASK_PREFIX + claim, token_budget, empty_evidence=True)
    return InputSequence(TASK_PREFIX + claim + SEPARATOR + evidence_text, token_budget)
