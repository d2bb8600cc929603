"""Synthetic claim/evidence/explanation material for desk-scale protocols.

Both the tiny-checkpoint pretraining corpus and the 32-example overfit
fixtures draw from the same word pool (so the checkpoint's vocabulary
covers the fixtures) but from independent RNG streams, so fixture texts are
unseen combinations.
"""

from __future__ import annotations

import random

from ..dataset.records import ClaimRecord, EvidenceBundle

WORD_POOL = """claim video photo image shows said people vaccine covid virus election vote
government minister report online post spread week year day number test case death rate
rise fall uk us country city school hospital police army law tax money fund spend cut
water food drug mask study data science expert doctor nurse child adult record statement
news site page story source article check fact social media share viral old new event
protest march fire flood storm heat winter summer border travel flight train road bridge
company market price oil gas power energy bank debt job wage strike court judge trial
party leader campaign poll result count ballot state region north south east west local
world global crisis warning ban rule plan deal talk agreement change rise drop half third
million thousand percent figure total average estimate official""".split()

VERDICT_WORDS = ["false.", "true.", "misleading.", "correct.", "wrong."]


def synthetic_example(rng: random.Random, index: int, id_prefix: str) -> ClaimRecord:
    """One synthetic record: the explanation (verdict word + short sentence)
    is embedded verbatim as the first evidence paragraph, followed by two
    filler paragraphs."""
    claim = " ".join(rng.sample(WORD_POOL, rng.randint(4, 8)))
    verdict = rng.choice(VERDICT_WORDS)
    explanation = verdict + " " + " ".join(rng.sample(WORD_POOL, rng.randint(4, 7)))
    filler1 = " ".join(rng.sample(WORD_POOL, rng.randint(5, 9)))
    filler2 = " ".join(rng.sample(WORD_POOL, rng.randint(5, 9)))
    article = "\n".join([explanation, filler1, filler2])
    return ClaimRecord(
        id=f"{id_prefix}{index:04d}",
        claim=claim,
        evidence=EvidenceBundle(kind="article", article_text=article),
        verdict_text=verdict,
        explanation=explanation,
        publisher="fullfact",
    )


def pretraining_corpus(n: int = 2048, seed: int = 7) -> list[ClaimRecord]:
    rng = random.Random(seed)
    return [synthetic_example(rng, i, "pre") for i in range(n)]


def overfit_fixtures(n: int = 32, seed: int = 99) -> list[ClaimRecord]:
    """The toy overfit protocol's fixture set (novel combinations)."""
    rng = random.Random(seed)
    return [synthetic_example(rng, i, "fix") for i in range(n)]
