"""Deterministic provisioning of the tiny pretrained checkpoint.

Large pretrained checkpoint families need hub connectivity; the tiny family
member is instead pretrained locally, once, on a synthetic corpus (a couple
of minutes on CPU) and cached on disk. The recipe is versioned: bumping
RECIPE_VERSION invalidates old caches.
"""

from __future__ import annotations

import logging
from pathlib import Path

from .model import GenerationConfig, train
from .toydata import pretraining_corpus

log = logging.getLogger(__name__)

RECIPE_VERSION = 1
PRETRAIN_SEED = 7
PRETRAIN_EXAMPLES = 2048
PRETRAIN_EPOCHS = 12
PRETRAIN_LR = 1e-3
PRETRAIN_BATCH = 32


def default_checkpoint_dir(base: str | Path = "build/checkpoints") -> Path:
    return Path(base) / f"tiny-v{RECIPE_VERSION}"


def ensure_tiny_checkpoint(checkpoint_dir: str | Path | None = None) -> Path:
    """Pretrain (or reuse) the tiny checkpoint; returns its directory."""
    target = Path(checkpoint_dir) if checkpoint_dir else default_checkpoint_dir()
    final = target / "final"
    if (final / "weights.bin").exists():
        return final
    log.info("pretraining tiny checkpoint into %s", target)
    corpus = pretraining_corpus(n=PRETRAIN_EXAMPLES, seed=PRETRAIN_SEED)
    config = GenerationConfig(
        checkpoint_name="tiny",
        max_input_tokens=256,
        max_output_tokens=32,
        learning_rate=PRETRAIN_LR,
        epochs=PRETRAIN_EPOCHS,
        per_device_batch=PRETRAIN_BATCH,
        warmup_steps=40,
        seed=PRETRAIN_SEED,
    )
    train(corpus, config, out_dir=target, save_each_epoch=False)
    return final
