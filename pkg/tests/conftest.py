from __future__ import annotations

from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def tiny_checkpoint() -> Path:
    """Pretrained tiny seq2seq checkpoint, cached under build/ across runs."""
    from factexpl.explainer.pretrain import ensure_tiny_checkpoint

    return ensure_tiny_checkpoint(REPO_ROOT / "build" / "checkpoints" / "tiny-v1")


@pytest.fixture()
def data_dir() -> Path:
    return DATA_DIR
