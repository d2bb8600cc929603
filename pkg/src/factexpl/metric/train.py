"""Fine-tuning of the learned quality predictors: four binary classifiers
plus one quality regressor, one model per dimension.

Backends mirror the explainer design: encoder checkpoint families via
`transformers` (deberta-base / deberta-xxlarge) when available, and a
self-contained hashed bag-of-words + linear head for desk-scale runs. The
regressor head has a single output unit, no activation, squared-error loss.
"""

from __future__ import annotations

import json
import logging
import math
import random
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import torch
import torch.nn as nn

from ..annotation.judgments import BINARY_DIMENSIONS
from ..jsonl import read_jsonl
from .scores import RegressionEval, majority_baseline, mcc_from_predictions, mean_baseline, regression_eval

log = logging.getLogger(__name__)

QUALITY_DIMENSION = "quality"
ALL_DIMENSIONS = BINARY_DIMENSIONS + (QUALITY_DIMENSION,)

HF_CHECKPOINTS = {
    "deberta-base": "microsoft/deberta-v3-base",
    "deberta-xxlarge": "microsoft/deberta-v2-xxlarge",
}


@dataclass
class MetricModelConfig:
    checkpoint_name: str = "deberta-base"
    max_seq_len: int = 512
    per_device_batch: int = 4
    learning_rate: float = 3e-6
    epochs: int = 4
    warmup_steps: int = 40
    head: str = "binary_classifier"  # or "regressor"
    seed: int = 13
    feature_dim: int = 4096  # tiny backend only

    def __post_init__(self):
        if self.head not in ("binary_classifier", "regressor"):
            raise ValueError(f"unknown head {self.head!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")


def load_metric_rows(path: str | Path) -> list[dict[str, Any]]:
    return list(read_jsonl(path))


def rows_for_dimension(rows: list[dict[str, Any]], dimension: str) -> tuple[list[str], list[float]]:
    """(texts, targets) for one dimension; rows without that label are
    skipped (unresolved ties are exported without the dimension)."""
    if dimension == QUALITY_DIMENSION:
        pairs = [(r["text"], float(r["quality"])) for r in rows if r.get("quality") is not None]
    elif dimension in BINARY_DIMENSIONS:
        pairs = [(r["text"], float(bool(r["labels"][dimension]))) for r in rows if dimension in r.get("labels", {})]
    else:
        raise ValueError(f"unknown dimension {dimension!r}")
    texts = [t for t, _ in pairs]
    targets = [y for _, y in pairs]
    return texts, targets


class _HashedBowFeaturizer:
    """Stable hashed token counts (crc32 buckets), L2-normalized."""

    def __init__(self, dim: int):
        self.dim = dim

    def transform(self, texts: list[str]) -> torch.Tensor:
        mat = np.zeros((len(texts), self.dim), dtype=np.float32)
        for i, text in enumerate(texts):
            for tok in text.lower().split():
                mat[i, zlib.crc32(tok.encode("utf-8")) % self.dim] += 1.0
        norms = np.linalg.norm(mat, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return torch.from_numpy(mat / norms)


class TinyMetricBackend:
    """Hashed bag-of-words features + a single linear head."""

    name = "tiny"

    def __init__(self, config: MetricModelConfig):
        self.config = config
        self.featurizer = _HashedBowFeaturizer(config.feature_dim)
        torch.manual_seed(config.seed)
        self.head_layer = nn.Linear(config.feature_dim, 1)

    def fit(self, texts: list[str], targets: list[float]) -> list[tuple[int, float]]:
        features = self.featurizer.transform(texts)
        y = torch.tensor(targets, dtype=torch.float32).unsqueeze(1)
        optimizer = torch.optim.AdamW(self.head_layer.parameters(), lr=self.config.learning_rate)
        steps_per_epoch = math.ceil(len(texts) / self.config.per_device_batch)
        total = steps_per_epoch * self.config.epochs

        def lr_lambda(step: int) -> float:
            if self.config.warmup_steps and step < self.config.warmup_steps:
                return step / self.config.warmup_steps
            return max(0.0, (total - step) / max(1, total - self.config.warmup_steps))

        scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer, lr_lambda)
        loss_fn = nn.BCEWithLogitsLoss() if self.config.head == "binary_classifier" else nn.MSELoss()
        shuffler = random.Random(self.config.seed)
        curve: list[tuple[int, float]] = []
        step = 0
        for _ in range(self.config.epochs):
            order = list(range(len(texts)))
            shuffler.shuffle(order)
            for start in range(0, len(order), self.config.per_device_batch):
                batch = order[start : start + self.config.per_device_batch]
                out = self.head_layer(features[batch])
                loss = loss_fn(out, y[batch])
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                scheduler.step()
                curve.append((step, float(loss.item())))
                step += 1
        return curve

    @torch.no_grad()
    def predict(self, texts: list[str]) -> np.ndarray:
        out = self.head_layer(self.featurizer.transform(texts)).squeeze(1)
        if self.config.head == "binary_classifier":
            return torch.sigmoid(out).numpy()
        return out.numpy()

    def save(self, out_dir: Path):
        from ..torchio import save_state_dict

        out_dir.mkdir(parents=True, exist_ok=True)
        save_state_dict(self.head_layer.state_dict(), out_dir)
        (out_dir / "config.json").write_text(
            json.dumps({"backend": self.name, "config": asdict(self.config)}), encoding="utf-8"
        )

    @classmethod
    def load(cls, model_dir: Path) -> "TinyMetricBackend":
        from ..torchio import load_state_dict

        meta = json.loads((model_dir / "config.json").read_text(encoding="utf-8"))
        backend = cls(MetricModelConfig(**meta["config"]))
        backend.head_layer.load_state_dict(load_state_dict(model_dir))
        return backend


class HFMetricBackend:
    """Sequence-classification fine-tuning via `transformers` (hf extra)."""

    name = "hf"

    def __init__(self, config: MetricModelConfig):
        try:
            from transformers import AutoModelForSequenceClassification, AutoTokenizer
        except ImportError as exc:
            raise RuntimeError("the transformers metric backend needs the 'hf' extra installed") from exc
        self.config = config
        resolved = HF_CHECKPOINTS.get(config.checkpoint_name, config.checkpoint_name)
        self.tokenizer = AutoTokenizer.from_pretrained(resolved)
        num_labels = 1 if config.head == "regressor" else 2
        self.model = AutoModelForSequenceClassification.from_pretrained(resolved, num_labels=num_labels)

    def _encode(self, texts: list[str]):
        return self.tokenizer(
            texts, truncation=True, max_length=self.config.max_seq_len, padding=True, return_tensors="pt"
        )

    def fit(self, texts: list[str], targets: list[float]) -> list[tuple[int, float]]:
        torch.manual_seed(self.config.seed)
        optimizer = torch.optim.AdamW(self.model.parameters(), lr=self.config.learning_rate)
        steps_per_epoch = math.ceil(len(texts) / self.config.per_device_batch)
        total = steps_per_epoch * self.config.epochs

        def lr_lambda(step: int) -> float:
            if self.config.warmup_steps and step < self.config.warmup_steps:
                return step / self.config.warmup_steps
            return max(0.0, (total - step) / max(1, total - self.config.warmup_steps))

        scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer, lr_lambda)
        shuffler = random.Random(self.config.seed)
        curve: list[tuple[int, float]] = []
        step = 0
        self.model.train()
        for _ in range(self.config.epochs):
            order = list(range(len(texts)))
            shuffler.shuffle(order)
            for start in range(0, len(order), self.config.per_device_batch):
                batch_idx = order[start : start + self.config.per_device_batch]
                enc = self._encode([texts[i] for i in batch_idx])
                if self.config.head == "regressor":
                    labels = torch.tensor([targets[i] for i in batch_idx], dtype=torch.float32)
                else:
                    labels = torch.tensor([int(targets[i]) for i in batch_idx], dtype=torch.long)
                out = self.model(**enc, labels=labels)
                optimizer.zero_grad()
                out.loss.backward()
                optimizer.step()
                scheduler.step()
                curve.append((step, float(out.loss.item())))
                step += 1
        self.model.eval()
        return curve

    @torch.no_grad()
    def predict(self, texts: list[str]) -> np.ndarray:
        logits = self.model(**self._encode(texts)).logits
        if self.config.head == "regressor":
            return logits.squeeze(-1).numpy()
        return torch.softmax(logits, dim=-1)[:, 1].numpy()

    def save(self, out_dir: Path):
        self.model.save_pretrained(out_dir)
        self.tokenizer.save_pretrained(out_dir)


@dataclass
class TrainedMetricModel:
    backend: Any
    dimension: str
    config: MetricModelConfig
    loss_curve: list[tuple[int, float]] = field(default_factory=list)

    def predict(self, texts: list[str]) -> np.ndarray:
        return self.backend.predict(texts)


def train_metric_model(
    rows: list[dict[str, Any]],
    dimension: str,
    config: MetricModelConfig,
    out_dir: str | Path | None = None,
) -> TrainedMetricModel:
    """Train one predictor for one quality dimension.

    Binary dimensions refuse single-class training labels up front (MCC
    would be undefined on anything the model could learn from them).
    """
    texts, targets = rows_for_dimension(rows, dimension)
    if not texts:
        raise ValueError(f"no training rows carry dimension {dimension!r}")
    head = "regressor" if dimension == QUALITY_DIMENSION else "binary_classifier"
    if head == "binary_classifier" and len(set(targets)) < 2:
        raise ValueError(f"single-class training labels for {dimension!r}; refusing to train")
    if config.head != head:
        config = MetricModelConfig(**{**asdict(config), "head": head})

    if config.checkpoint_name == "tiny":
        backend: Any = TinyMetricBackend(config)
    else:
        backend = HFMetricBackend(config)
    curve = backend.fit(texts, targets)
    model = TrainedMetricModel(backend=backend, dimension=dimension, config=config, loss_curve=curve)
    if out_dir is not None:
        out_dir = Path(out_dir)
        backend.save(out_dir)
        (out_dir / "training.json").write_text(
            json.dumps({"dimension": dimension, "config": asdict(config), "loss_curve": curve}, indent=2),
            encoding="utf-8",
        )
    return model


def evaluate_metric_model(
    model: TrainedMetricModel,
    eval_rows: list[dict[str, Any]],
    train_rows: list[dict[str, Any]] | None = None,
) -> dict[str, Any]:
    """Score a trained predictor against its dimension, next to the
    statistical baseline (majority class for binary, mean label for quality)."""
    texts, targets = rows_for_dimension(eval_rows, model.dimension)
    if not texts:
        raise ValueError(f"no eval rows carry dimension {model.dimension!r}")
    preds = model.predict(texts)
    baseline_source = targets
    if train_rows is not None:
        _, baseline_source = rows_for_dimension(train_rows, model.dimension)

    if model.dimension == QUALITY_DIMENSION:
        res: RegressionEval = regression_eval(list(preds), targets)
        base_preds = mean_baseline(baseline_source, n_eval=len(targets))
        base: RegressionEval = regression_eval(base_preds, targets)
        return {
            "dimension": model.dimension,
            "mae": res.mae,
            "mse": res.mse,
            "spearman": res.spearman,
            "spearman_degenerate": res.spearman_degenerate,
            "baseline": {
                "mae": base.mae,
                "mse": base.mse,
                "spearman": base.spearman,
                "spearman_degenerate": base.spearman_degenerate,
            },
        }
    pred_bools = [bool(p >= 0.5) for p in preds]
    label_bools = [bool(t >= 0.5) for t in targets]
    base_bools = majority_baseline([bool(t >= 0.5) for t in baseline_source], n_eval=len(targets))
    return {
        "dimension": model.dimension,
        "mcc": mcc_from_predictions(pred_bools, label_bools),
        "baseline": {"mcc": mcc_from_predictions(base_bools, label_bools)},
    }
