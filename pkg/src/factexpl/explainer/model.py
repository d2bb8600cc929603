"""Training and generation over the pluggable seq2seq backends.

The objective is the teacher-forced sum of token log-likelihoods (cross
entropy over the target sequence). Checkpoint family is selected by config
string: the transformers families (t5-*, led-base) when available, or the
bundled tiny word-level model; directories load whichever backend saved
them.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch

from ..dataset.records import ClaimRecord
from .inputs import InputSequence, build_input
from .tiny_backend import TinyBackend

log = logging.getLogger(__name__)

DEFAULT_BEAM_WIDTH = 4


@dataclass
class GenerationConfig:
    checkpoint_name: str = "t5-base"
    max_input_tokens: int = 1024
    max_output_tokens: int = 128
    learning_rate: float = 5e-5
    epochs: int = 3
    per_device_batch: int = 8
    warmup_steps: int = 0
    seed: int = 13
    deterministic: bool = True
    mixed_precision: bool = False  # off by default for reproducibility

    def __post_init__(self):
        if self.max_output_tokens < 1:
            raise ValueError(f"max_output_tokens must be >= 1, got {self.max_output_tokens}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.max_input_tokens < 8:
            raise ValueError(f"token budget below 8 is unusable, got {self.max_input_tokens}")


@dataclass
class TrainedExplainer:
    backend: object
    config: GenerationConfig
    training_loss_curve: list[tuple[int, float]] = field(default_factory=list)


def _load_backend(checkpoint_name: str, corpus_texts: list[str] | None, max_pos: int):
    path = Path(checkpoint_name)
    if path.is_dir():
        config_file = path / "config.json"
        if config_file.exists() and json.loads(config_file.read_text()).get("backend") == "tiny":
            return TinyBackend.load(path)
        from .hf_backend import HFBackend

        return HFBackend.load(path)
    if checkpoint_name == "tiny":
        if corpus_texts is None:
            raise ValueError("a fresh tiny model needs corpus texts to build its vocabulary")
        return TinyBackend.fresh(corpus_texts, max_pos=max_pos)
    from .hf_backend import HFBackend

    return HFBackend.load(checkpoint_name)


def _input_for(record: ClaimRecord, budget: int) -> InputSequence:
    return build_input(record.claim, record.evidence, token_budget=budget)


def train(
    records: list[ClaimRecord],
    config: GenerationConfig,
    out_dir: str | Path | None = None,
    save_each_epoch: bool = True,
) -> TrainedExplainer:
    """Fine-tune the configured checkpoint on (claim+evidence -> explanation).

    AdamW with warmup + linear decay; inputs truncated at max_input_tokens
    (claim kept whole), targets at max_output_tokens; one checkpoint per
    epoch when out_dir is given. With deterministic mode the loss curve is
    bit-reproducible for a fixed seed.
    """
    if not records:
        raise ValueError("empty training set")
    for r in records:
        if not r.explanation:
            raise ValueError(f"record {r.id} has an empty explanation target")

    if config.deterministic:
        torch.manual_seed(config.seed)
        torch.use_deterministic_algorithms(True, warn_only=True)

    corpus_texts = [
        _input_for(r, config.max_input_tokens).text for r in records
    ] + [r.explanation for r in records]
    backend = _load_backend(config.checkpoint_name, corpus_texts, max_pos=max(config.max_input_tokens, 2048))

    inputs = [backend.encode_input(_input_for(r, config.max_input_tokens)) for r in records]
    targets = [backend.encode_target(r.explanation, config.max_output_tokens) for r in records]

    optimizer = torch.optim.AdamW(backend.parameters(), lr=config.learning_rate)
    steps_per_epoch = math.ceil(len(records) / config.per_device_batch)
    total_steps = steps_per_epoch * config.epochs

    def lr_lambda(step: int) -> float:
        if config.warmup_steps and step < config.warmup_steps:
            return step / config.warmup_steps
        denom = max(1, total_steps - config.warmup_steps)
        return max(0.0, (total_steps - step) / denom)

    scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer, lr_lambda)
    shuffler = random.Random(config.seed)

    backend.train_mode(True)
    curve: list[tuple[int, float]] = []
    step = 0
    for epoch in range(config.epochs):
        order = list(range(len(records)))
        shuffler.shuffle(order)
        for start in range(0, len(order), config.per_device_batch):
            batch = order[start : start + config.per_device_batch]
            loss = backend.batch_loss([inputs[i] for i in batch], [targets[i] for i in batch])
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"non-finite loss {loss.item()} at step {step} (epoch {epoch}); "
                    f"lr={scheduler.get_last_lr()[0]:.2e}, batch={batch}"
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            scheduler.step()
            curve.append((step, float(loss.item())))
            step += 1
        if out_dir is not None and save_each_epoch:
            backend.save(Path(out_dir) / f"epoch-{epoch + 1}")
        log.info("epoch %d/%d done, loss %.4f", epoch + 1, config.epochs, curve[-1][1])
    backend.train_mode(False)

    trained = TrainedExplainer(backend=backend, config=config, training_loss_curve=curve)
    if out_dir is not None:
        save_explainer(trained, out_dir)
    return trained


def generate(model: TrainedExplainer, input_seq: InputSequence, beam_width: int = DEFAULT_BEAM_WIDTH) -> str:
    """Beam-search decode one explanation (deterministic for a fixed model)."""
    if not input_seq.text.strip():
        raise ValueError("empty input text")
    if beam_width < 1:
        raise ValueError(f"beam width must be >= 1, got {beam_width}")
    return model.backend.generate_text(input_seq, beam_width, model.config.max_output_tokens)


def save_explainer(model: TrainedExplainer, out_dir: str | Path):
    out_dir = Path(out_dir)
    model.backend.save(out_dir / "final")
    meta = {
        "config": asdict(model.config),
        "loss_curve": model.training_loss_curve,
    }
    (out_dir / "training.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")


def load_explainer(model_dir: str | Path) -> TrainedExplainer:
    model_dir = Path(model_dir)
    meta = json.loads((model_dir / "training.json").read_text(encoding="utf-8"))
    config = GenerationConfig(**meta["config"])
    backend = _load_backend(str(model_dir / "final"), corpus_texts=None, max_pos=max(config.max_input_tokens, 2048))
    return TrainedExplainer(
        backend=backend,
        config=config,
        training_loss_curve=[tuple(x) for x in meta["loss_curve"]],
    )
