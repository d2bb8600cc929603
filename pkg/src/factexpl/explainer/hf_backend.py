"""Backend for pretrained encoder-decoder checkpoint families via the
`transformers` library (install the `hf` extra).

Covers the standard text-to-text family (t5-small/base/large) and the
long-input encoder-decoder (led-base, 2048+ positions) behind the same
interface as the tiny backend. Requires either hub connectivity or a local
checkpoint cache.
"""

from __future__ import annotations

from pathlib import Path

import torch

from .inputs import SEPARATOR, TASK_PREFIX, InputSequence

CHECKPOINT_ALIASES = {
    "t5-small": "t5-small",
    "t5-base": "t5-base",
    "t5-large": "t5-large",
    "led-base": "allenai/led-base-16384",
}


class HFBackend:
    name = "hf"

    def __init__(self, model, tokenizer, checkpoint: str):
        self.model = model
        self.tokenizer = tokenizer
        self.checkpoint = checkpoint

    @classmethod
    def load(cls, checkpoint: str | Path) -> "HFBackend":
        try:
            from transformers import AutoModelForSeq2SeqLM, AutoTokenizer
        except ImportError as exc:
            raise RuntimeError("the transformers backend needs the 'hf' extra installed") from exc
        resolved = CHECKPOINT_ALIASES.get(str(checkpoint), str(checkpoint))
        tokenizer = AutoTokenizer.from_pretrained(resolved)
        model = AutoModelForSeq2SeqLM.from_pretrained(resolved)
        return cls(model, tokenizer, resolved)

    def encode_input(self, seq: InputSequence) -> list[int]:
        """Claim-preserving tail truncation, mirroring the tiny backend."""
        budget = seq.token_budget
        if SEPARATOR in seq.text:
            head, evidence = seq.text.split(SEPARATOR, 1)
        else:
            head, evidence = seq.text, ""
        head_ids = self.tokenizer(head, add_special_tokens=False)["input_ids"]
        if len(head_ids) >= budget - 1:
            prefix_len = len(self.tokenizer(TASK_PREFIX, add_special_tokens=False)["input_ids"])
            head_ids = head_ids[: max(budget - 1, prefix_len)]
            return head_ids + [self.tokenizer.eos_token_id]
        rest = self.tokenizer(SEPARATOR + evidence, add_special_tokens=False)["input_ids"] if evidence else []
        ids = head_ids + rest[: budget - 1 - len(head_ids)]
        return ids + [self.tokenizer.eos_token_id]

    def encode_target(self, text: str, max_tokens: int) -> list[int]:
        ids = self.tokenizer(text, add_special_tokens=False)["input_ids"][: max_tokens - 1]
        return ids + [self.tokenizer.eos_token_id]

    def batch_loss(self, inputs: list[list[int]], targets: list[list[int]]) -> torch.Tensor:
        pad = self.tokenizer.pad_token_id or 0
        src = _pad(inputs, pad)
        labels = _pad(targets, -100)
        out = self.model(input_ids=src, attention_mask=src.ne(pad), labels=labels)
        return out.loss

    def parameters(self):
        return self.model.parameters()

    def train_mode(self, flag: bool = True):
        self.model.train(flag)

    def generate_text(self, seq: InputSequence, beam_width: int, max_tokens: int) -> str:
        ids = torch.tensor([self.encode_input(seq)], dtype=torch.long)
        out = self.model.generate(
            ids, num_beams=beam_width, max_new_tokens=max_tokens, min_new_tokens=1, do_sample=False
        )
        return self.tokenizer.decode(out[0], skip_special_tokens=True)

    def save(self, out_dir: str | Path):
        self.model.save_pretrained(out_dir)
        self.tokenizer.save_pretrained(out_dir)


def _pad(seqs: list[list[int]], value: int) -> torch.Tensor:
    width = max(len(s) for s in seqs)
    out = torch.full((len(seqs), width), value, dtype=torch.long)
    for i, seq in enumerate(seqs):
        out[i, : len(seq)] = torch.tensor(seq, dtype=torch.long)
    return out
