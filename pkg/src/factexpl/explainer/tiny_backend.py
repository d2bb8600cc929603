"""Self-contained word-level transformer seq2seq.

This is the smallest member of the checkpoint family: a compact torch
encoder-decoder with a whitespace tokenizer, used for desk-scale protocols
and CI where the large pretrained checkpoint families are unavailable. It
implements the same backend interface as the transformers-based backend:
token encoding with claim-preserving tail truncation, teacher-forced
log-likelihood loss, and deterministic beam-search decoding.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import torch
import torch.nn as nn

from .inputs import SEPARATOR, TASK_PREFIX, InputSequence

PAD, BOS, EOS, UNK = 0, 1, 2, 3
NEWLINE_TOKEN = "<nl>"


class WordTokenizer:
    """Whitespace tokenizer with newline preserved as its own symbol."""

    def __init__(self, vocab: list[str]):
        self.itos = ["<pad>", "<s>", "</s>", "<unk>"] + [w for w in vocab if w not in ("<pad>", "<s>", "</s>", "<unk>")]
        self.stoi = {w: i for i, w in enumerate(self.itos)}

    @classmethod
    def build(cls, texts: list[str]) -> "WordTokenizer":
        seen: dict[str, None] = {}
        for text in texts:
            for tok in cls.split(text):
                seen.setdefault(tok, None)
        return cls(sorted(seen))

    @staticmethod
    def split(text: str) -> list[str]:
        return text.replace("\n", f" {NEWLINE_TOKEN} ").split()

    def encode(self, text: str) -> list[int]:
        return [self.stoi.get(tok, UNK) for tok in self.split(text)]

    def decode(self, ids: list[int]) -> str:
        words = [self.itos[i] for i in ids if i not in (PAD, BOS, EOS)]
        return " ".join(words).replace(f" {NEWLINE_TOKEN} ", "\n").replace(NEWLINE_TOKEN, "\n")

    def __len__(self) -> int:
        return len(self.itos)


class TinySeq2Seq(nn.Module):
    def __init__(self, vocab_size: int, d_model: int = 128, nhead: int = 4, layers: int = 2,
                 ff: int = 256, max_pos: int = 2048):
        super().__init__()
        self.hparams = {
            "vocab_size": vocab_size, "d_model": d_model, "nhead": nhead,
            "layers": layers, "ff": ff, "max_pos": max_pos,
        }
        self.emb = nn.Embedding(vocab_size, d_model, padding_idx=PAD)
        self.pos = nn.Embedding(max_pos, d_model)
        self.transformer = nn.Transformer(
            d_model=d_model, nhead=nhead, num_encoder_layers=layers, num_decoder_layers=layers,
            dim_feedforward=ff, dropout=0.0, batch_first=True,
        )
        self.out = nn.Linear(d_model, vocab_size)

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.shape[1], device=ids.device).unsqueeze(0)
        return self.emb(ids) + self.pos(positions)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        causal = torch.triu(torch.ones(tgt_in.shape[1], tgt_in.shape[1], dtype=torch.bool), diagonal=1)
        hidden = self.transformer(
            self._embed(src), self._embed(tgt_in),
            tgt_mask=causal,
            src_key_padding_mask=src.eq(PAD),
            tgt_key_padding_mask=tgt_in.eq(PAD),
            memory_key_padding_mask=src.eq(PAD),
        )
        return self.out(hidden)


def _pad_batch(seqs: list[list[int]]) -> torch.Tensor:
    width = max(len(s) for s in seqs)
    out = torch.full((len(seqs), width), PAD, dtype=torch.long)
    for i, seq in enumerate(seqs):
        out[i, : len(seq)] = torch.tensor(seq, dtype=torch.long)
    return out


class TinyBackend:
    """Backend adapter around TinySeq2Seq + WordTokenizer."""

    name = "tiny"

    def __init__(self, model: TinySeq2Seq, tokenizer: WordTokenizer):
        self.model = model
        self.tokenizer = tokenizer

    # -- encoding ---------------------------------------------------------

    def encode_input(self, seq: InputSequence) -> list[int]:
        """Tokenize with claim-preserving tail truncation of the evidence.

        The task prefix and claim segment are always kept whole (truncating
        the claim only if it alone exceeds the budget, never the prefix).
        """
        budget = seq.token_budget
        text = seq.text
        if SEPARATOR in text:
            head, evidence = text.split(SEPARATOR, 1)
        else:
            head, evidence = text, ""
        head_ids = self.tokenizer.encode(head)
        if len(head_ids) >= budget:
            prefix_len = len(self.tokenizer.encode(TASK_PREFIX.strip()))
            return head_ids[: max(budget, prefix_len)]
        rest_ids = self.tokenizer.encode(SEPARATOR + evidence) if evidence else []
        return head_ids + rest_ids[: budget - len(head_ids)]

    def encode_target(self, text: str, max_tokens: int) -> list[int]:
        return [BOS] + self.tokenizer.encode(text)[: max_tokens - 2] + [EOS]

    # -- training ---------------------------------------------------------

    def batch_loss(self, inputs: list[list[int]], targets: list[list[int]]) -> torch.Tensor:
        src = _pad_batch(inputs)
        tgt = _pad_batch(targets)
        logits = self.model(src, tgt[:, :-1])
        return nn.functional.cross_entropy(
            logits.reshape(-1, logits.shape[-1]), tgt[:, 1:].reshape(-1), ignore_index=PAD
        )

    def parameters(self):
        return self.model.parameters()

    def train_mode(self, flag: bool = True):
        self.model.train(flag)

    # -- decoding ---------------------------------------------------------

    @torch.no_grad()
    def generate_ids(self, input_ids: list[int], beam_width: int, max_tokens: int) -> list[int]:
        """Deterministic beam search; ties resolve toward the lower token id
        through torch.topk's stable ordering. EOS is barred on the first step
        so the output always carries at least one content token."""
        self.model.eval()
        src = _pad_batch([input_ids])
        memory_beams: list[tuple[list[int], float]] = [([BOS], 0.0)]
        finished: list[tuple[list[int], float]] = []
        for step in range(max_tokens):
            candidates: list[tuple[list[int], float]] = []
            for ids, score in memory_beams:
                logits = self.model(src, torch.tensor([ids], dtype=torch.long))
                logprobs = torch.log_softmax(logits[0, -1], dim=-1)
                top = torch.topk(logprobs, min(beam_width + 3, logprobs.shape[0]))
                for lp, tok in zip(top.values.tolist(), top.indices.tolist()):
                    if tok in (PAD, BOS) or (step == 0 and tok == EOS):
                        continue
                    candidates.append((ids + [tok], score + lp))
            candidates.sort(key=lambda c: (-c[1], c[0]))
            memory_beams = []
            for ids, score in candidates:
                if ids[-1] == EOS:
                    finished.append((ids, score))
                else:
                    memory_beams.append((ids, score))
                if len(memory_beams) == beam_width:
                    break
            if not memory_beams or len(finished) >= beam_width:
                break
        pool = finished or memory_beams
        pool.sort(key=lambda c: (-c[1], c[0]))
        return pool[0][0]

    def generate_text(self, seq: InputSequence, beam_width: int, max_tokens: int) -> str:
        ids = self.generate_ids(self.encode_input(seq), beam_width, max_tokens)
        return self.tokenizer.decode(ids)

    # -- persistence ------------------------------------------------------

    def save(self, out_dir: str | Path):
        from ..torchio import save_state_dict

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "config.json").write_text(
            json.dumps({"backend": self.name, "hparams": self.model.hparams, "vocab": self.tokenizer.itos}),
            encoding="utf-8",
        )
        save_state_dict(self.model.state_dict(), out_dir)

    @classmethod
    def load(cls, model_dir: str | Path) -> "TinyBackend":
        from ..torchio import load_state_dict

        model_dir = Path(model_dir)
        config = json.loads((model_dir / "config.json").read_text(encoding="utf-8"))
        tokenizer = WordTokenizer(config["vocab"][4:])
        model = TinySeq2Seq(**config["hparams"])
        model.load_state_dict(load_state_dict(model_dir))
        model.eval()
        return cls(model, tokenizer)

    @classmethod
    def fresh(cls, corpus_texts: list[str], d_model: int = 128, max_pos: int = 2048) -> "TinyBackend":
        tokenizer = WordTokenizer.build(corpus_texts + [TASK_PREFIX.strip()])
        model = TinySeq2Seq(len(tokenizer), d_model=d_model, max_pos=max_pos)
        return cls(model, tokenizer)


def perplexity(loss: float) -> float:
    return math.exp(min(loss, 50.0))
