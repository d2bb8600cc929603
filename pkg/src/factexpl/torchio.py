"""Content-deterministic state-dict serialization.

torch.save embeds storage keys derived from runtime memory addresses, so
two byte-wise-identical models serialize differently across processes.
Pipeline manifests hash artifact bytes, so model weights are stored in a
flat canonical format instead: a JSON index plus raw little-endian tensor
bytes concatenated in sorted-key order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

INDEX_NAME = "weights.json"
DATA_NAME = "weights.bin"


def save_state_dict(state: dict[str, torch.Tensor], out_dir: str | Path):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    index: dict[str, dict] = {}
    offset = 0
    with open(out_dir / DATA_NAME, "wb") as fh:
        for key in sorted(state):
            array = state[key].detach().contiguous().cpu().numpy()
            raw = array.tobytes()
            index[key] = {"dtype": array.dtype.str, "shape": list(array.shape), "offset": offset,
                          "nbytes": len(raw)}
            fh.write(raw)
            offset += len(raw)
    (out_dir / INDEX_NAME).write_text(json.dumps(index, indent=0, sort_keys=True), encoding="utf-8")


def load_state_dict(model_dir: str | Path) -> dict[str, torch.Tensor]:
    model_dir = Path(model_dir)
    index = json.loads((model_dir / INDEX_NAME).read_text(encoding="utf-8"))
    blob = (model_dir / DATA_NAME).read_bytes()
    state = {}
    for key, meta in index.items():
        array = np.frombuffer(
            blob, dtype=np.dtype(meta["dtype"]), count=int(np.prod(meta["shape"], dtype=np.int64)) if meta["shape"] else 1,
            offset=meta["offset"],
        ).reshape(meta["shape"])
        state[key] = torch.from_numpy(array.copy())
    return state
