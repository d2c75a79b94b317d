"""Versioned binary checkpoint container.

Layout (all little-endian):
  magic  b"PRIS"
  u32    format version
  u32    header length in bytes
  header UTF-8 JSON: model hyperparameters, training step reached, and a
         manifest of {name, shape, dtype} entries in file order
  data   raw float32/float64 tensor bytes, concatenated in manifest order

Loading validates the magic, version and every tensor shape before any
parameter is touched.
"""

import json
import struct

import numpy as np
import torch

from .model import PrisModel

MAGIC = b"PRIS"
FORMAT_VERSION = 1


def save_model(path, model: PrisModel, step_reached: int = 0, extra: dict | None = None) -> None:
    tensors = {name: p.detach().cpu().numpy() for name, p in model.state_dict().items()}
    header = {
        "format_version": FORMAT_VERSION,
        "model": model.hyperparams(),
        "step_reached": step_reached,
        "extra": extra or {},
        "manifest": [
            {"name": n, "shape": list(t.shape), "dtype": str(t.dtype)} for n, t in tensors.items()
        ],
    }
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
        fh.write(blob)
        for t in tensors.values():
            fh.write(np.ascontiguousarray(t, dtype=t.dtype.newbyteorder("<")).tobytes())


def read_header(path) -> dict:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a checkpoint file: bad magic {magic!r}")
        version, hlen = struct.unpack("<II", fh.read(8))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format version {version}")
        return json.loads(fh.read(hlen).decode("utf-8"))


def load_model(path) -> tuple[PrisModel, dict]:
    """Rebuild a PrisModel from a checkpoint; returns (model, header)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a checkpoint file: bad magic {magic!r}")
        version, hlen = struct.unpack("<II", fh.read(8))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format version {version}")
        header = json.loads(fh.read(hlen).decode("utf-8"))
        hp = header["model"]
        model = PrisModel(
            n_blocks=hp["n_blocks"],
            channels=hp["channels"],
            growth=hp["growth"],
            n_layers=hp["n_layers"],
            use_pre=hp["use_pre"],
            use_post=hp["use_post"],
            enhance_domain=hp["enhance_domain"],
            enhance_growth=hp["enhance_growth"],
            enhance_layers=hp["enhance_layers"],
        )
        for label in hp.get("pre_labels", []) + hp.get("post_labels", []):
            model.add_enhancer_set(label)

        state = {}
        for entry in header["manifest"]:
            dtype = np.dtype(entry["dtype"]).newbyteorder("<")
            count = int(np.prod(entry["shape"])) if entry["shape"] else 1
            buf = fh.read(count * dtype.itemsize)
            if len(buf) != count * dtype.itemsize:
                raise ValueError(f"truncated checkpoint at tensor {entry['name']!r}")
            arr = np.frombuffer(buf, dtype=dtype).reshape(entry["shape"])
            state[entry["name"]] = torch.from_numpy(arr.copy())

    expected = model.state_dict()
    for name, tensor in expected.items():
        if name not in state:
            raise ValueError(f"checkpoint missing tensor {name!r}")
        if tuple(state[name].shape) != tuple(tensor.shape):
            raise ValueError(
                f"shape mismatch for {name!r}: file has {tuple(state[name].shape)}, "
                f"model expects {tuple(tensor.shape)}"
            )
    model.load_state_dict(state)
    return model, header
