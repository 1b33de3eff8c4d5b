"""Checkpoint files: a flat, versioned map of parameter name -> float64 array.

Format (stable across releases)::

    bytes 0..7    magic b"NBCKPT01"
    bytes 8..11   uint32 little-endian: length L of the JSON header
    bytes 12..12+L  UTF-8 JSON: {"version": 1, "meta": {...},
                                 "params": [{"name": ..., "shape": [...]}, ...]}
    remainder     the arrays' values, little-endian float64, row-major,
                  concatenated in header order

`meta` carries arbitrary JSON (model configuration, training provenance).
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import ContractError

MAGIC = b"NBCKPT01"
VERSION = 1


def save_params(path, params: dict, meta: dict | None = None) -> None:
    """Write `{name: array-like}` to `path` in the checkpoint format."""
    names = list(params)
    arrays = [np.ascontiguousarray(np.asarray(params[n], dtype=np.float64)) for n in names]
    header = {
        "version": VERSION,
        "meta": meta or {},
        "params": [{"name": n, "shape": list(a.shape)} for n, a in zip(names, arrays)],
    }
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for a in arrays:
            fh.write(a.astype("<f8").tobytes())


def load_params(path) -> tuple[dict, dict]:
    """Read a checkpoint; returns (params, meta)."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ContractError(f"{path}: not a checkpoint file (bad magic {magic!r})")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if header.get("version") != VERSION:
            raise ContractError(f"{path}: unsupported checkpoint version {header.get('version')}")
        params = {}
        for entry in header["params"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ContractError(f"{path}: truncated checkpoint")
            params[entry["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).astype(np.float64)
    return params, header.get("meta", {})
