"""Checkpoint serialization: a one-line JSON manifest listing name, shape,
dtype and byte offset per tensor, followed by one raw little-endian blob.
Loads reproduce the saved arrays bitwise.
"""

from __future__ import annotations

import json

import numpy as np

from .layers import Weights

FORMAT_NAME = "mvmanip-weights"
FORMAT_VERSION = 1

_ROLE_PARAM = "param"
_ROLE_M = "opt_m"
_ROLE_V = "opt_v"


class CheckpointError(RuntimeError):
    pass


def _le_dtype(dtype: np.dtype) -> str:
    dt = np.dtype(dtype).newbyteorder("<")
    return dt.str


def save_weights(weights: Weights, path: str):
    entries = []
    blobs = []
    offset = 0

    def push(name, role, array):
        nonlocal offset
        dt = _le_dtype(array.dtype)
        raw = np.ascontiguousarray(array.astype(dt, copy=False)).tobytes()
        entries.append(
            {
                "name": name,
                "role": role,
                "shape": list(array.shape),
                "dtype": dt,
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        blobs.append(raw)
        offset += len(raw)

    for name, param in weights.items():
        push(name, _ROLE_PARAM, param.data)
    for name, m in weights.opt_m.items():
        push(name, _ROLE_M, m)
    for name, v in weights.opt_v.items():
        push(name, _ROLE_V, v)

    manifest = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "step": weights.step_count,
        "dtype": _le_dtype(weights.dtype),
        "tensors": entries,
    }
    with open(path, "wb") as f:
        f.write(json.dumps(manifest).encode("utf-8"))
        f.write(b"\n")
        for raw in blobs:
            f.write(raw)


def load_weights(path: str) -> Weights:
    with open(path, "rb") as f:
        header = f.readline()
        blob = f.read()
    try:
        manifest = json.loads(header.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"unreadable checkpoint manifest: {e}") from e
    if manifest.get("format") != FORMAT_NAME:
        raise CheckpointError(f"not a weights checkpoint: {path}")
    if manifest.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {manifest.get('version')}")

    weights = Weights(np.dtype(manifest["dtype"]))
    weights.step_count = int(manifest["step"])
    for entry in manifest["tensors"]:
        start, n = entry["offset"], entry["nbytes"]
        if start + n > len(blob):
            raise CheckpointError(f"checkpoint blob truncated at tensor {entry['name']!r}")
        arr = np.frombuffer(blob[start : start + n], dtype=np.dtype(entry["dtype"]))
        arr = arr.reshape(entry["shape"]).copy()
        role = entry["role"]
        if role == _ROLE_PARAM:
            weights.register(entry["name"], arr)
        elif role == _ROLE_M:
            weights.opt_m[entry["name"]] = arr.astype(weights.dtype)
        elif role == _ROLE_V:
            weights.opt_v[entry["name"]] = arr.astype(weights.dtype)
        else:
            raise CheckpointError(f"unknown tensor role {role!r}")
    return weights
