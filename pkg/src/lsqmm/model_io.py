"""Binary model file format.

Layout (all numbers little-endian)::

    offset  size  content
    0       8     magic b"LSQMMDL\\x00"
    8       4     uint32 format version (currently 1)
    12      4     uint32 header length H in bytes
    16      H     UTF-8 JSON header, keys sorted:
                    m, n            weight shape
                    n_alpha         number of dual multipliers
                    n_support       number of support indices
                    n_trace         number of trace rows
                    converged       bool
                    iterations      int
                    config          training configuration
    16+H    8     float64 bias b
            32mn  float64 W planes in order real, i, j, k; each plane row-major
            8N    float64 alpha
            8S    int64 support indices
            32T   float64 trace rows (iteration, objective, residual, seconds)

Floats are stored as raw IEEE-754 doubles, so a save/load cycle is bit-exact.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .quaternion import QMatrix
from .trainer import TraceRecord, TrainConfig, TrainedModel

MAGIC = b"LSQMMDL\x00"
FORMAT_VERSION = 1
_F8 = np.dtype("<f8")
_I8 = np.dtype("<i8")


class ModelFormatError(ValueError):
    """File is not a model file or uses an unknown version."""


def dumps(model: TrainedModel) -> bytes:
    m, n = model.shape
    trace = np.array([[t.iteration, t.objective, t.residual, t.seconds] for t in model.trace],
                     dtype=_F8).reshape(-1, 4)
    header = {
        "m": m,
        "n": n,
        "n_alpha": int(len(model.alpha)),
        "n_support": int(len(model.support_indices)),
        "n_trace": int(trace.shape[0]),
        "converged": bool(model.converged),
        "iterations": int(model.iterations),
        "config": model.config.to_dict(),
    }
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<II", FORMAT_VERSION, len(head)),
        head,
        np.array([model.b], dtype=_F8).tobytes(),
        np.ascontiguousarray(model.W.planes, dtype=_F8).tobytes(),
        np.asarray(model.alpha, dtype=_F8).tobytes(),
        np.asarray(model.support_indices, dtype=_I8).tobytes(),
        trace.tobytes(),
    ]
    return b"".join(parts)


def loads(blob: bytes) -> TrainedModel:
    if blob[:8] != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    version, hlen = struct.unpack_from("<II", blob, 8)
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    header = json.loads(blob[16 : 16 + hlen].decode("utf-8"))
    m, n = header["m"], header["n"]
    offset = 16 + hlen

    def take(count: int, dtype) -> np.ndarray:
        nonlocal offset
        arr = np.frombuffer(blob, dtype=dtype, count=count, offset=offset).copy()
        offset += count * dtype.itemsize
        return arr

    try:
        b = float(take(1, _F8)[0])
        planes = take(4 * m * n, _F8).reshape(4, m, n)
        alpha = take(header["n_alpha"], _F8)
        support = take(header["n_support"], _I8)
        trace = take(4 * header["n_trace"], _F8).reshape(-1, 4)
    except ValueError as exc:
        raise ModelFormatError(f"truncated model file: {exc}") from exc
    if offset != len(blob):
        raise ModelFormatError(f"{len(blob) - offset} trailing bytes in model file")
    return TrainedModel(
        W=QMatrix(planes),
        b=b,
        alpha=alpha,
        support_indices=support,
        converged=header["converged"],
        iterations=header["iterations"],
        trace=[TraceRecord(int(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in trace],
        config=TrainConfig(**header["config"]),
    )


def save_model(model: TrainedModel, path) -> None:
    Path(path).write_bytes(dumps(model))


def load_model(path) -> TrainedModel:
    return loads(Path(path).read_bytes())
