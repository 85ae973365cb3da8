"""Model checkpoints: a small binary container with a JSON header.

Layout:
    bytes 0..3   magic b"VPGM"
    byte  4      format version (1)
    bytes 5..8   header length, unsigned 32-bit little-endian
    ...          header JSON (utf-8): model config plus parameter shapes
    ...          parameters, in model order, raw little-endian in the
                 model's dtype

Round-trips are bit-identical because the payload carries the exact bytes
of every parameter array.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import CheckpointError, DatasetIoError
from .layers import Model

MAGIC = b"VPGM"
FORMAT_VERSION = 1


def save_model(model: Model, path) -> None:
    path = Path(path)
    header = model.config()
    header["format"] = FORMAT_VERSION
    header["param_shapes"] = [list(p.shape) for p in model.parameters()]
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    dtype = np.dtype(model.dtype).newbyteorder("<")
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<BI", FORMAT_VERSION, len(blob)))
            fh.write(blob)
            for p in model.parameters():
                fh.write(np.ascontiguousarray(p, dtype=dtype).tobytes(order="C"))
    except OSError as exc:
        raise DatasetIoError(f"cannot write checkpoint {path}: {exc}") from exc


def load_model(path) -> Model:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(raw) < 9 or raw[:4] != MAGIC:
        raise CheckpointError(f"{path} is not a model checkpoint")
    version, header_len = struct.unpack("<BI", raw[4:9])
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if len(raw) < 9 + header_len:
        raise CheckpointError(f"{path} is truncated inside the header")
    try:
        header = json.loads(raw[9 : 9 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"malformed checkpoint header: {exc}") from exc

    model = Model.from_config(header)
    dtype = np.dtype(header["dtype"]).newbyteorder("<")
    offset = 9 + header_len
    params = model.parameters()
    shapes = [tuple(s) for s in header.get("param_shapes", [])]
    if len(shapes) != len(params):
        raise CheckpointError(
            f"header lists {len(shapes)} parameters, model has {len(params)}"
        )
    for p, shape in zip(params, shapes):
        if p.shape != shape:
            raise CheckpointError(f"parameter shape {shape} != expected {p.shape}")
        nbytes = int(np.prod(shape)) * dtype.itemsize
        chunk = raw[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointError(f"{path} is truncated inside the payload")
        p[...] = np.frombuffer(chunk, dtype=dtype).reshape(shape)
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError(f"{path} has {len(raw) - offset} trailing bytes")
    return model
