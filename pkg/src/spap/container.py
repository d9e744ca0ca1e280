"""Binary weight container (``.spwt``).

Layout, all integers unsigned 32-bit little-endian::

    b"SPAPWT01"
    entry count
    per entry: name length, UTF-8 name, rows, cols,
               rows*cols float64 little-endian values, row-major

Writes go to a temporary file in the target directory and are renamed
into place, so readers never see a partial file.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .glu import GluLayer
from .pipeline import ToyModel

__all__ = [
    "MAGIC",
    "atomic_write",
    "ContainerFormatError",
    "encode",
    "decode",
    "write_container",
    "read_container",
    "model_to_entries",
    "model_from_entries",
    "save_model",
    "load_model",
]

MAGIC = b"SPAPWT01"
_U32 = struct.Struct("<I")
_F64 = np.dtype("<f8")


class ContainerFormatError(ValueError):
    pass


def encode(entries: dict[str, np.ndarray]) -> bytes:
    parts = [MAGIC, _U32.pack(len(entries))]
    for name, arr in entries.items():
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ContainerFormatError(f"entry {name!r} is not 2-D: shape {arr.shape}")
        raw = name.encode("utf-8")
        parts += [_U32.pack(len(raw)), raw, _U32.pack(arr.shape[0]), _U32.pack(arr.shape[1])]
        parts.append(np.ascontiguousarray(arr, dtype=_F64).tobytes())
    return b"".join(parts)


def decode(buf: bytes) -> dict[str, np.ndarray]:
    view = memoryview(buf)
    if bytes(view[:8]) != MAGIC:
        raise ContainerFormatError(f"bad magic {bytes(view[:8])!r}, expected {MAGIC!r}")
    pos = 8

    def u32():
        nonlocal pos
        if pos + 4 > len(view):
            raise ContainerFormatError("truncated container")
        (v,) = _U32.unpack_from(view, pos)
        pos += 4
        return v

    out: dict[str, np.ndarray] = {}
    for _ in range(u32()):
        name_len = u32()
        if pos + name_len > len(view):
            raise ContainerFormatError("truncated container")
        name = bytes(view[pos:pos + name_len]).decode("utf-8")
        pos += name_len
        if name in out:
            raise ContainerFormatError(f"duplicate entry name {name!r}")
        rows, cols = u32(), u32()
        nbytes = rows * cols * 8
        if pos + nbytes > len(view):
            raise ContainerFormatError(f"truncated data for entry {name!r}")
        arr = np.frombuffer(view[pos:pos + nbytes], dtype=_F64).reshape(rows, cols)
        out[name] = arr.astype(np.float64)
        pos += nbytes
    if pos != len(view):
        raise ContainerFormatError(f"{len(view) - pos} trailing bytes after last entry")
    return out


def atomic_write(path: Path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_container(path, entries: dict[str, np.ndarray]):
    atomic_write(Path(path), encode(entries))


def read_container(path) -> dict[str, np.ndarray]:
    return decode(Path(path).read_bytes())


def model_to_entries(model: ToyModel) -> dict[str, np.ndarray]:
    entries = {"meta.residual": np.array([[1.0 if model.residual else 0.0]])}
    for i, layer in enumerate(model.layers):
        entries[f"layers.{i}.w_up"] = layer.w_up
        entries[f"layers.{i}.w_gate"] = layer.w_gate
        entries[f"layers.{i}.w_down"] = layer.w_down
    return entries


def model_from_entries(entries: dict[str, np.ndarray]) -> ToyModel:
    layers = []
    i = 0
    while f"layers.{i}.w_up" in entries:
        try:
            layers.append(GluLayer(
                entries[f"layers.{i}.w_up"],
                entries[f"layers.{i}.w_gate"],
                entries[f"layers.{i}.w_down"],
            ))
        except KeyError as exc:
            raise ContainerFormatError(f"layer {i} is missing {exc.args[0]!r}") from None
        i += 1
    if not layers:
        raise ContainerFormatError("container holds no layers")
    residual = entries.get("meta.residual")
    return ToyModel(tuple(layers), residual is None or bool(residual[0, 0]))


def save_model(path, model: ToyModel):
    write_container(path, model_to_entries(model))


def load_model(path) -> ToyModel:
    return model_from_entries(read_container(path))
