"""Binary container for prediction / ground-truth map stacks.

Layout, little-endian::

    magic     4s   b"BIPM"
    version   u16  1
    height    u32
    width     u32
    channels  u16
    payload   channels * height * width float32, channel-major, row-major

Channel 0 holds the shrink probability, channels 1..M the ray distances in
direction order.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .decoder import PredictionMaps
from .errors import BadMagic, BadVersion, ContainerError, Oversize, Truncated

MAGIC = b"BIPM"
VERSION = 1
HEADER = struct.Struct("<4sHIIH")
MAX_VALUES = 2**31


def write_maps(data) -> bytes:
    data = np.asarray(data)
    if data.ndim != 3:
        raise ContainerError(f"expected a (channels, height, width) stack, got shape {data.shape}")
    c, h, w = data.shape
    if c * h * w > MAX_VALUES:
        raise Oversize(f"{c}x{h}x{w} exceeds {MAX_VALUES} values")
    if c > 0xFFFF:
        raise Oversize(f"{c} channels do not fit the header")
    payload = np.ascontiguousarray(data, dtype="<f4").tobytes()
    return HEADER.pack(MAGIC, VERSION, h, w, c) + payload


def read_maps(buf: bytes) -> np.ndarray:
    """Parse a container into a ``(channels, height, width)`` float32 array."""
    buf = bytes(buf)
    if len(buf) < HEADER.size:
        raise Truncated(f"header needs {HEADER.size} bytes, got {len(buf)}")
    magic, version, h, w, c = HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise BadVersion(f"unsupported version {version}")
    if c * h * w > MAX_VALUES:
        raise Oversize(f"{c}x{h}x{w} exceeds {MAX_VALUES} values")
    need = 4 * c * h * w
    have = len(buf) - HEADER.size
    if have < need:
        raise Truncated(f"payload needs {need} bytes, got {have}")
    if have > need:
        raise ContainerError(f"{have - need} trailing bytes after payload")
    return np.frombuffer(buf, dtype="<f4", offset=HEADER.size).reshape(c, h, w).astype(np.float32)


def save_maps(path, data) -> None:
    Path(path).write_bytes(write_maps(data))


def load_maps(path) -> np.ndarray:
    return read_maps(Path(path).read_bytes())


def stack_maps(shrink, distances) -> np.ndarray:
    return np.concatenate([np.asarray(shrink, dtype=np.float32)[None], np.asarray(distances, dtype=np.float32)])


def to_prediction(data) -> PredictionMaps:
    data = np.asarray(data)
    if data.shape[0] < 4:
        raise ContainerError("need a shrink channel and at least 3 ray channels")
    return PredictionMaps(data[0], data[1:])
