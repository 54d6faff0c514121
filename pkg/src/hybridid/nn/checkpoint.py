"""Versioned binary container for named float64 parameter blocks.

Layout (all integers little-endian)::

    magic     8 bytes  b"HYBRIDCK"
    version   uint32
    meta_len  uint32   followed by UTF-8 JSON metadata
    n_blocks  uint32
    per block:
        name_len uint16, name (UTF-8)
        ndim     uint8,  shape (ndim x uint64)
        data     prod(shape) x float64 ('<f8'), C order
"""
import json
import struct

import numpy as np

from ..exceptions import HybridIdError

MAGIC = b"HYBRIDCK"
VERSION = 1


class CheckpointError(HybridIdError):
    pass


def dumps(blocks, metadata=None):
    meta = json.dumps(metadata or {}, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", VERSION, len(meta)), meta, struct.pack("<I", len(blocks))]
    for name, arr in blocks.items():
        arr = np.ascontiguousarray(arr, dtype="<f8")
        raw = name.encode("utf-8")
        parts.append(struct.pack("<HB", len(raw), arr.ndim))
        parts.append(raw)
        parts.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        parts.append(arr.tobytes(order="C"))
    return b"".join(parts)


def loads(data):
    view = memoryview(data)
    if bytes(view[:8]) != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    version, meta_len = struct.unpack_from("<II", view, 8)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    pos = 16
    metadata = json.loads(bytes(view[pos:pos + meta_len]).decode("utf-8"))
    pos += meta_len
    (n_blocks,) = struct.unpack_from("<I", view, pos)
    pos += 4
    blocks = {}
    for _ in range(n_blocks):
        name_len, ndim = struct.unpack_from("<HB", view, pos)
        pos += 3
        name = bytes(view[pos:pos + name_len]).decode("utf-8")
        pos += name_len
        shape = struct.unpack_from(f"<{ndim}Q", view, pos)
        pos += 8 * ndim
        count = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(view, dtype="<f8", count=count, offset=pos).reshape(shape)
        blocks[name] = arr.astype(np.float64)
        pos += 8 * count
    if pos != len(view):
        raise CheckpointError("trailing bytes after last block")
    return blocks, metadata


def save(path, blocks, metadata=None):
    with open(path, "wb") as fh:
        fh.write(dumps(blocks, metadata))


def load(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
