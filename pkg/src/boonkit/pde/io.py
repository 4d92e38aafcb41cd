"""BOONDATA v1 binary dataset files.

Layout (little-endian throughout):

    8 bytes   ASCII magic ``BOONDATA``
    u32       version (1)
    u32       problem tag
    u32       spatial dims d
    d x u32   grid size per dimension
    u32       n_samples
    u32       M (output steps)
    f64[]     inputs,  n * prod(sizes), row-major
    f64[]     outputs, n * M * prod(sizes), row-major
    u32       metadata length L
    L bytes   UTF-8 JSON metadata (spec echo, seed, split indices, per-sample parameters)

Read errors are distinct: bad magic, unsupported version, a header cut short
or metadata running past end of file (truncated), and any disagreement
between header, payload length and metadata (shape).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .dataset import Dataset
from .problems import PROBLEM_TAGS, ProblemSpec

__all__ = [
    "MAGIC",
    "VERSION",
    "DatasetFormatError",
    "BadMagicError",
    "VersionError",
    "TruncatedError",
    "ShapeError",
    "dataset_bytes",
    "write_dataset",
    "read_dataset",
]

MAGIC = b"BOONDATA"
VERSION = 1


class DatasetFormatError(ValueError):
    pass


class BadMagicError(DatasetFormatError):
    pass


class VersionError(DatasetFormatError):
    pass


class TruncatedError(DatasetFormatError):
    pass


class ShapeError(DatasetFormatError):
    pass


def dataset_bytes(ds: Dataset) -> bytes:
    spec = ds.spec
    sizes = spec.grid.n
    header = MAGIC + struct.pack("<III", VERSION, spec.tag, len(sizes)) + struct.pack(f"<{len(sizes)}I", *sizes)
    header += struct.pack("<II", ds.n, spec.m_out)
    meta = {
        "spec": spec.to_dict(),
        "seed": spec.seed,
        "n_samples": ds.n,
        "train_idx": ds.train_idx.tolist(),
        "test_idx": ds.test_idx.tolist(),
        "samples": ds.samples,
        "times": spec.times().tolist(),
    }
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return b"".join([
        header,
        ds.inputs.astype("<f8").tobytes(order="C"),
        ds.outputs.astype("<f8").tobytes(order="C"),
        struct.pack("<I", len(blob)),
        blob,
    ])


def write_dataset(path, ds: Dataset) -> Path:
    path = Path(path)
    path.write_bytes(dataset_bytes(ds))
    return path


def _unpack(buf: bytes, offset: int, fmt: str):
    size = struct.calcsize(fmt)
    if offset + size > len(buf):
        raise TruncatedError(f"file ends inside the header at byte {len(buf)} (need {offset + size})")
    return struct.unpack_from(fmt, buf, offset), offset + size


def read_dataset(path) -> Dataset:
    buf = Path(path).read_bytes()
    if len(buf) < len(MAGIC):
        raise TruncatedError("file shorter than the magic number")
    if buf[: len(MAGIC)] != MAGIC:
        raise BadMagicError(f"bad magic {buf[:len(MAGIC)]!r}, expected {MAGIC!r}")
    off = len(MAGIC)
    (version,), off = _unpack(buf, off, "<I")
    if version != VERSION:
        raise VersionError(f"unsupported BOONDATA version {version} (reader supports {VERSION})")
    (tag, dims), off = _unpack(buf, off, "<II")
    if dims not in (1, 2):
        raise ShapeError(f"header declares {dims} spatial dimensions")
    sizes, off = _unpack(buf, off, f"<{dims}I")
    (n, m), off = _unpack(buf, off, "<II")
    per = int(np.prod(sizes))
    n_in, n_out = n * per, n * m * per
    need = off + 8 * (n_in + n_out) + 4
    if len(buf) < need:
        raise ShapeError(f"header declares {n} samples of {sizes} x M={m} ({need} bytes) but file has {len(buf)}")
    inputs = np.frombuffer(buf, "<f8", n_in, off).reshape((n,) + tuple(sizes)).astype(np.float64)
    off += 8 * n_in
    outputs = np.frombuffer(buf, "<f8", n_out, off).reshape((n, m) + tuple(sizes)).astype(np.float64)
    off += 8 * n_out
    (length,), off = _unpack(buf, off, "<I")
    if off + length > len(buf):
        raise TruncatedError(f"metadata of {length} bytes runs past end of file")
    if off + length != len(buf):
        raise ShapeError(f"{len(buf) - off - length} trailing bytes after metadata")
    try:
        meta = json.loads(buf[off: off + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DatasetFormatError(f"metadata is not valid JSON: {exc}") from exc
    spec = ProblemSpec.from_dict(meta["spec"])
    if spec.tag != tag or tuple(spec.grid.n) != tuple(sizes) or spec.m_out != m or meta.get("n_samples") != n:
        raise ShapeError("metadata disagrees with header (problem, grid, M or sample count)")
    if tag not in PROBLEM_TAGS.values():
        raise DatasetFormatError(f"unknown problem tag {tag}")
    return Dataset(inputs, outputs, spec, meta["train_idx"], meta["test_idx"], meta.get("samples", []))
