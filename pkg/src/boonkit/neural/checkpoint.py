"""BOONMODL v1 model checkpoints.

Layout (little-endian throughout):

    8 bytes   ASCII magic ``BOONMODL``
    u32       version (1)
    u32 x 4   layers L, modes m, width C, boundary kind code
    u32 x 2   input channels, output channels
    u32       parameter count P
    f64[P]    parameters, concatenated in a fixed order
    u32       Adam step count
    f64[P]    Adam first moments
    f64[P]    Adam second moments
    u32       metadata length
    bytes     UTF-8 JSON metadata (boundary details, train config, problem echo)
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..boundary.spec import BoundarySpec
from .model import ArchConfig, BoonOperator, init_params, param_names
from .optim import AdamState

__all__ = ["MAGIC", "VERSION", "CheckpointError", "save_checkpoint", "load_checkpoint", "checkpoint_bytes",
           "Checkpoint"]

MAGIC = b"BOONMODL"
VERSION = 1
BC_CODES = {None: 0, "dirichlet": 1, "neumann": 2, "periodic": 3}
_HEADER = struct.Struct("<8sIIIIIIII")


class CheckpointError(ValueError):
    pass


class Checkpoint:
    def __init__(self, model: BoonOperator, params: dict, adam: AdamState, meta: dict):
        self.model = model
        self.params = params
        self.adam = adam
        self.meta = meta


def _flatten(arch: ArchConfig, tensors: dict) -> np.ndarray:
    return np.concatenate([np.asarray(tensors[k], dtype="<f8").ravel() for k in param_names(arch)])


def _unflatten(arch: ArchConfig, flat: np.ndarray) -> dict:
    shapes = {k: v.shape for k, v in init_params(arch, np.random.default_rng(0)).items()}
    out, pos = {}, 0
    for k in param_names(arch):
        size = int(np.prod(shapes[k]))
        out[k] = flat[pos:pos + size].reshape(shapes[k]).astype(float)
        pos += size
    return out


def checkpoint_bytes(model: BoonOperator, params: dict, adam: AdamState | None = None, meta: dict | None = None) -> bytes:
    arch = model.arch
    adam = adam if adam is not None and adam.m else AdamState.zeros_like(params)
    flat = _flatten(arch, params)
    kind = model.bc.kind if model.bc is not None else None
    head = _HEADER.pack(MAGIC, VERSION, arch.layers, arch.modes, arch.width, BC_CODES[kind],
                        arch.in_channels, arch.out_channels, flat.size)
    body = flat.tobytes() + struct.pack("<I", adam.step) + _flatten(arch, adam.m).tobytes() + _flatten(arch, adam.v).tobytes()
    info = {
        "arch": {"mollifier": arch.mollifier, "backend": arch.backend},
        "bc": None if model.bc is None else {"kind": model.bc.kind, "side": model.bc.side, "order": model.order,
                                             "weights": list(model.bc.weights or ())},
        "corrected": model.corrected,
        "tau": model.tau,
    }
    info.update(meta or {})
    text = json.dumps(info, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return head + body + struct.pack("<I", len(text)) + text


def save_checkpoint(path, model: BoonOperator, params: dict, adam: AdamState | None = None, meta: dict | None = None) -> Path:
    path = Path(path)
    path.write_bytes(checkpoint_bytes(model, params, adam, meta))
    return path


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise CheckpointError(f"{path}: header truncated")
    magic, version, layers, modes, width, code, c_in, c_out, count = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    pos = _HEADER.size
    need = pos + 8 * count + 4 + 16 * count + 4
    if len(raw) < need:
        raise CheckpointError(f"{path}: file truncated")
    vec = lambda start: np.frombuffer(raw, dtype="<f8", count=count, offset=start).astype(float)
    flat = vec(pos)
    pos += 8 * count
    (step,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    m_flat, v_flat = vec(pos), vec(pos + 8 * count)
    pos += 16 * count
    (length,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    if len(raw) != pos + length:
        raise CheckpointError(f"{path}: metadata length does not match file size")
    meta = json.loads(raw[pos:].decode("utf-8"))
    arch = ArchConfig(modes, width, layers, c_out, c_in, meta["arch"]["mollifier"], meta["arch"]["backend"])
    expected = sum(v.size for v in init_params(arch, np.random.default_rng(0)).values())
    if expected != count:
        raise CheckpointError(f"{path}: {count} parameters stored, architecture needs {expected}")
    b = meta["bc"]
    bc = None
    if b is not None:
        if BC_CODES[b["kind"]] != code:
            raise CheckpointError(f"{path}: boundary kind in header and metadata disagree")
        bc = BoundarySpec(b["kind"], side=b["side"], order=b["order"],
                          weights=tuple(b["weights"]) if b["kind"] == "periodic" else None)
    model = BoonOperator(arch, bc, corrected=meta["corrected"], stencil_order=b["order"] if b else None, tau=meta["tau"])
    adam = AdamState(step, _unflatten(arch, m_flat), _unflatten(arch, v_flat))
    return Checkpoint(model, _unflatten(arch, flat), adam, meta)
