"""Flat ``key = value`` experiment configuration files.

One setting per line, ``#`` starts a comment, blank lines are ignored.
Keys are the long CLI flag names with dashes replaced by underscores. A
value given both in the file and as a flag must agree; a disagreement is
rejected rather than silently resolved.
"""

from __future__ import annotations

from pathlib import Path

__all__ = ["ConfigError", "KEYS", "COMMAND_KEYS", "parse_value", "read_config", "format_config", "merge"]


class ConfigError(ValueError):
    """Invalid, unknown or conflicting configuration."""


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


KEYS = {
    "problem": str,
    "resolution": int,
    "nu": float,
    "re": float,
    "seed": int,
    "n_data": int,
    "multi_step": _bool,
    "workers": int,
    "out": str,
    "dataset": str,
    "checkpoint": str,
    "epochs": int,
    "lr": float,
    "batch_size": int,
    "decay_every": int,
    "bc": str,
    "bc_side": str,
    "baseline": _bool,
    "mollifier": _bool,
    "modes": int,
    "width": int,
    "trials": int,
    "filter": str,
    "split": str,
}

_DATA = ("problem", "resolution", "nu", "re", "seed", "n_data", "multi_step", "workers")
_TRAIN = ("epochs", "lr", "batch_size", "decay_every", "bc", "bc_side", "baseline", "mollifier", "modes", "width")
COMMAND_KEYS = {
    "verify": ("filter", "seed", "out"),
    "datagen": _DATA + ("out",),
    "train": _DATA + _TRAIN + ("dataset", "out"),
    "eval": ("checkpoint", "dataset", "split", "out"),
    "bounds": ("trials", "seed", "resolution", "out"),
}


def parse_value(key: str, text):
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}")
    try:
        return KEYS[key](text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc


def read_config(path, command: str) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    allowed = COMMAND_KEYS[command]
    out = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key not in allowed:
            raise ConfigError(f"{path}:{lineno}: key {key!r} does not apply to {command}")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = parse_value(key, value)
    return out


def format_config(values: dict) -> str:
    """Inverse of :func:`read_config` (keys sorted, floats in round-trip form)."""
    lines = []
    for key in sorted(values):
        v = values[key]
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


def merge(file_values: dict, flag_values: dict) -> dict:
    """File settings plus flags; a key set in both with different values is an error."""
    merged = dict(flag_values)
    for key, value in file_values.items():
        if key in flag_values and flag_values[key] != value:
            raise ConfigError(f"{key} is {value!r} in the config file but {flag_values[key]!r} on the command line")
        merged[key] = value
    return merged
