"""Metric files and text tables.

Per-epoch series go to CSV, final numbers to a JSON summary. Floats are
written with ``repr`` so they round-trip exactly; neither file carries
timestamps, so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from ..boundary import bounds, corrections
from ..boundary.spec import fd_coefficients
from ..core.kernels import DenseKernel

__all__ = [
    "CSV_COLUMNS",
    "write_metrics_csv",
    "read_metrics_csv",
    "summary",
    "dumps",
    "pair",
    "resolution_table",
    "bound_trials",
    "bounds_table",
    "format_bounds",
]

CSV_COLUMNS = ("epoch", "train_rel_l2", "test_rel_l2", "boundary_l2", "lr")


def write_metrics_csv(path, history) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in history:
            w.writerow([row["epoch"]] + [repr(float(row[k])) for k in CSV_COLUMNS[1:]])


def read_metrics_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (int(r[k]) if k == "epoch" else float(r[k])) for k in CSV_COLUMNS} for r in rows]


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=1, sort_keys=True) + "\n"


def summary(config, ds, history, final) -> dict:
    last = history[-1] if history else {}
    return {
        "config": config.to_dict(),
        "seed": config.seed,
        "problem": ds.spec.to_dict(),
        "epochs_run": len(history),
        "final": {
            "train_rel_l2": last.get("train_rel_l2"),
            "test_rel_l2": None if final is None else final["rel_l2"],
            "boundary_l2": None if final is None else final["boundary_l2"],
            "max_boundary_residual": None if final is None else final["max_boundary_residual"],
        },
        "boundary_l2_all_zero": bool(history) and all(r["boundary_l2"] == 0.0 for r in history),
    }


def pair(rel: float, bdy: float) -> str:
    """``relative (boundary)`` in the usual table style, e.g. ``0.0037 (0.0004)``."""
    return f"{rel:.4g} ({bdy:.4g})"


def resolution_table(rows) -> str:
    """Rows are checkpoints (train resolution), columns are datasets (test resolution)."""
    cols = [r["resolution"] for r in rows[0]["results"]]
    head = ["train\\test"] + [str(c) for c in cols]
    lines = [head]
    for r in rows:
        lines.append([str(r["train_resolution"])] + [pair(m["rel_l2"], m["boundary_l2"]) for m in r["results"]])
    widths = [max(len(line[i]) for line in lines) for i in range(len(head))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(line, widths)) for line in lines)


def _kernel(rng, n):
    return DenseKernel(rng.standard_normal((n, n)) / np.sqrt(n) + np.eye(n))


def _weights(rng):
    a = float(rng.uniform(0.05, 0.95))
    return (a, 1.0 - a) if a + (1.0 - a) == 1.0 else (0.5, 0.5)


def bound_trials(kind: str, trials: int, rng, n_max: int = 32) -> dict:
    """Closed-form distance vs the directly computed ``||K u0 - corrected||`` on random instances.

    Periodic and value conditions are equalities (report the worst absolute
    residual); the derivative condition is an upper bound (report how many
    trials exceed it beyond round-off).
    """
    worst, violations = 0.0, 0
    for _ in range(trials):
        n = int(rng.integers(4, n_max + 1))
        K = _kernel(rng, n)
        u0 = rng.standard_normal(n)
        u = K.apply(u0)
        if kind == "periodic":
            w = _weights(rng)
            direct = float(np.linalg.norm(u - corrections.correct_periodic(K, u0, *w)))
            worst = max(worst, abs(direct - bounds.bound_periodic(u, *w)))
        elif kind == "dirichlet":
            a = float(rng.standard_normal())
            direct = float(np.linalg.norm(u - corrections.correct_dirichlet(K, u0, a)))
            worst = max(worst, abs(direct - bounds.bound_dirichlet(K, u0, a)))
        else:
            a = float(rng.standard_normal())
            st = fd_coefficients(2, 1.0 / (n - 1))
            direct = float(np.linalg.norm(u - corrections.correct_neumann(K, u0, a, st)))
            bound = bounds.bound_neumann(K, u0, a, st)
            excess = direct - bound
            worst = max(worst, excess)
            violations += excess > 1e-12 * max(bound, 1.0)
    if kind == "neumann":
        return {"kind": kind, "relation": "<=", "trials": trials, "max_excess": worst,
                "violations": int(violations), "ok": violations == 0}
    return {"kind": kind, "relation": "==", "trials": trials, "max_abs_residual": worst, "ok": worst <= 1e-8}


def bounds_table(trials: int = 1000, seed: int = 0, n_max: int = 32) -> list[dict]:
    if trials < 1:
        raise ValueError("need at least one trial")
    if n_max < 4:
        raise ValueError("resolution must be at least 4")
    return [bound_trials(k, trials, np.random.default_rng(seed), n_max) for k in ("periodic", "dirichlet", "neumann")]


def format_bounds(table) -> str:
    lines = [f"{'kind':<10} {'relation':<8} {'trials':>6}  result"]
    for r in table:
        if r["relation"] == "==":
            res = f"max |bound - direct| = {r['max_abs_residual']:.3e}"
        else:
            res = f"violations = {r['violations']} (max excess {r['max_excess']:.3e})"
        lines.append(f"{r['kind']:<10} {r['relation']:<8} {r['trials']:>6}  {res}  {'ok' if r['ok'] else 'FAIL'}")
    return "\n".join(lines)
