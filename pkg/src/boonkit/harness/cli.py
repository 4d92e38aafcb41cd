"""Command line entry point: verify | datagen | train | eval | bounds.

Exit codes: 0 success, 1 a check or run failed, 2 usage or configuration
error. Artifacts (datasets, checkpoints, CSV, JSON summaries) contain no
timestamps; wall-clock times go to the log on stderr only.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from ..boundary.spec import BoundarySpec
from ..neural.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from ..neural.train import TrainConfig, TrainingDiverged, evaluate, evaluate_resolution_transfer, train
from ..pde.dataset import bc_residuals, build_dataset, worker_count
from ..pde.io import DatasetFormatError, read_dataset, write_dataset
from ..pde.problems import PROBLEMS, problem_spec
from . import reports, suites
from .config import COMMAND_KEYS, ConfigError, merge, parse_value, read_config

__all__ = ["main", "run", "build_parser", "UsageError"]

log = logging.getLogger("boonkit")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def _add(p, flag, **kw):
    p.add_argument(flag, default=None, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boonkit", description="Boundary-corrected neural operators.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        _add(p, "--config", help="key = value file; keys must not contradict flags")
        _add(p, "--seed", type=int)
        _add(p, "--out", help="output path")
        return p

    v = common(sub.add_parser("verify", help="run the property suites"))
    _add(v, "--filter", help="only suites whose name contains this text")

    def data_flags(p):
        _add(p, "--problem", choices=PROBLEMS)
        _add(p, "--resolution", type=int)
        _add(p, "--nu", type=float)
        _add(p, "--re", type=float)
        _add(p, "--n-data", dest="n_data", type=int)
        _add(p, "--multi-step", dest="multi_step", action="store_const", const=True)
        _add(p, "--workers", type=int)

    d = common(sub.add_parser("datagen", help="generate a BOONDATA file"))
    data_flags(d)

    t = common(sub.add_parser("train", help="train an operator and write checkpoint + metrics"))
    data_flags(t)
    _add(t, "--dataset", help="BOONDATA file (otherwise generated from the problem flags)")
    _add(t, "--epochs", type=int)
    _add(t, "--lr", type=float)
    _add(t, "--batch-size", dest="batch_size", type=int)
    _add(t, "--decay-every", dest="decay_every", type=int)
    _add(t, "--bc", choices=("dirichlet", "neumann", "periodic"))
    _add(t, "--bc-side", dest="bc_side", choices=("left", "right", "both"))
    _add(t, "--baseline", action="store_const", const=True, help="disable the boundary corrections")
    _add(t, "--mollifier", action="store_const", const=True)
    _add(t, "--modes", type=int)
    _add(t, "--width", type=int)

    e = common(sub.add_parser("eval", help="evaluate checkpoints on datasets"))
    e.add_argument("--checkpoint", action="append", default=None, help="repeat for a cross-resolution table")
    e.add_argument("--dataset", action="append", default=None, help="repeat for a cross-resolution table")
    _add(e, "--split", choices=("train", "test", "all"))

    b = common(sub.add_parser("bounds", help="tabulate closed-form distances against direct norms"))
    _add(b, "--trials", type=int)
    _add(b, "--resolution", type=int)
    return parser


def _settings(args) -> dict:
    command = args.command
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    for key in ("checkpoint", "dataset"):
        if isinstance(flags.get(key), list):
            flags[key] = ",".join(flags[key])
    allowed = set(COMMAND_KEYS[command])
    for key, value in list(flags.items()):
        if key not in allowed:
            raise UsageError(f"--{key} does not apply to {command}")
        if not isinstance(value, (bool, int, float)) or key in ("checkpoint", "dataset"):
            flags[key] = parse_value(key, value)
    file_values = read_config(args.config, command) if args.config else {}
    return merge(file_values, flags)


def _paths(value: str | None) -> list[Path]:
    return [Path(p) for p in value.split(",") if p] if value else []


def _out_path(settings: dict, required=True) -> Path | None:
    out = settings.get("out")
    if out is None:
        if required:
            raise UsageError("--out is required")
        return None
    path = Path(out)
    if not path.parent.exists():
        raise UsageError(f"output directory does not exist: {path.parent}")
    return path


# commands -------------------------------------------------------------------


def cmd_verify(settings: dict) -> int:
    out = _out_path(settings, required=False)
    ok, results = suites.run_suites(settings.get("filter"), settings.get("seed", 0))
    report = {"ok": ok, "results": results}
    if not ok:
        failed = results[-1]
        report["failed"] = failed["name"]
        print("FAILURE " + json.dumps({"suite": failed["name"], "details": failed["details"]}, default=float))
    if out is not None:
        out.write_text(json.dumps(report, indent=1, sort_keys=True, default=float) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def _spec_from(settings: dict):
    problem = settings.get("problem")
    if problem is None:
        raise UsageError("--problem is required")
    resolution = settings.get("resolution", 64)
    params = {k: settings[k] for k in ("nu", "re") if k in settings}
    return problem_spec(problem, resolution, multi_step=settings.get("multi_step", False),
                        seed=settings.get("seed", 0), **params)


def _workers(settings: dict) -> int:
    cap = worker_count()
    return min(settings.get("workers", cap), cap)


def cmd_datagen(settings: dict) -> int:
    out = _out_path(settings)
    spec = _spec_from(settings)
    t0 = time.perf_counter()
    ds = build_dataset(spec, settings.get("n_data"), workers=_workers(settings))
    write_dataset(out, ds)
    res = bc_residuals(ds)
    log.info("datagen %s N=%s in %.2fs", spec.problem, spec.grid.n, time.perf_counter() - t0)
    print(f"wrote {out}: {ds.n} samples ({ds.train_idx.size} train / {ds.test_idx.size} test), grid {spec.grid.n}, "
          f"M={spec.m_out}")
    print(f"boundary residual per sample: max {res.max():.3e}  mean {res.mean():.3e}")
    return EXIT_OK


def _train_config(settings: dict, ds) -> TrainConfig:
    bc = None
    if "bc" in settings:
        default = ds.spec.boundary()
        side = settings.get("bc_side") or (default.side if default.kind == settings["bc"] else "both")
        bc = BoundarySpec(settings["bc"], side=side)
    elif "bc_side" in settings:
        raise UsageError("--bc-side needs --bc")
    keys = ("epochs", "lr", "batch_size", "decay_every", "baseline", "mollifier", "modes", "width", "seed")
    return TrainConfig(bc=bc, **{k: settings[k] for k in keys if k in settings})


def cmd_train(settings: dict) -> int:
    out = _out_path(settings)
    datasets = _paths(settings.get("dataset"))
    if len(datasets) > 1:
        raise UsageError("train takes a single dataset")
    if datasets:
        if not datasets[0].is_file():
            raise UsageError(f"dataset not found: {datasets[0]}")
        ds = read_dataset(datasets[0])
    else:
        ds = build_dataset(_spec_from(settings), settings.get("n_data"), workers=_workers(settings))
    config = _train_config(settings, ds)
    out.mkdir(exist_ok=True)
    t0 = time.perf_counter()

    def progress(row):
        log.info("epoch %d  train %.4e  test %.4e  boundary %.3e  lr %.2e  (%.2fs)", row["epoch"],
                 row["train_rel_l2"], row["test_rel_l2"], row["boundary_l2"], row["lr"], row["seconds"])

    try:
        result = train(config, ds, log=progress)
    except TrainingDiverged as exc:
        reports.write_metrics_csv(out / "metrics.csv", exc.history)
        print(f"training diverged: {exc}")
        return EXIT_FAIL
    log.info("trained %d epochs in %.1fs", config.epochs, time.perf_counter() - t0)
    meta = {"train_config": config.to_dict(), "problem": ds.spec.to_dict(), "resolution": int(ds.grid.n[0])}
    save_checkpoint(out / "checkpoint.boonmodl", result.model, result.params, result.adam, meta)
    reports.write_metrics_csv(out / "metrics.csv", result.history)
    final = evaluate(result.model, result.params, ds, "test", config.batch_size) if ds.test_idx.size else None
    summary = reports.summary(config, ds, result.history, final)
    (out / "summary.json").write_text(reports.dumps(summary))
    if final is not None:
        print(f"test relative L2 (boundary L2): {reports.pair(final['rel_l2'], final['boundary_l2'])}")
    return EXIT_OK


def cmd_eval(settings: dict) -> int:
    checkpoints = _paths(settings.get("checkpoint"))
    datasets = _paths(settings.get("dataset"))
    if not checkpoints or not datasets:
        raise UsageError("eval needs --checkpoint and --dataset")
    for p in checkpoints:
        if not p.is_file():
            raise UsageError(f"checkpoint not found: {p}")
    for p in datasets:
        if not p.is_file():
            raise UsageError(f"dataset not found: {p}")
    out = _out_path(settings, required=False)
    split = settings.get("split", "test")
    loaded = [load_checkpoint(p) for p in checkpoints]
    data = [read_dataset(p) for p in datasets]
    rows = []
    for ck, cpath in zip(loaded, checkpoints):
        row = []
        for ds in data:
            m = evaluate_resolution_transfer(ck.model, ck.params, ds, which=split)
            row.append(m)
        rows.append({"checkpoint": str(cpath), "train_resolution": ck.meta.get("resolution"), "results": row})
    if len(loaded) == 1 and len(data) == 1:
        m = rows[0]["results"][0]
        print(f"relative L2 (boundary L2): {reports.pair(m['rel_l2'], m['boundary_l2'])}")
    else:
        print(reports.resolution_table(rows))
    if out is not None:
        out.write_text(reports.dumps({"split": split, "rows": rows}))
    return EXIT_OK


def cmd_bounds(settings: dict) -> int:
    out = _out_path(settings, required=False)
    table = reports.bounds_table(settings.get("trials", 1000), settings.get("seed", 0),
                                 settings.get("resolution", 32))
    print(reports.format_bounds(table))
    if out is not None:
        out.write_text(reports.dumps(table))
    ok = all(r["ok"] for r in table)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"verify": cmd_verify, "datagen": cmd_datagen, "train": cmd_train, "eval": cmd_eval, "bounds": cmd_bounds}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        settings = _settings(args)
        return COMMANDS[args.command](settings)
    except (UsageError, ConfigError, DatasetFormatError, CheckpointError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:  # invalid physical parameters, shapes, resolutions
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())
