"""Mini-batch training, evaluation and cross-resolution transfer."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ..boundary.metrics import boundary_error, boundary_operator, boundary_values
from ..boundary.spec import BoundarySpec
from ..core.autodiff import NonFiniteError, Tensor
from ..pde.dataset import Dataset
from .loss import relative_l2, relative_l2_loss
from .model import ArchConfig, BoonOperator, init_params
from .optim import AdamState, adam_step, step_lr

__all__ = [
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "build_model",
    "predict",
    "evaluate",
    "train",
    "evaluate_resolution_transfer",
    "DIVERGENCE_LOSS",
]

DIVERGENCE_LOSS = 1e3


class TrainingDiverged(RuntimeError):
    """Loss exceeded the divergence threshold; ``history`` holds the epochs so far."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


@dataclass
class TrainConfig:
    epochs: int = 500
    lr: float = 1e-3
    decay_factor: float = 0.5
    decay_every: int | None = None  # 50 for 1D data, 100 otherwise
    batch_size: int = 20
    seed: int = 0
    baseline: bool = False
    mollifier: bool = False
    modes: int | None = None
    width: int | None = None
    layers: int = 4
    backend: str = "dft"
    bc: BoundarySpec | None = None  # default: the dataset problem's own condition

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1 or self.lr <= 0:
            raise ValueError("need epochs >= 0, batch_size >= 1 and lr > 0")

    def interval(self, size_class: str) -> int:
        if self.decay_every is not None:
            return self.decay_every
        return 50 if size_class == "1d" else 100

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bc"] = None if self.bc is None else {"kind": self.bc.kind, "side": self.bc.side,
                                                "order": self.bc.order, "weights": list(self.bc.weights or ())}
        return d


@dataclass
class TrainResult:
    params: dict
    model: BoonOperator
    adam: AdamState
    history: list = field(default_factory=list)


def _size_class(ds: Dataset) -> str:
    return "1d" if ds.spec.m_out == 1 and ds.spec.n_t == 1 else "2d"


def build_model(config: TrainConfig, ds: Dataset) -> BoonOperator:
    if ds.grid.dims != 1:
        raise ValueError("the trainable operator handles 1D spatial grids")
    arch = ArchConfig.for_class(_size_class(ds), out_channels=ds.spec.m_out, mollifier=config.mollifier,
                                backend=config.backend, layers=config.layers)
    if config.modes is not None or config.width is not None:
        arch = ArchConfig(config.modes or arch.modes, config.width or arch.width, arch.layers,
                          arch.out_channels, arch.in_channels, arch.mollifier, arch.backend)
    bc = config.bc if config.bc is not None else ds.spec.boundary()
    return BoonOperator(arch, bc, corrected=not config.baseline)


def predict(model: BoonOperator, params: dict, ds: Dataset, inputs: np.ndarray, targets: np.ndarray,
            batch_size: int = 20) -> np.ndarray:
    """Model outputs for ``inputs``, boundary data taken from ``targets``."""
    grid = ds.grid
    x = grid.axis(0)
    preds = []
    for s in range(0, inputs.shape[0], batch_size):
        tb = targets[s:s + batch_size]
        bnd = boundary_values(tb, model.bc, grid) if model.corrected else None
        preds.append(model(params, inputs[s:s + batch_size], x, bnd, grid.extent[0]))
    return np.concatenate(preds, axis=0)


def evaluate(model: BoonOperator, params: dict, ds: Dataset, which: str = "test", batch_size: int = 20) -> dict:
    """Relative L2, boundary L2 and the worst boundary-operator residual on one split."""
    inputs, targets = (ds.inputs, ds.outputs) if which == "all" else ds.subset(which)
    if inputs.shape[0] == 0:
        raise ValueError(f"split {which!r} is empty")
    pred = predict(model, params, ds, inputs, targets, batch_size)
    bc = model.bc if model.bc is not None else ds.spec.boundary()
    resid = boundary_operator(pred, bc, ds.grid) - boundary_operator(targets, bc, ds.grid)
    return {
        "rel_l2": float(np.mean(relative_l2(pred, targets))),
        "boundary_l2": boundary_error(pred, targets, bc, ds.grid),
        "max_boundary_residual": float(np.max(np.abs(resid))),
        "n": int(inputs.shape[0]),
        "resolution": int(ds.grid.n[0]),
    }


def _loss_and_grads(model, params, u0, target, x, extent):
    tparams = {k: Tensor(v, name=k) for k, v in params.items()}
    bnd = boundary_values(target, model.bc, _GridView(x)) if model.corrected else None
    pred = model(tparams, u0, x, bnd, extent)
    loss = relative_l2_loss(pred, target)
    loss.backward()
    return float(loss.data), {k: t.grad if t.grad is not None else np.zeros_like(t.data) for k, t in tparams.items()}


class _GridView:
    """Just enough of a grid for :func:`boundary_values` on a 1D line."""

    def __init__(self, x):
        self.dx = (float(x[1] - x[0]),)


def train(config: TrainConfig, ds: Dataset, log=None) -> TrainResult:
    """Adam on mini-batches with a step schedule; evaluates both splits after every epoch.

    History rows hold ``epoch, train_rel_l2, test_rel_l2, boundary_l2, lr``
    (boundary L2 on the test split) plus wall-clock seconds. The batch order
    comes from ``default_rng(seed)``; with identical inputs the whole run is
    reproducible bit for bit.
    """
    model = build_model(config, ds)
    rng = np.random.default_rng(config.seed)
    params = init_params(model.arch, rng)
    adam = AdamState.zeros_like(params)
    x = ds.grid.axis(0)
    extent = ds.grid.extent[0]
    x_train, y_train = ds.subset("train")
    every = config.interval(_size_class(ds))
    history = []
    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        lr = step_lr(config.lr, epoch, every, config.decay_factor)
        order = rng.permutation(x_train.shape[0])
        for s in range(0, order.size, config.batch_size):
            idx = order[s:s + config.batch_size]
            try:
                loss, grads = _loss_and_grads(model, params, x_train[idx], y_train[idx], x, extent)
            except NonFiniteError as exc:
                raise TrainingDiverged(f"epoch {epoch}: {exc}", history) from exc
            if not loss <= DIVERGENCE_LOSS:
                raise TrainingDiverged(f"epoch {epoch}: batch loss {loss:.3e} exceeds {DIVERGENCE_LOSS:g}", history)
            params = adam_step(params, grads, adam, lr)
        tr = evaluate(model, params, ds, "train", config.batch_size)
        te = evaluate(model, params, ds, "test", config.batch_size)
        row = {"epoch": epoch, "train_rel_l2": tr["rel_l2"], "test_rel_l2": te["rel_l2"],
               "boundary_l2": te["boundary_l2"], "lr": lr, "seconds": time.perf_counter() - t0}
        history.append(row)
        if log is not None:
            log(row)
        if not tr["rel_l2"] <= DIVERGENCE_LOSS:
            raise TrainingDiverged(f"epoch {epoch}: train loss {tr['rel_l2']:.3e} exceeds {DIVERGENCE_LOSS:g}", history)
    return TrainResult(params, model, adam, history)


def evaluate_resolution_transfer(model: BoonOperator, params: dict, ds: Dataset, batch_size: int = 20,
                                 which: str = "test") -> dict:
    """Metrics of a trained model on a dataset at another resolution.

    Spectral weights act on the first ``modes`` Fourier coefficients and are
    reused as is; derivative stencils are rebuilt from the new spacing.
    """
    n = ds.grid.n[0]
    if n < 2 * model.arch.modes:
        raise ValueError(f"test resolution N={n} is below 2 x modes = {2 * model.arch.modes}")
    return evaluate(model, params, ds, which, batch_size)

