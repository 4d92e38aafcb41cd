"""Trainable spectral operator with boundary-corrected layers."""

from .checkpoint import Checkpoint, CheckpointError, checkpoint_bytes, load_checkpoint, save_checkpoint
from .loss import EPS_NORM, relative_l2, relative_l2_loss
from .model import TABLE_DEFAULTS, ArchConfig, BoonOperator, LayerKernel, init_params, mollifier, param_names
from .optim import AdamState, adam_step, step_lr
from .train import (
    TrainConfig,
    TrainingDiverged,
    TrainResult,
    build_model,
    evaluate,
    evaluate_resolution_transfer,
    predict,
    train,
)

__all__ = [
    "ArchConfig", "TABLE_DEFAULTS", "BoonOperator", "LayerKernel", "init_params", "param_names", "mollifier",
    "relative_l2", "relative_l2_loss", "EPS_NORM", "AdamState", "adam_step", "step_lr",
    "TrainConfig", "TrainResult", "TrainingDiverged", "build_model", "predict", "evaluate", "train",
    "evaluate_resolution_transfer", "Checkpoint", "CheckpointError", "checkpoint_bytes", "save_checkpoint",
    "load_checkpoint",
]
