"""Relative L2 loss over a batch."""

from __future__ import annotations

import numpy as np

from ..core.autodiff import Tensor, norm

__all__ = ["relative_l2_loss", "relative_l2", "EPS_NORM"]

# floor for the target norm so an all-zero target does not divide by zero
EPS_NORM = 1e-12


def relative_l2(pred, target) -> np.ndarray:
    """Per-sample ``||pred - target|| / max(||target||, EPS_NORM)`` over all non-batch axes."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    b = pred.shape[0]
    diff = np.linalg.norm((pred - target).reshape(b, -1), axis=1)
    return diff / np.maximum(np.linalg.norm(target.reshape(b, -1), axis=1), EPS_NORM)


def relative_l2_loss(pred, target):
    """Batch mean of the per-sample relative L2 error.

    Works on arrays (returns a float) and on autodiff tensors (returns a
    scalar tensor).
    """
    target = np.asarray(target, dtype=float)
    if not isinstance(pred, Tensor):
        return float(np.mean(relative_l2(pred, target)))
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    b = target.shape[0]
    scale = np.maximum(np.linalg.norm(target.reshape(b, -1), axis=1), EPS_NORM)
    return (norm((pred - target).reshape(b, -1), axis=-1) / scale).mean()
