"""Boundary operators applied to prediction/target stacks and the boundary error."""

from __future__ import annotations

import numpy as np

from ..core.grid import Grid
from .spec import BoundarySpec, fd_coefficients

__all__ = ["boundary_operator", "boundary_values", "boundary_error"]


def _sides(spec: BoundarySpec):
    return ("left", "right") if spec.side == "both" else (spec.side,)


def boundary_operator(u, spec: BoundarySpec, grid: Grid) -> np.ndarray:
    """Stack of boundary quantities along a trailing axis.

    Value conditions read ``u`` at the boundary points, derivative
    conditions evaluate the one-sided stencil, periodic conditions return
    ``u[0] - u[N-1]``. 2D grids contribute one entry per boundary point of
    every face (x faces first).
    """
    u = np.asarray(u, dtype=float)
    if grid.dims == 1:
        return _line(u, spec, grid.dx[0], -1)[..., None] if spec.kind == "periodic" else np.stack(
            [_side_value(u, spec, grid.dx[0], s, -1) for s in _sides(spec)], axis=-1)
    parts = []
    for axis, d in ((-2, 0), (-1, 1)):
        if spec.kind == "periodic":
            parts.append(_line(u, spec, grid.dx[d], axis))
        else:
            parts.extend(_side_value(u, spec, grid.dx[d], s, axis) for s in _sides(spec))
    return np.concatenate(parts, axis=-1)


def _line(u, spec, dx, axis):
    return np.take(u, 0, axis=axis) - np.take(u, -1, axis=axis)


def _side_value(u, spec, dx, side, axis):
    if spec.kind == "dirichlet":
        return np.take(u, 0 if side == "left" else -1, axis=axis)
    return fd_coefficients(spec.order, dx, side).apply(u, axis=axis)


def boundary_values(target, spec: BoundarySpec, grid: Grid):
    """Per-sample boundary data implied by reference outputs.

    Returns the left value alone, the right value alone, or a
    ``(left, right)`` pair, each shaped like the target without its spatial
    axis. Periodic specs carry no data and return ``None``.
    """
    if spec.kind == "periodic":
        return None
    target = np.asarray(target, dtype=float)
    vals = [_side_value(target, spec, grid.dx[-1], s, -1) for s in _sides(spec)]
    return tuple(vals) if spec.side == "both" else vals[0]


def boundary_error(pred, target, spec: BoundarySpec, grid: Grid) -> float:
    """Sample-averaged L2 norm of the boundary operator mismatch.

    ``pred`` and ``target`` are ``(n, ..., *grid.n)`` stacks (any number of
    time channels in between). For each sample the squared differences are
    summed over boundary points and time channels, square-rooted, and then
    averaged over samples.
    """
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    if pred.ndim < grid.dims + 1 or pred.shape[0] == 0:
        raise ValueError("boundary error needs a non-empty stack of samples")
    if pred.shape[-grid.dims:] != grid.n:
        raise ValueError(f"trailing shape {pred.shape[-grid.dims:]} does not match grid {grid.n}")
    diff = boundary_operator(pred, spec, grid) - boundary_operator(target, spec, grid)
    per_sample = np.sqrt(np.sum(diff.reshape(diff.shape[0], -1) ** 2, axis=1))
    return float(np.mean(per_sample))
