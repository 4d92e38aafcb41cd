"""Boundary-enforcing corrections that only ever call the kernel as a black box.

A correction never builds the kernel matrix. For a value or derivative
condition at boundary index ``b`` it

1. reads the pivot ``K[b, b]`` off one application to an impulse,
2. eliminates the boundary column: the input's boundary entry becomes
   ``2 u0[b] - (K u0)[b] / K[b, b]`` so that the next application puts
   exactly ``K[b, b] u0[b]`` at ``b`` with all coupling removed,
3. applies the kernel once more and overwrites the boundary entry with the
   prescribed value (or the value that makes the stencil sum match).

That is three applications. The periodic correction only averages the two
end values of a single application.

All routines act on the last axis (or the last two for 2D grids), accept
numpy arrays, :class:`~boonkit.core.grid.Field` objects, or autodiff
tensors, and broadcast boundary data over leading batch axes. Only O(N)
auxiliary storage is used: one impulse, one modified input, and the kernel
outputs.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..core.autodiff import Tensor, put, take, value_of
from ..core.grid import Field
from .spec import BoundarySpec, FDStencil, check_weights, fd_coefficients

__all__ = [
    "ZeroPivotError",
    "correct_dirichlet",
    "correct_neumann",
    "correct_periodic",
    "correct",
    "correct_2d",
    "EliminatedOperator",
    "neumann_value",
    "periodic_average",
    "FACES",
]

# fixed processing order for 2D grids; later faces own the corners
FACES = (("x0", -2, 0), ("x1", -2, -1), ("y0", -1, 0), ("y1", -1, -1))


class ZeroPivotError(ZeroDivisionError):
    """The kernel's diagonal entry at a boundary point is exactly zero."""


def _apply_fn(K) -> Callable:
    return K.apply if hasattr(K, "apply") else K


def _check_finite(u) -> None:
    if not np.all(np.isfinite(value_of(u))):
        raise ValueError("input contains non-finite values")


class EliminatedOperator:
    """``x -> K(T x)`` where ``T`` removes the coupling to one boundary index.

    The pivot is computed once on construction (one inner application); each
    call costs two inner applications. Row ``b`` of the result equals
    ``pivot * x[b]``; the other rows are those of the column-eliminated
    kernel. Operators nest, which is how several boundaries are handled.
    """

    def __init__(self, apply, idx: int, axis: int, sample_shape: tuple[int, ...]):
        self.inner = apply
        self.idx = idx
        self.axis = axis
        impulse = np.zeros(sample_shape)
        impulse[_face_index(impulse.ndim, axis, idx)] = 1.0
        pivot = take(self.inner(impulse), idx, axis)
        if np.any(value_of(pivot) == 0.0):
            raise ZeroPivotError(f"kernel diagonal at boundary index {idx} (axis {axis}) is zero")
        self.pivot = pivot

    def __call__(self, x):
        z = self.inner(x)
        xb = take(x, self.idx, self.axis)
        v = put(x, self.idx, 2.0 * xb - take(z, self.idx, self.axis) / self.pivot, self.axis)
        return self.inner(v)


def _face_index(ndim: int, axis: int, idx: int):
    sel = [slice(None)] * ndim
    sel[axis] = idx
    return tuple(sel)


def _sample_shape(u, sample_ndim: int | None, default: int) -> tuple[int, ...]:
    shape = np.shape(value_of(u))
    k = min(len(shape), default) if sample_ndim is None else sample_ndim
    return tuple(shape[-k:])


def neumann_value(y, stencil: FDStencil, alpha, axis: int = -1):
    """Boundary entry that makes the stencil derivative of ``y`` equal ``alpha``."""
    n = np.shape(value_of(y))[axis]
    pos = stencil.positions(n)
    c = stencil.coefficients
    out = (alpha if isinstance(alpha, Tensor) else np.asarray(alpha, dtype=float)) / c[0]
    for k in range(1, c.size):
        out = out - (c[k] / c[0]) * take(y, int(pos[k]), axis)
    return out


def _oriented(stencil: FDStencil, side: str) -> FDStencil:
    return stencil if stencil.side == side else stencil.mirrored()


def _side_index(side: str) -> int:
    return 0 if side == "left" else -1


def _side_values(side: str, alpha) -> dict:
    if side == "both":
        if np.ndim(alpha) == 0 and not isinstance(alpha, (tuple, list)):
            raise ValueError("two-sided corrections need a (left, right) pair of boundary values")
        left, right = alpha
        return {"left": left, "right": right}
    if side not in ("left", "right"):
        raise ValueError(f"side must be left, right or both, got {side!r}")
    return {side: alpha}


def _wrap(u0, compute):
    if isinstance(u0, Field):
        return u0.with_values(value_of(compute(u0.values)))
    return compute(u0)


def _eliminate_and_assign(K, u0, values: dict, assign, sample_ndim):
    _check_finite(u0)
    shape = _sample_shape(u0, sample_ndim, 2)
    op = _apply_fn(K)
    for side in values:
        op = EliminatedOperator(op, _side_index(side), -1, shape)
    y = op(u0)
    for side, alpha in values.items():
        y = put(y, _side_index(side), assign(y, side, alpha), -1)
    return y


def correct_dirichlet(K, u0, alpha_D_t, side: str = "left", sample_ndim: int | None = None):
    """Kernel output with the boundary value(s) fixed to ``alpha_D_t``.

    One-sided: three kernel applications. ``side="both"`` takes a
    ``(left, right)`` pair and handles the right boundary on top of the
    left-eliminated operator (seven applications).
    """
    values = _side_values(side, alpha_D_t)

    def compute(u):
        return _eliminate_and_assign(K, u, values, lambda y, s, a: a, sample_ndim)

    return _wrap(u0, compute)


def correct_neumann(K, u0, alpha_N_t, stencil: FDStencil, side: str = "left", sample_ndim: int | None = None):
    """Kernel output whose one-sided stencil derivative equals ``alpha_N_t``.

    ``stencil`` may be given for either side; it is mirrored as needed.
    """
    if not isinstance(stencil, FDStencil):
        raise TypeError("stencil must be an FDStencil")
    values = _side_values(side, alpha_N_t)

    def assign(y, s, a):
        return neumann_value(y, _oriented(stencil, s), a)

    def compute(u):
        n = np.shape(value_of(u))[-1]
        if stencil.width > n:
            raise ValueError(f"stencil width {stencil.width} exceeds N={n}")
        return _eliminate_and_assign(K, u, values, assign, sample_ndim)

    return _wrap(u0, compute)


def periodic_average(y, alpha: float, beta: float, axis: int = -1):
    """Replace both end values by ``alpha * y[0] + beta * y[N-1]``."""
    avg = alpha * take(y, 0, axis) + beta * take(y, -1, axis)
    return put(put(y, 0, avg, axis), -1, avg, axis)


def correct_periodic(K, u0, alpha: float = 0.5, beta: float = 0.5):
    """One kernel application followed by averaging of the two end values."""
    check_weights(alpha, beta)

    def compute(u):
        _check_finite(u)
        return periodic_average(_apply_fn(K)(u), alpha, beta)

    return _wrap(u0, compute)


def correct(K, u0, spec: BoundarySpec, alpha=None, dx: float | None = None, t: float | None = None,
            sample_ndim: int | None = None):
    """Dispatch on ``spec.kind``.

    Boundary data comes from ``alpha`` (scalar, or ``(left, right)`` for two
    sides, each broadcastable over batch axes) or, when omitted, from the
    spec's own data evaluated at time ``t``.
    """
    if spec.kind == "periodic":
        return correct_periodic(K, u0, *spec.weights)
    if alpha is None:
        if t is None:
            raise ValueError("give boundary values or a time at which to evaluate the boundary data")
        vals = [spec.value(s, t) for s in spec.sides]
        alpha = tuple(vals) if spec.side == "both" else vals[0]
    if spec.kind == "dirichlet":
        return correct_dirichlet(K, u0, alpha, spec.side, sample_ndim)
    if dx is None:
        raise ValueError("neumann corrections need the grid spacing dx")
    side = "left" if spec.side == "both" else spec.side
    return correct_neumann(K, u0, alpha, fd_coefficients(spec.order, dx, side), spec.side, sample_ndim)


def correct_2d(K, u0, specs: Sequence[BoundarySpec], alphas: Sequence | None = None,
               dx: tuple[float, float] | None = None, sample_ndim: int | None = None):
    """Face-by-face correction on a 2D grid (last two axes are x, y).

    ``specs`` lists one condition per face in the order x=0, x=1, y=0, y=1,
    which is also the processing order: value and derivative faces are
    eliminated one after another on the nested operator, then all faces are
    assigned in the same order, so a later face owns the shared corners.
    Periodic faces must come in pairs on the same axis and average their two
    boundary lines. A ``None`` spec leaves its face alone. ``alphas[f]`` is
    a scalar or an array along face ``f`` (ignored for periodic faces).
    """
    if len(specs) != 4:
        raise ValueError("need exactly one boundary spec per face (x0, x1, y0, y1)")
    kinds = [None if s is None else s.kind for s in specs]
    for a, b in ((0, 1), (2, 3)):
        if (kinds[a] == "periodic") != (kinds[b] == "periodic"):
            raise ValueError("periodic faces must be paired on the same axis")
    if "neumann" in kinds and dx is None:
        raise ValueError("neumann faces need the grid spacing (dx, dy)")
    alphas = [0.0] * 4 if alphas is None else list(alphas)

    def compute(u):
        _check_finite(u)
        shape = _sample_shape(u, sample_ndim, 3)
        if len(shape) < 2:
            raise ValueError("correct_2d needs at least two spatial axes")
        op = _apply_fn(K)
        for f, (_, axis, idx) in enumerate(FACES):
            if kinds[f] in ("dirichlet", "neumann"):
                op = EliminatedOperator(op, idx, axis, shape)
        y = op(u)
        for f, (_, axis, idx) in enumerate(FACES):
            s = specs[f]
            if s is None:
                continue
            if s.kind == "dirichlet":
                y = put(y, idx, alphas[f], axis)
            elif s.kind == "neumann":
                side = "left" if idx == 0 else "right"
                st = fd_coefficients(s.order, dx[0 if axis == -2 else 1], side)
                y = put(y, idx, neumann_value(y, st, alphas[f], axis), axis)
            elif idx == -1:
                y = periodic_average(y, *s.weights, axis=axis)
        return y

    return _wrap(u0, compute)
