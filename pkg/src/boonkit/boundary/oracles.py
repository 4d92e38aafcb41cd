"""Explicit matrix versions of the corrections, used as independent arbiters.

Each correction is written as ``K_bdy = T1 K T2``: ``T2`` is a column
operation that zeroes the boundary row of ``K`` off the diagonal, and ``T1``
rewrites the boundary row so the output meets the condition. The matrices
are built literally and multiplied, so nothing here shares code with the
fast path in :mod:`boonkit.boundary.corrections`.

The rescaling factor is ``alpha(t) / u0[b]``: the input is assumed to carry
the initial boundary data, ``alpha(0) = u0[b]``. When ``u0[b] == 0`` no
multiple of the input can produce the boundary value, so the oracle returns
an affine map instead: the boundary diagonal of ``T1`` is set to zero and the
prescribed value is carried in ``DenseKernel.offset``.
"""

from __future__ import annotations

import numpy as np

from ..core.kernels import DenseKernel
from ..core.grid import Field
from .spec import BoundarySpec, FDStencil, check_weights, fd_coefficients

__all__ = [
    "elimination_matrix",
    "dirichlet_row_matrix",
    "neumann_row_matrix",
    "periodic_matrix",
    "dense_oracle",
    "dense_dirichlet",
    "dense_neumann",
    "dense_periodic",
]


def _vec(u0) -> np.ndarray:
    v = u0.values if isinstance(u0, Field) else u0
    v = np.asarray(v, dtype=float)
    if v.ndim == 2 and v.shape[0] == 1:
        v = v[0]
    if v.ndim != 1:
        raise ValueError("dense oracles take a single-channel 1D input")
    return v


def elimination_matrix(K: np.ndarray, b: int) -> np.ndarray:
    """``T2``: identity with row ``b`` replaced by ``-K[b, j] / K[b, b]`` off the diagonal."""
    n = K.shape[0]
    if K[b, b] == 0.0:
        raise ZeroDivisionError(f"K[{b},{b}] is zero")
    T = np.eye(n)
    T[b, :] = -K[b, :] / K[b, b]
    T[b, b] = 1.0
    return T


def dirichlet_row_matrix(n: int, b: int, scale: float) -> np.ndarray:
    """``T1`` for a value condition: row ``b`` scaled by ``scale``."""
    T = np.eye(n)
    T[b, b] = scale
    return T


def neumann_row_matrix(n: int, b: int, scale: float, stencil: FDStencil) -> np.ndarray:
    """``T1`` for a derivative condition: row ``b`` solves the stencil for the boundary entry."""
    T = np.eye(n)
    pos = stencil.positions(n)
    c = stencil.coefficients
    T[b, b] = scale
    for k in range(1, c.size):
        T[b, pos[k]] = -c[k] / c[0]
    return T


def periodic_matrix(n: int, alpha: float, beta: float) -> np.ndarray:
    """Identity with the first and last rows replaced by ``[alpha, 0, ..., 0, beta]``."""
    check_weights(alpha, beta)
    T = np.eye(n)
    for r in (0, n - 1):
        T[r, :] = 0.0
        T[r, 0] = alpha
        T[r, n - 1] = beta
    return T


def _step(M, offset, u0, b, target, row_builder):
    """One boundary: ``x -> T1 (M T2 x + offset)`` plus a new offset if division-free."""
    n = M.shape[0]
    T2 = elimination_matrix(M, b)
    ub = u0[b]
    if ub != 0.0:
        scale = target / ub / M[b, b]
        extra = 0.0
    else:
        scale, extra = 0.0, target
    T1 = row_builder(n, b, scale)
    M_new = T1 @ M @ T2
    off = T1 @ offset
    off[b] += extra
    return M_new, off


def dense_dirichlet(K, u0, alpha_t, side: str = "left") -> DenseKernel:
    """``T1 K T2`` for value conditions; two sides are composed left then right."""
    M = _matrix(K)
    u = _vec(u0)
    offset = np.zeros(M.shape[0])
    for s, a in _pairs(side, alpha_t):
        b = 0 if s == "left" else M.shape[0] - 1
        M, offset = _step(M, offset, u, b, a, dirichlet_row_matrix)
    return DenseKernel(M, offset if np.any(offset) else None)


def dense_neumann(K, u0, alpha_N_t, stencil: FDStencil, side: str = "left") -> DenseKernel:
    """``T1 K T2`` for derivative conditions; ``scale`` uses ``alpha / (c0 u0[b])``."""
    M = _matrix(K)
    u = _vec(u0)
    offset = np.zeros(M.shape[0])
    for s, a in _pairs(side, alpha_N_t):
        st = stencil if stencil.side == s else stencil.mirrored()
        b = 0 if s == "left" else M.shape[0] - 1

        def rows(n, b_, scale, st=st):
            return neumann_row_matrix(n, b_, scale, st)

        M, offset = _step(M, offset, u, b, a / st.c0, rows)
    return DenseKernel(M, offset if np.any(offset) else None)


def dense_periodic(K, alpha: float = 0.5, beta: float = 0.5) -> DenseKernel:
    """``T K`` with the periodic averaging rows."""
    M = _matrix(K)
    return DenseKernel(periodic_matrix(M.shape[0], alpha, beta) @ M)


def dense_oracle(K, spec: BoundarySpec, u0, alpha=None, t: float | None = None,
                 dx: float | None = None) -> DenseKernel:
    """Materialized corrected kernel for ``spec`` (see module docstring)."""
    if spec.kind == "periodic":
        return dense_periodic(K, *spec.weights)
    if alpha is None:
        if t is None:
            raise ValueError("give boundary values or a time at which to evaluate the boundary data")
        vals = [spec.value(s, t) for s in spec.sides]
        alpha = tuple(vals) if spec.side == "both" else vals[0]
    if spec.kind == "dirichlet":
        return dense_dirichlet(K, u0, alpha, spec.side)
    if dx is None:
        raise ValueError("neumann oracle needs dx")
    side = "left" if spec.side == "both" else spec.side
    return dense_neumann(K, u0, alpha, fd_coefficients(spec.order, dx, side), spec.side)


def _matrix(K) -> np.ndarray:
    M = K.matrix if isinstance(K, DenseKernel) else np.asarray(K, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("dense oracle needs a square matrix")
    return M.copy()


def _pairs(side: str, alpha):
    if side == "both":
        left, right = alpha
        return (("left", float(left)), ("right", float(right)))
    if side not in ("left", "right"):
        raise ValueError(f"bad side {side!r}")
    return ((side, float(alpha)),)
