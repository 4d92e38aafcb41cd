"""Closed-form distances between corrected and uncorrected outputs.

All three functions describe the left boundary of a single-channel 1D
problem, ``u = K u0`` being the uncorrected output.
"""

from __future__ import annotations

import numpy as np

from ..core.kernels import DenseKernel
from .oracles import _matrix, _vec
from .spec import FDStencil, check_weights

__all__ = ["bound_periodic", "bound_dirichlet", "bound_neumann", "neumann_bound_terms"]


def bound_periodic(u, alpha: float = 0.5, beta: float = 0.5) -> float:
    """``||u - u_corrected||_2`` for the periodic averaging: ``sqrt(a^2 + b^2) |u[0] - u[N-1]|``.

    This is an equality. It is smallest at ``alpha = beta = 1/2`` where the
    factor is ``1/sqrt(2)``.
    """
    check_weights(alpha, beta)
    u = _vec(u)
    return float(np.hypot(alpha, beta) * abs(u[0] - u[-1]))


def _pivot_terms(K, u0):
    M = _matrix(K)
    u0 = _vec(u0)
    k00 = M[0, 0]
    if k00 == 0.0:
        raise ZeroDivisionError("K[0,0] = 0: the boundary pivot is undefined, no bound is available")
    u = M @ u0
    gap = u[0] - k00 * u0[0]
    ratio = M[:, 0] / k00
    return M, u0, u, gap, ratio


def bound_dirichlet(K: DenseKernel, u0, alpha_D_t: float) -> float:
    """Distance to the value-corrected output (an equality).

    ``sqrt((u[0] - alpha)^2 + (u[0] - K00 u0[0])^2 (sum_i K_i0^2 / K00^2 - 1))``
    """
    _, _, u, gap, ratio = _pivot_terms(K, u0)
    coupling = np.sum(ratio**2) - 1.0
    return float(np.sqrt((u[0] - alpha_D_t) ** 2 + gap**2 * max(coupling, 0.0)))


def neumann_bound_terms(K: DenseKernel, u0, alpha_N_t: float, stencil: FDStencil) -> tuple[float, float]:
    """The two components ``(f1, f2)`` of the derivative-condition bound."""
    if stencil.side != "left":
        raise ValueError("bounds are stated for the left boundary")
    M, _, u, gap, ratio = _pivot_terms(K, u0)
    c = stencil.coefficients
    c0 = c[0]
    k = np.arange(1, c.size)
    f1 = u[0] - alpha_N_t / c0 + np.sum(c[k] * u[k]) / c0 + np.sum(c[k] * ratio[k] / c0) * (-gap)
    f2 = abs(gap) * np.sqrt(max(np.sum(ratio**2) - 1.0, 0.0))
    return float(f1), float(f2)


def bound_neumann(K: DenseKernel, u0, alpha_N_t: float, stencil: FDStencil) -> float:
    """``sqrt(f1^2 + f2^2)``, an upper bound on the derivative-corrected distance."""
    f1, f2 = neumann_bound_terms(K, u0, alpha_N_t, stencil)
    return float(np.hypot(f1, f2))
