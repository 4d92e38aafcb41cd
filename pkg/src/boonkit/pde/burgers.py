"""Finite-difference reference solver for viscous Burgers on a periodic interval.

Conservative first-order upwind (Engquist-Osher) flux for ``(u^2/2)_x``,
second-order central differences for ``nu u_xx``, SSP-RK2 in time. The
state is stored on ``m`` distinct points; inputs and outputs use the
endpoint-duplicated convention (``u[N-1]`` repeats ``u[0]``).
"""

from __future__ import annotations

import numpy as np

__all__ = ["CFLError", "stable_dt", "burgers_periodic_fd_solve", "CFL_SAFETY"]

CFL_SAFETY = 0.4


class CFLError(ValueError):
    """Requested time step exceeds the stability limit."""


def stable_dt(u: np.ndarray, dx: float, nu: float, safety: float = CFL_SAFETY) -> float:
    """``safety * min(dx / max|u|, dx^2 / (2 nu))``."""
    umax = float(np.max(np.abs(u))) if np.size(u) else 0.0
    adv = dx / umax if umax > 0 else np.inf
    dif = dx * dx / (2.0 * nu) if nu > 0 else np.inf
    dt = safety * min(adv, dif)
    if not np.isfinite(dt):
        raise ValueError("no stability limit: zero velocity and zero viscosity")
    return dt


def _flux(u):
    # Engquist-Osher split of u^2/2 at the interface between u and its right neighbour
    ur = np.roll(u, -1, axis=-1)
    return 0.5 * np.maximum(u, 0.0) ** 2 + 0.5 * np.minimum(ur, 0.0) ** 2


def _rhs(u, dx, nu):
    f = _flux(u)
    conv = (f - np.roll(f, 1, axis=-1)) / dx
    diff = nu * (np.roll(u, -1, axis=-1) - 2.0 * u + np.roll(u, 1, axis=-1)) / (dx * dx)
    return diff - conv


def burgers_periodic_fd_solve(u0, nu: float, n_t: int, t_final: float, dt: float | None = None,
                              extent: float = 1.0, return_mass: bool = False):
    """Solution at ``t_j = j t_final / n_t`` for ``j = 1..n_t``.

    ``u0`` is ``(..., N)`` with ``u0[..., -1] == u0[..., 0]``; leading axes are
    solved together. Returns ``(..., n_t, N)``. With a fixed ``dt`` larger
    than the stability limit a :class:`CFLError` names the required step.
    """
    if nu <= 0:
        raise ValueError("viscosity must be positive")
    u0 = np.asarray(u0, dtype=float)
    if not np.all(np.isfinite(u0)):
        raise ValueError("non-finite initial data")
    if not np.allclose(u0[..., 0], u0[..., -1], rtol=0, atol=1e-12):
        raise ValueError("initial data must be periodic with u[0] == u[N-1]")
    u = u0[..., :-1].copy()
    m = u.shape[-1]
    dx = extent / m
    out_dt = t_final / n_t
    out = np.empty(u0.shape[:-1] + (n_t, m + 1))
    masses = [u.sum(axis=-1) * dx]
    for j in range(n_t):
        limit = stable_dt(u, dx, nu)
        if dt is not None and dt > limit:
            raise CFLError(f"dt={dt:g} exceeds the stable step {limit:g}; use dt <= {limit:g}")
        h = dt if dt is not None else limit
        steps = int(np.ceil(out_dt / h - 1e-12))
        h = out_dt / steps
        for _ in range(steps):
            u1 = u + h * _rhs(u, dx, nu)
            u = 0.5 * u + 0.5 * (u1 + h * _rhs(u1, dx, nu))
            if return_mass:
                masses.append(u.sum(axis=-1) * dx)
        if not np.all(np.isfinite(u)):
            raise FloatingPointError("Burgers solver produced non-finite values")
        out[..., j, :m] = u
        out[..., j, m] = u[..., 0]
    if return_mass:
        return out, np.array(masses)
    return out
