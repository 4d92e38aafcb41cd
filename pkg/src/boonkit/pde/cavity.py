"""Lid-driven cavity on a staggered (MAC) grid with a projection method.

``n`` cells per side, ``h = 1 / n``. Horizontal velocity ``u`` lives on
vertical cell faces, vertical velocity ``v`` on horizontal faces, pressure at
cell centres. One ghost layer carries the no-slip and moving-lid conditions:

* ``U[i, j]``: face ``x = i h`` (``i = 0..n``), centre ``y = (j - 1/2) h``
  (``j = 0..n+1``; rows 0 and n+1 are ghosts),
* ``V[i, j]``: centre ``x = (i - 1/2) h`` (``i = 0..n+1``; ghosts at 0, n+1),
  face ``y = j h`` (``j = 0..n``).

Each step: second-order Adams-Bashforth for convection (forward Euler on the
first step), Crank-Nicolson for diffusion (sparse LU), then a pressure
Poisson solve on cell centres (sparse LU, one cell pinned) and the velocity
correction. Vorticity ``dv/dx - du/dy`` is evaluated at the ``(n+1)^2`` cell
corners, which are the nodes of an endpoint-inclusive ``N x N`` grid with
``N = n + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = ["PoissonError", "CavityState", "LidCavity", "lid_cavity_solve"]


class PoissonError(RuntimeError):
    """Pressure solve failed to meet its residual tolerance."""

    def __init__(self, message, history):
        super().__init__(f"{message}; residual history: {history}")
        self.history = history


@dataclass
class CavityState:
    U: np.ndarray
    V: np.ndarray
    t: float = 0.0
    conv_prev: tuple | None = None
    divergence: list = field(default_factory=list)
    poisson_residual: list = field(default_factory=list)


def _lap1d(m: int, left: float, right: float) -> sp.csr_matrix:
    """Second difference on ``m`` unknowns; ``left``/``right`` are the ghost reflection factors.

    A ghost value ``g = r * u_edge + data`` adds ``r`` to the edge diagonal.
    For a Dirichlet node outside the unknowns use ``r = 0``.
    """
    main = -2.0 * np.ones(m)
    main[0] += left
    main[-1] += right
    off = np.ones(m - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


class LidCavity:
    """Reusable operators for a given resolution and Reynolds number."""

    def __init__(self, n_cells: int, re: float, dt: float):
        if n_cells < 3:
            raise ValueError("need at least 3 cells per side")
        if re <= 0:
            raise ValueError("Reynolds number must be positive")
        self.n = n = n_cells
        self.h = h = 1.0 / n
        self.nu = 1.0 / re
        self.dt = dt
        # u unknowns: i = 1..n-1 (x), j = 1..n (y); walls at i = 0, n are Dirichlet nodes,
        # ghosts at j = 0 (g = -u) and j = n+1 (g = 2 lid - u)
        lap_u = (sp.kron(_lap1d(n - 1, 0.0, 0.0), sp.identity(n)) + sp.kron(sp.identity(n - 1), _lap1d(n, -1.0, -1.0))) / h**2
        # v unknowns: i = 1..n (x), j = 1..n-1 (y); ghosts at i = 0, n+1 (g = -v), walls j = 0, n
        lap_v = (sp.kron(_lap1d(n, -1.0, -1.0), sp.identity(n - 1)) + sp.kron(sp.identity(n), _lap1d(n - 1, 0.0, 0.0))) / h**2
        self.lap_u = lap_u.tocsr()
        self.lap_v = lap_v.tocsr()
        c = 0.5 * dt * self.nu
        self.solve_u = spla.splu((sp.identity(lap_u.shape[0]) - c * lap_u).tocsc())
        self.solve_v = spla.splu((sp.identity(lap_v.shape[0]) - c * lap_v).tocsc())
        # pressure: homogeneous Neumann on all walls, cell (0, 0) pinned to zero
        lap_p = (sp.kron(_lap1d(n, 1.0, 1.0), sp.identity(n)) + sp.kron(sp.identity(n), _lap1d(n, 1.0, 1.0))).tolil()
        lap_p[0, :] = 0.0
        lap_p[0, 0] = 1.0
        self.lap_p = lap_p.tocsr() / h**2
        self.solve_p = spla.splu(self.lap_p.tocsc())

    # boundary conditions ------------------------------------------------

    @staticmethod
    def apply_bc(U, V, lid: float) -> None:
        U[0, :] = 0.0
        U[-1, :] = 0.0
        U[:, 0] = -U[:, 1]
        U[:, -1] = 2.0 * lid - U[:, -2]
        V[:, 0] = 0.0
        V[:, -1] = 0.0
        V[0, :] = -V[1, :]
        V[-1, :] = -V[-2, :]

    def initial_state(self, lid: float) -> CavityState:
        n = self.n
        U = np.zeros((n + 1, n + 2))
        V = np.zeros((n + 2, n + 1))
        self.apply_bc(U, V, lid)
        return CavityState(U, V)

    # discrete operators ---------------------------------------------------

    def convection(self, U, V):
        """``(u . grad) u`` in divergence form at interior u and v points."""
        h = self.h
        uc = 0.5 * (U[1:, 1:-1] + U[:-1, 1:-1])  # cell centres, (n, n)
        vc = 0.5 * (V[1:-1, 1:] + V[1:-1, :-1])  # cell centres, (n, n)
        # corner products, corners i = 0..n, j = 0..n
        u_corner = 0.5 * (U[:, :-1] + U[:, 1:])  # (n+1, n+1)
        v_corner = 0.5 * (V[:-1, :] + V[1:, :])  # (n+1, n+1)
        uv = u_corner * v_corner
        uu = uc * uc
        vv = vc * vc
        cu = (uu[1:, :] - uu[:-1, :]) / h + (uv[1:-1, 1:] - uv[1:-1, :-1]) / h  # (n-1, n)
        cv = (uv[1:, 1:-1] - uv[:-1, 1:-1]) / h + (vv[:, 1:] - vv[:, :-1]) / h  # (n, n-1)
        return cu, cv

    def divergence(self, U, V):
        h = self.h
        return (U[1:, 1:-1] - U[:-1, 1:-1]) / h + (V[1:-1, 1:] - V[1:-1, :-1]) / h

    def _diffusion_rhs(self, U, V, lid):
        """Explicit half of Crank-Nicolson plus the ghost data (lid) contribution."""
        n, h = self.n, self.h
        ui = U[1:-1, 1:-1].ravel()
        vi = V[1:-1, 1:-1].ravel()
        bu = np.zeros((n - 1, n))
        bu[:, -1] = 2.0 * lid / h**2  # ghost 2 lid - u at the top row
        return self.lap_u @ ui + bu.ravel(), self.lap_v @ vi, bu.ravel()

    def step(self, state: CavityState, lid: float) -> None:
        n, h, dt, nu = self.n, self.h, self.dt, self.nu
        U, V = state.U, state.V
        cu, cv = self.convection(U, V)
        if state.conv_prev is None:
            au, av = cu, cv
        else:
            au = 1.5 * cu - 0.5 * state.conv_prev[0]
            av = 1.5 * cv - 0.5 * state.conv_prev[1]
        state.conv_prev = (cu, cv)
        lu, lv, bu = self._diffusion_rhs(U, V, lid)
        ru = U[1:-1, 1:-1].ravel() + dt * (-au.ravel() + 0.5 * nu * lu + 0.5 * nu * bu)
        rv = V[1:-1, 1:-1].ravel() + dt * (-av.ravel() + 0.5 * nu * lv)
        Us = U.copy()
        Vs = V.copy()
        Us[1:-1, 1:-1] = self.solve_u.solve(ru).reshape(n - 1, n)
        Vs[1:-1, 1:-1] = self.solve_v.solve(rv).reshape(n, n - 1)
        self.apply_bc(Us, Vs, lid)
        # projection
        rhs = (self.divergence(Us, Vs) / dt).ravel()
        rhs[0] = 0.0
        phi = self.solve_p.solve(rhs)
        res = float(np.max(np.abs(self.lap_p @ phi - rhs)))
        scale = max(1.0, float(np.max(np.abs(rhs))))
        state.poisson_residual.append(res / scale)
        if not res <= 1e-10 * scale:
            raise PoissonError("pressure Poisson solve did not converge", state.poisson_residual[-10:])
        phi = phi.reshape(n, n)
        Us[1:-1, 1:-1] -= dt * (phi[1:, :] - phi[:-1, :]) / h
        Vs[1:-1, 1:-1] -= dt * (phi[:, 1:] - phi[:, :-1]) / h
        self.apply_bc(Us, Vs, lid)
        state.U, state.V = Us, Vs
        state.t += dt
        state.divergence.append(float(np.max(np.abs(self.divergence(Us, Vs)))))

    def vorticity(self, state: CavityState) -> np.ndarray:
        """``dv/dx - du/dy`` at the ``(n+1) x (n+1)`` corners, indexed ``[x, y]``."""
        h = self.h
        return (state.V[1:, :] - state.V[:-1, :]) / h - (state.U[:, 1:] - state.U[:, :-1]) / h


def lid_cavity_solve(N: int, re: float, U: float, n_t: int = 30, t_final: float = 2.0,
                     cfl: float = 0.4, return_state: bool = False):
    """Vorticity snapshots ``(n_t, N, N)`` at ``t_j = j t_final / n_t`` plus the initial field.

    Returns ``(w0, snapshots)`` where ``w0`` is the vorticity of the initial
    condition (fluid at rest, lid moving). The inner step is the largest
    ``dt <= cfl h / U`` that divides the snapshot interval evenly.
    """
    if N > 257:
        raise ValueError("lid cavity solver is meant for N <= 257")
    if U <= 0:
        raise ValueError("lid speed must be positive")
    n = N - 1
    h = 1.0 / n
    out_dt = t_final / n_t
    sub = int(np.ceil(out_dt / (cfl * h / U) - 1e-12))
    dt = out_dt / sub
    solver = LidCavity(n, re, dt)
    state = solver.initial_state(U)
    w0 = solver.vorticity(state)
    snaps = np.empty((n_t, N, N))
    for j in range(n_t):
        for _ in range(sub):
            solver.step(state, U)
        snaps[j] = solver.vorticity(state)
    if return_state:
        return w0, snaps, state, solver
    return w0, snaps
