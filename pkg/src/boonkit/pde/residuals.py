"""Finite-difference PDE residuals of the closed-form solutions.

Each function samples random points, evaluates the equation with central
differences of the exact solution, and returns the worst residual divided
by the magnitude of the largest term, so the numbers are comparable across
problems. Step sizes balance truncation (``h^2``) against round-off.
"""

from __future__ import annotations

import numpy as np

from .exact import burgers_riemann_exact, heat_exact, heat_source, stokes_exact, wave_exact

__all__ = ["stokes_residual", "burgers_riemann_residual", "heat_residual", "wave_residual", "RESIDUALS"]

H1 = 1e-5  # first derivatives
H2 = 1e-3  # second derivatives


def _d1(f, z, h=H1):
    return (f(z + h) - f(z - h)) / (2 * h)


def _d2(f, z, h=H2):
    return (f(z + h) - 2 * f(z) + f(z - h)) / (h * h)


def _relative(res, *terms) -> float:
    scale = max(float(np.max(np.abs(t))) for t in terms)
    return float(np.max(np.abs(res)) / max(scale, 1e-300))


def stokes_residual(rng, n_points=200, U=2.0, omega=3.5, nu=0.1) -> float:
    """``u_t - nu u_yy`` on ``(0, 1) x (0, 2]``."""
    y = rng.uniform(0.01, 1.0, n_points)
    t = rng.uniform(0.01, 2.0, n_points)
    ut = _d1(lambda s: stokes_exact(y, s, U, omega, nu), t)
    uyy = _d2(lambda s: stokes_exact(s, t, U, omega, nu), y)
    return _relative(ut - nu * uyy, ut, nu * uyy)


def burgers_riemann_residual(rng, n_points=200, uL=0.8, uR=0.0, nu=0.1) -> float:
    """``u_t + u u_x - nu u_xx`` on ``(0, 1) x (0, 1.2]``."""
    x = rng.uniform(0.0, 1.0, n_points)
    t = rng.uniform(0.01, 1.2, n_points)
    u = burgers_riemann_exact(x, t, uL, uR, nu)
    ut = _d1(lambda s: burgers_riemann_exact(x, s, uL, uR, nu), t)
    ux = _d1(lambda s: burgers_riemann_exact(s, t, uL, uR, nu), x)
    uxx = _d2(lambda s: burgers_riemann_exact(s, t, uL, uR, nu), x)
    return _relative(ut + u * ux - nu * uxx, ut, u * ux, nu * uxx)


def heat_residual(rng, n_points=200, k=0.01, U=5.0, omega=2.5) -> float:
    """``u_t - k u_xx - f`` on ``(0, 1) x [0.05, 2]`` with the driving source ``f``."""
    x = rng.uniform(0.0, 1.0, n_points)
    t = rng.uniform(0.05, 2.0, n_points)
    # pointwise pairs: evaluate on the diagonal of the (t, x) table
    def u(xx, tt):
        return np.array([heat_exact(np.array([a]), np.array([b]), k, U, omega, n_terms=400)[0, 0]
                         for a, b in zip(xx, tt)])

    ut = _d1(lambda s: u(x, s), t)
    uxx = _d2(lambda s: u(s, t), x)
    f = heat_source(x, t, U)
    return _relative(ut - k * uxx - f, ut, k * uxx, f)


def wave_residual(rng, n_points=200, c=1.0, k=3.5) -> float:
    """``u_tt - c^2 (u_xx + u_yy)`` on the unit square over ``[0, 2]``."""
    x, y = rng.uniform(0.0, 1.0, (2, n_points))
    t = rng.uniform(0.0, 2.0, n_points)
    utt = _d2(lambda s: wave_exact(x, y, s, c, k), t)
    lap = _d2(lambda s: wave_exact(s, y, t, c, k), x) + _d2(lambda s: wave_exact(x, s, t, c, k), y)
    return _relative(utt - c * c * lap, utt, c * c * lap)


RESIDUALS = {
    "stokes": stokes_residual,
    "burgers_riemann": burgers_riemann_residual,
    "heat": heat_residual,
    "wave": wave_residual,
}
