"""Closed-form reference solutions. All functions broadcast over array inputs."""

from __future__ import annotations

import numpy as np

__all__ = [
    "stokes_exact",
    "burgers_riemann_exact",
    "riemann_initial",
    "heat_coefficient",
    "heat_terms",
    "heat_exact",
    "heat_source",
    "wave_exact",
]


def stokes_exact(y, t, U: float, omega: float, nu: float):
    """Oscillating-plate flow ``U exp(-k y) cos(k y - omega t)``, ``k = sqrt(omega / (2 nu))``."""
    if nu <= 0:
        raise ValueError(f"viscosity must be positive, got {nu}")
    k = np.sqrt(omega / (2.0 * nu))
    y = np.asarray(y, dtype=float)
    return U * np.exp(-k * y) * np.cos(k * y - omega * np.asarray(t, dtype=float))


def riemann_initial(x, uL: float, uR: float):
    """Step initial data: ``uL`` for ``x <= 0.5``, ``uR`` beyond."""
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0.5, uL, uR)


def burgers_riemann_exact(x, t, uL: float, uR: float, nu: float):
    """Viscous shock travelling at ``s = (uL + uR) / 2`` from ``x = 0.5``."""
    if nu <= 0:
        raise ValueError(f"viscosity must be positive, got {nu}")
    if not uL > uR:
        raise ValueError("the travelling-shock profile needs uL > uR")
    s = 0.5 * (uL + uR)
    arg = (np.asarray(x, dtype=float) - 0.5 - s * np.asarray(t, dtype=float)) * (uL - uR) / (4.0 * nu)
    return 0.5 * (uL + uR) - 0.5 * (uL - uR) * np.tanh(arg)


def heat_coefficient(n, omega: float):
    """Cosine-series coefficient of ``cos(omega pi x)`` on [0, 1] for mode ``n >= 1``.

    Equals 1 when ``omega`` is (within 1e-12 of) the integer ``n``.
    """
    n = np.asarray(n, dtype=float)
    resonant = np.abs(omega - n) < 1e-12
    wp, wm = omega + n, np.where(resonant, 1.0, omega - n)
    a = np.sin(wp * np.pi) / (wp * np.pi) + np.sin(wm * np.pi) / (wm * np.pi)
    return np.where(resonant, 1.0, a)


def heat_terms(t_min: float, k: float, omega: float, tol: float = 1e-14, cap: int = 10_000,
               t0_terms: int = 2000) -> int:
    """Series length: drop modes once ``|a_n| exp(-k (n pi)^2 t_min) < tol``.

    ``|a_n|`` is bounded by ``2 / (pi |n - omega|)`` away from resonance. At
    ``t_min = 0`` nothing decays, so a fixed ``t0_terms`` is used (the sum
    then converges like the cosine series of the initial data, with Gibbs-size
    errors only at a discontinuous derivative, which ``cos(omega pi x)`` does
    not have).
    """
    if t_min <= 0:
        return t0_terms
    n = np.arange(1, cap + 1, dtype=float)
    bound = 2.0 / (np.pi * np.maximum(np.abs(n - omega), 0.5)) * np.exp(-k * (n * np.pi) ** 2 * t_min)
    small = np.nonzero(bound < tol)[0]
    # bound is eventually monotone; first n where it drops below tol
    return int(n[small[0]]) if small.size else cap


def heat_exact(x, t, k: float, U: float, omega: float, n_terms: int | None = None):
    """Heat equation with insulated left end and driven flux ``U sin(pi t)`` at x = 1.

    Returns an array of shape ``broadcast(t).shape + x.shape`` when ``t`` is
    an array, so a vector of times yields one row per time.
    """
    if k <= 0:
        raise ValueError("conductivity must be positive")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if n_terms is None:
        n_terms = heat_terms(float(np.min(t)), k, omega)
    if n_terms < 1:
        raise ValueError("need at least one series term")
    xs = x.ravel()
    tt = t[..., None]
    n = np.arange(1, n_terms + 1, dtype=float)
    a = heat_coefficient(n, omega)
    mean = np.sinc(omega)  # sin(omega pi) / (omega pi)
    forced = U * xs**2 / 2.0 * np.sin(np.pi * tt) - U * k / np.pi * (np.cos(np.pi * tt) - 1.0) + mean
    decay = a * np.exp(-k * (n * np.pi) ** 2 * tt)  # (..., n_terms)
    series = decay @ np.cos(np.pi * np.multiply.outer(n, xs))
    return (forced + series).reshape(t.shape + x.shape)


def heat_source(x, t, U: float):
    """Forcing ``U pi x^2 / 2 cos(pi t)`` that drives the heat solution above."""
    return U * np.pi * np.asarray(x, dtype=float) ** 2 / 2.0 * np.cos(np.pi * np.asarray(t, dtype=float))


def wave_exact(x, y, t, c: float, k: float):
    """Standing wave ``k cos(pi x) cos(pi y) cos(c sqrt(2) pi t)``."""
    return k * np.cos(np.pi * np.asarray(x)) * np.cos(np.pi * np.asarray(y)) * np.cos(c * np.sqrt(2.0) * np.pi * np.asarray(t))
