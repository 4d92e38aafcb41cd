"""Gaussian random fields on the periodic unit interval."""

from __future__ import annotations

import numpy as np

from ..core import fft as _fft
from ..core.grid import Field, Grid

__all__ = ["grf_eigenvalues", "grf_sample", "grf_samples"]


def grf_eigenvalues(k, scale: float = 625.0, shift: float = 25.0, power: float = 2.0):
    """Covariance eigenvalues ``scale (4 pi^2 k^2 + shift)^(-power)`` of ``scale (-Lap + shift)^(-power)``."""
    k = np.asarray(k, dtype=float)
    return scale * (4.0 * np.pi**2 * k**2 + shift) ** (-power)


def grf_samples(n_points: int, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """``(n_samples, n_points)`` draws on an endpoint-duplicated periodic grid.

    The field lives on ``m = n_points - 1`` distinct points. Its complex
    Fourier coefficients ``c_k`` (``u = sum_k c_k exp(2 pi i k x)``) are
    independent with ``E|c_k|^2 = lambda_k``; the mean mode and, for even
    ``m``, the Nyquist mode are real. The last gridpoint repeats the first.
    """
    m = n_points - 1
    if m < 2:
        raise ValueError("need at least three points")
    kmax = m // 2
    k = np.arange(kmax + 1)
    sd = np.sqrt(grf_eigenvalues(k))
    re = rng.standard_normal((n_samples, kmax + 1))
    im = rng.standard_normal((n_samples, kmax + 1))
    c = (re + 1j * im) * (sd / np.sqrt(2.0))
    c[:, 0] = re[:, 0] * sd[0]
    if m % 2 == 0:
        c[:, kmax] = re[:, kmax] * sd[kmax]
    # u_j = sum_k c_k e^{2 pi i k j / m} = m * irfft(c) with the Hermitian half spectrum
    u = m * _fft.irfft(c, m)
    return np.concatenate([u, u[:, :1]], axis=1)


def grf_sample(grid: Grid, seed) -> Field:
    """One field on ``grid`` (1D, endpoint-duplicated periodic convention)."""
    if grid.dims != 1:
        raise ValueError("GRF sampling is implemented for 1D periodic grids")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return Field(grid, grf_samples(grid.n[0], 1, rng))
