"""Kernel modules: linear maps ``y = K x`` that may never materialize ``K``.

Every module counts its applications; the boundary corrections are judged
by how many times they call the kernel, so the counter is part of the
contract. Counting is guarded by a lock so a module shared read-only across
worker threads still reports exact totals.
"""

from __future__ import annotations

import threading
from functools import lru_cache

import numpy as np

from . import fft as _fft
from .autodiff import Tensor, matvec, spectral_conv, value_of
from .grid import Field

__all__ = [
    "KernelModule",
    "DenseKernel",
    "SpectralKernel",
    "FFTModes",
    "DFTModes",
    "dense_apply",
    "spectral_apply",
    "materialize",
]


class KernelModule:
    """Base class. Subclasses implement ``_apply`` on arrays shaped ``(..., N)``."""

    def __init__(self):
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def call_counter(self) -> int:
        return self._calls

    def reset_counter(self) -> None:
        with self._lock:
            self._calls = 0

    def apply(self, x):
        with self._lock:
            self._calls += 1
        if isinstance(x, Field):
            return x.with_values(self._apply(x.values))
        return self._apply(x)

    __call__ = apply

    def _apply(self, x):  # pragma: no cover - abstract
        raise NotImplementedError


class DenseKernel(KernelModule):
    """Explicit ``N x N`` matrix, optionally with an additive boundary offset.

    The offset vector only appears in corrected kernels built for inputs
    whose boundary value is zero, where the boundary row cannot be written
    as a multiple of the input (see :mod:`boonkit.boundary.oracles`).
    """

    def __init__(self, matrix, offset=None):
        super().__init__()
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"dense kernel must be square, got {m.shape}")
        self.matrix = m
        self.offset = None if offset is None else np.asarray(offset, dtype=float)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def _apply(self, x):
        if np.shape(value_of(x))[-1] != self.size:
            raise ValueError(f"input length {np.shape(value_of(x))[-1]} != kernel size {self.size}")
        y = matvec(self.matrix, x)
        if self.offset is not None:
            y = y + self.offset
        return y


class FFTModes:
    """Mode truncation through the library FFT (adjoints included)."""

    def __init__(self, n: int, modes: int):
        _check_modes(n, modes)
        self.n, self.modes = n, modes
        self._weights = np.full(n // 2 + 1, 2.0)
        self._weights[0] = 1.0
        if n % 2 == 0:
            self._weights[-1] = 1.0

    def forward(self, x):
        return _fft.rfft(x)[..., : self.modes]

    def inverse(self, c):
        return _fft.irfft(c, self.n)

    def forward_adjoint(self, g):
        c = np.asarray(g, dtype=complex) / self._weights[: self.modes]
        return self.n * _fft.irfft(c, self.n)

    def inverse_adjoint(self, g):
        spec = _fft.rfft(g)[..., : self.modes] * (self._weights[: self.modes] / self.n)
        real_only = self._weights[: self.modes] == 1.0
        return np.where(real_only, spec.real, spec)


class DFTModes:
    """Mode truncation through cached partial DFT matrices (``N x modes``).

    Same linear map as :class:`FFTModes`, computed with real matrix products;
    cheaper when only a handful of modes is retained.
    """

    def __init__(self, n: int, modes: int):
        _check_modes(n, modes)
        self.n, self.modes = n, modes
        self.cos, self.nsin, self.inv_cos, self.inv_sin = _dft_tables(n, modes)
        # stacked real/imaginary tables so each transform is one matmul
        self._fwd = np.concatenate([self.cos, self.nsin], axis=1)  # (n, 2k)
        self._inv = np.concatenate([self.inv_cos, self.inv_sin], axis=0)  # (2k, n)

    def _split(self, y):
        return y[..., : self.modes] + 1j * y[..., self.modes:]

    @staticmethod
    def _join(c):
        c = np.asarray(c)
        return np.concatenate([c.real, c.imag], axis=-1) if np.iscomplexobj(c) else np.concatenate(
            [c, np.zeros_like(c)], axis=-1)

    def forward(self, x):
        return self._split(np.asarray(x) @ self._fwd)

    def inverse(self, c):
        return self._join(c) @ self._inv

    def forward_adjoint(self, g):
        return self._join(g) @ self._fwd.T

    def inverse_adjoint(self, g):
        return self._split(np.asarray(g) @ self._inv.T)


@lru_cache(maxsize=64)
def _dft_tables(n: int, modes: int):
    j = np.arange(n)[:, None]
    k = np.arange(modes)[None, :]
    theta = 2.0 * np.pi * ((j * k) % n) / n
    cos, nsin = np.cos(theta), -np.sin(theta)
    w = np.full(modes, 2.0)
    w[0] = 1.0
    if n % 2 == 0 and modes == n // 2 + 1:
        w[-1] = 1.0
    inv_cos = (w[:, None] * cos.T) / n
    inv_sin = (w[:, None] * nsin.T) / n
    for arr in (cos, nsin, inv_cos, inv_sin):
        arr.setflags(write=False)
    return cos, nsin, inv_cos, inv_sin


def _check_modes(n: int, modes: int) -> None:
    if modes < 1 or modes > n // 2 + 1:
        raise ValueError(f"modes={modes} must lie in [1, N/2+1={n // 2 + 1}] for N={n}")


class SpectralKernel(KernelModule):
    """Fourier multiplier acting on the last axis, channels on the one before.

    ``weights`` is either complex ``(modes, c_in, c_out)`` or real
    ``(modes, c_in, c_out, 2)``; it may also be a :class:`Tensor` so the
    module can sit inside a differentiable model. Inputs of shape ``(..., N)``
    are treated as single-channel when ``c_in == c_out == 1``.
    """

    def __init__(self, weights, backend: str = "fft"):
        super().__init__()
        if not isinstance(weights, Tensor):
            w = np.asarray(weights)
            if np.iscomplexobj(w):
                w = np.stack([w.real, w.imag], axis=-1)
            weights = np.asarray(w, dtype=float)
        if value_of(weights).ndim != 4 or value_of(weights).shape[-1] != 2:
            raise ValueError("weights must have shape (modes, c_in, c_out, 2)")
        if backend not in ("fft", "dft"):
            raise ValueError(f"unknown backend {backend!r}")
        self.weights = weights
        self.backend = backend
        self._transforms: dict[int, object] = {}

    @property
    def modes(self) -> int:
        return value_of(self.weights).shape[0]

    @property
    def channels(self) -> tuple[int, int]:
        s = value_of(self.weights).shape
        return s[1], s[2]

    def transform(self, n: int):
        t = self._transforms.get(n)
        if t is None:
            t = (FFTModes if self.backend == "fft" else DFTModes)(n, self.modes)
            self._transforms[n] = t
        return t

    def _apply(self, x):
        cin, cout = self.channels
        squeeze = cin == 1 and cout == 1 and (np.ndim(value_of(x)) == 1)
        if squeeze:
            x = x[None, :] if isinstance(x, Tensor) else np.asarray(x, dtype=float)[None, :]
        n = np.shape(value_of(x))[-1]
        y = spectral_conv(x, self.weights, self.transform(n))
        if squeeze:
            y = y[0]
        return y


def dense_apply(kernel: DenseKernel, x):
    """Exact matrix-vector product; counts as one kernel application."""
    return kernel.apply(x)


def spectral_apply(kernel: SpectralKernel, x):
    """Truncated Fourier multiplier; counts as one kernel application."""
    return kernel.apply(x)


def materialize(kernel: KernelModule, n: int) -> np.ndarray:
    """Dense matrix of a single-channel kernel, built column by column from impulses."""
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cols.append(np.asarray(value_of(kernel.apply(e)), dtype=float))
    return np.stack(cols, axis=1)
