"""Discrete Fourier transforms written from scratch.

Convention: the forward transform is unnormalized,

    X[k] = sum_j x[j] exp(-2 pi i j k / n),

and the inverse carries the 1/n factor. Power-of-two lengths go through a
vectorized radix-2 decimation-in-time pass; every other length is routed
through Bluestein's chirp-z algorithm on a padded power-of-two transform.

All transforms act on the last axis and broadcast over leading axes.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["fft", "ifft", "rfft", "irfft", "dft_direct", "is_power_of_two"]

_LEAF = 16


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@lru_cache(maxsize=None)
def _leaf_matrix(n: int) -> np.ndarray:
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n)


@lru_cache(maxsize=None)
def _twiddles(half: int) -> np.ndarray:
    return np.exp(-1j * np.pi * np.arange(half) / half)[:, None]


def _fft_pow2(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    lead = x.shape[:-1]
    leaf = min(n, _LEAF)
    # row r of the reshape holds x[r*L:(r+1)*L]; column c is the stride-L subsequence
    blocks = x.reshape(lead + (leaf, n // leaf))
    out = np.matmul(_leaf_matrix(leaf), blocks.astype(complex, copy=False))
    while out.shape[-2] < n:
        half_cols = out.shape[-1] // 2
        even = out[..., :half_cols]
        odd = out[..., half_cols:] * _twiddles(out.shape[-2])
        out = np.concatenate([even + odd, even - odd], axis=-2)
    return out.reshape(lead + (n,))


@lru_cache(maxsize=None)
def _bluestein_plan(n: int) -> tuple[np.ndarray, np.ndarray, int]:
    size = 1
    while size < 2 * n - 1:
        size *= 2
    k = np.arange(n, dtype=np.int64)
    # k^2 mod 2n keeps the chirp phase accurate for large k
    chirp = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
    b = np.zeros(size, dtype=complex)
    b[:n] = np.conj(chirp)
    if n > 1:
        b[-(n - 1):] = np.conj(chirp[1:])[::-1]
    return chirp, _fft_pow2(b), size


def _fft_bluestein(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    chirp, b_hat, size = _bluestein_plan(n)
    a = np.zeros(x.shape[:-1] + (size,), dtype=complex)
    a[..., :n] = x * chirp
    conv = _ifft_pow2(_fft_pow2(a) * b_hat)
    return conv[..., :n] * chirp


def _ifft_pow2(x: np.ndarray) -> np.ndarray:
    return np.conj(_fft_pow2(np.conj(x))) / x.shape[-1]


def _check_finite(x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise ValueError("FFT input contains non-finite values")


def _fft(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    if n == 1:
        return x.astype(complex, copy=True)
    if is_power_of_two(n):
        return _fft_pow2(x)
    return _fft_bluestein(x)


def fft(x) -> np.ndarray:
    """Unnormalized complex DFT along the last axis."""
    x = np.asarray(x, dtype=complex)
    _check_finite(x)
    return _fft(x)


def ifft(x) -> np.ndarray:
    """Inverse of :func:`fft` (carries the 1/n factor)."""
    x = np.asarray(x, dtype=complex)
    _check_finite(x)
    return np.conj(_fft(np.conj(x))) / x.shape[-1]


@lru_cache(maxsize=None)
def _rfft_twiddle(n: int) -> np.ndarray:
    return np.exp(-2j * np.pi * np.arange(n // 2 + 1) / n)


def rfft(x) -> np.ndarray:
    """Forward DFT of a real signal; returns the n//2 + 1 non-negative modes."""
    x = np.asarray(x, dtype=float)
    _check_finite(x)
    n = x.shape[-1]
    if n % 2 or n < 4:
        return _fft(x.astype(complex))[..., : n // 2 + 1]
    half = n // 2
    # pack even/odd samples into one complex signal of half length
    z = x[..., 0::2] + 1j * x[..., 1::2]
    zf = _fft(z)
    zk = np.concatenate([zf, zf[..., :1]], axis=-1)
    zr = np.conj(np.concatenate([zf[..., :1], zf[..., :0:-1], zf[..., :1]], axis=-1))
    even = 0.5 * (zk + zr)
    odd = -0.5j * (zk - zr)
    return even + _rfft_twiddle(n) * odd


def irfft(c, n: int | None = None) -> np.ndarray:
    """Inverse of :func:`rfft` producing a real signal of length ``n``.

    Input is treated as the non-negative half of a Hermitian spectrum: the
    imaginary parts of the DC term (and of the Nyquist term for even ``n``)
    are discarded, which is the symmetrization policy for asymmetric input.
    Missing high modes are zero; surplus modes beyond ``n//2`` raise.
    """
    c = np.asarray(c, dtype=complex)
    _check_finite(c)
    if n is None:
        n = 2 * (c.shape[-1] - 1)
    if n < 1:
        raise ValueError("output length must be positive")
    nh = n // 2 + 1
    if c.shape[-1] > nh:
        raise ValueError(f"{c.shape[-1]} coefficients exceed n//2+1={nh} for n={n}")
    spec = np.zeros(c.shape[:-1] + (nh,), dtype=complex)
    spec[..., : c.shape[-1]] = c
    spec[..., 0] = spec[..., 0].real
    if n % 2 == 0:
        spec[..., -1] = spec[..., -1].real
    if n % 2 or n < 4:
        full = np.zeros(c.shape[:-1] + (n,), dtype=complex)
        full[..., :nh] = spec
        tail = n - nh
        if tail:
            full[..., nh:] = np.conj(spec[..., 1 : 1 + tail][..., ::-1])
        return np.conj(_fft(np.conj(full))).real / n
    half = n // 2
    xk = spec[..., :half]
    xr = np.conj(spec[..., half:0:-1])
    even = 0.5 * (xk + xr)
    odd = 0.5 * (xk - xr) * np.conj(_rfft_twiddle(n)[:half])
    zf = even + 1j * odd
    z = np.conj(_fft(np.conj(zf))) / half
    out = np.empty(c.shape[:-1] + (n,))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def dft_direct(x) -> np.ndarray:
    """O(n^2) reference DFT by explicit summation."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    out = np.zeros(x.shape, dtype=complex)
    for k in range(n):
        acc = 0j
        for j in range(n):
            acc += x[..., j] * complex(np.cos(2 * np.pi * j * k / n), -np.sin(2 * np.pi * j * k / n))
        out[..., k] = acc
    return out
