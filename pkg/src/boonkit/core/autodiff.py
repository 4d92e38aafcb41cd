"""A small tape-free reverse-mode differentiation engine over numpy arrays.

Each :class:`Tensor` keeps its parents and a closure that maps the output
cotangent to parent cotangents. :meth:`Tensor.backward` walks the graph in
reverse topological order. Only the operations the operator model needs are
provided; every one of them also accepts plain ndarrays, so code written
against this module runs unchanged on constants.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

__all__ = [
    "Tensor",
    "NonFiniteError",
    "as_tensor",
    "value_of",
    "take",
    "put",
    "gelu",
    "norm",
    "mix_channels",
    "matvec",
    "spectral_conv",
    "stack_last",
]


class NonFiniteError(FloatingPointError):
    """Raised when a forward value becomes NaN or infinite."""


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for i, s in enumerate(shape):
        if s == 1 and grad.shape[i] != 1:
            grad = grad.sum(axis=i, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_backward", "name", "op")
    __array_priority__ = 100.0
    __array_ufunc__ = None  # make ndarray <op> Tensor defer to the reflected Tensor method

    def __init__(self, data, parents=(), backward=None, name=None, op="leaf"):
        self.data = np.asarray(data, dtype=float)
        self.grad = None
        self._parents = parents
        self._backward = backward
        self.name = name
        self.op = op
        if op != "leaf" and not np.all(np.isfinite(self.data)):
            raise NonFiniteError(f"non-finite value produced by '{op}'" + (f" in {name}" if name else ""))

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self.op})"

    def backward(self, grad=None) -> None:
        order: list[Tensor] = []
        seen: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if isinstance(p, Tensor) and id(p) not in seen:
                    stack.append((p, False))
        grads = {id(self): np.ones_like(self.data) if grad is None else np.asarray(grad, dtype=float)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if not isinstance(parent, Tensor) or pg is None:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg

    # arithmetic ---------------------------------------------------------

    def __add__(self, other):
        a, b = self.data, value_of(other)
        sa, sb = a.shape, np.shape(b)
        return Tensor(a + b, (self, other), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)), op="add")

    __radd__ = __add__

    def __neg__(self):
        return Tensor(-self.data, (self,), lambda g: (-g,), op="neg")

    def __sub__(self, other):
        a, b = self.data, value_of(other)
        sa, sb = a.shape, np.shape(b)
        return Tensor(a - b, (self, other), lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)), op="sub")

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self.data, value_of(other)
        sa, sb = a.shape, np.shape(b)
        return Tensor(a * b, (self, other), lambda g: (_unbroadcast(g * b, sa), _unbroadcast(g * a, sb)), op="mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self.data, value_of(other)
        sa, sb = a.shape, np.shape(b)
        out = a / b

        def back(g):
            return _unbroadcast(g / b, sa), _unbroadcast(-g * out / b, sb)

        return Tensor(out, (self, other), back, op="div")

    def __rtruediv__(self, other):
        return as_tensor(other) / self

    def __getitem__(self, idx):
        shape = self.data.shape

        def back(g):
            full = np.zeros(shape)
            np.add.at(full, idx, g)
            return (full,)

        return Tensor(self.data[idx], (self,), back, op="getitem")

    def sum(self, axis=None, keepdims=False):
        shape = self.data.shape

        def back(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return Tensor(self.data.sum(axis=axis, keepdims=keepdims), (self,), back, op="sum")

    def mean(self, axis=None):
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis) / count

    def reshape(self, *shape):
        old = self.data.shape
        return Tensor(self.data.reshape(*shape), (self,), lambda g: (g.reshape(old),), op="reshape")


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def value_of(x):
    return x.data if isinstance(x, Tensor) else x


def _axis_index(ndim: int, axis: int, i):
    idx = [slice(None)] * ndim
    idx[axis] = i
    return tuple(idx)


def take(x, i: int, axis: int = -1):
    """``x`` indexed at position ``i`` along ``axis`` (axis dropped)."""
    if isinstance(x, Tensor):
        return x[_axis_index(x.ndim, axis, i)]
    return np.asarray(x)[_axis_index(np.ndim(x), axis, i)]


def put(x, i: int, value, axis: int = -1):
    """Copy of ``x`` with the slice at ``i`` along ``axis`` replaced by ``value``.

    The replaced entries receive no gradient; ``value`` receives the
    cotangent of the slice it was written into.
    """
    if not isinstance(x, Tensor) and not isinstance(value, Tensor):
        out = np.array(x, dtype=float, copy=True)
        out[_axis_index(out.ndim, axis, i)] = value
        return out
    xd = value_of(x)
    sel = _axis_index(xd.ndim, axis, i)
    out = np.array(xd, dtype=float, copy=True)
    out[sel] = value_of(value)
    vshape = np.shape(value_of(value))

    def back(g):
        gx = g.copy()
        gx[sel] = 0.0
        return gx, _unbroadcast(g[sel], vshape)

    return Tensor(out, (x, value), back, op="put")


_SQRT2 = np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


def gelu(x):
    """Exact GeLU, ``x * Phi(x)`` with the Gaussian CDF."""
    xd = value_of(x)
    cdf = 0.5 * (1.0 + erf(xd / _SQRT2))
    out = xd * cdf
    if not isinstance(x, Tensor):
        return out
    return Tensor(out, (x,), lambda g: (g * (cdf + xd * _INV_SQRT2PI * np.exp(-0.5 * xd * xd)),), op="gelu")


def norm(x, axis=-1):
    """Euclidean norm along ``axis``; the gradient at zero is taken as zero."""
    xd = value_of(x)
    out = np.sqrt(np.sum(xd * xd, axis=axis))
    if not isinstance(x, Tensor):
        return out

    def back(g):
        safe = np.where(out > 0, out, 1.0)
        scale = np.where(out > 0, g / safe, 0.0)
        return (np.expand_dims(scale, axis) * xd,)

    return Tensor(out, (x,), back, op="norm")


def mix_channels(x, w):
    """Pointwise channel map ``y[..., o, n] = sum_i w[i, o] x[..., i, n]``."""
    xd, wd = value_of(x), value_of(w)
    out = np.matmul(wd.T, xd)
    if not isinstance(x, Tensor) and not isinstance(w, Tensor):
        return out

    def back(g):
        gx = np.matmul(wd, g)
        lead = tuple(range(xd.ndim - 2))
        gw = np.tensordot(xd, g, axes=(lead + (xd.ndim - 1,), lead + (g.ndim - 1,)))
        return gx, gw

    return Tensor(out, (x, w), back, op="mix_channels")


def matvec(matrix: np.ndarray, x):
    """``y[..., i] = sum_j matrix[i, j] x[..., j]`` for a constant matrix."""
    xd = value_of(x)
    out = xd @ matrix.T
    if not isinstance(x, Tensor):
        return out
    return Tensor(out, (x,), lambda g: (g @ matrix,), op="matvec")


def stack_last(parts):
    """Stack along a new trailing axis."""
    datas = [value_of(p) for p in parts]
    out = np.stack(datas, axis=-1)
    if not any(isinstance(p, Tensor) for p in parts):
        return out

    def back(g):
        return tuple(g[..., k] for k in range(len(parts)))

    return Tensor(out, tuple(parts), back, op="stack")


def _mode_mix(xh, w):
    """``y[..., o, k] = sum_i x[..., i, k] w[k, i, o]`` as one batched matmul over modes."""
    lead = xh.shape[:-2]
    xs = np.moveaxis(xh.reshape((-1,) + xh.shape[-2:]), -1, 0)  # (k, b, i)
    ys = np.matmul(xs, w)  # (k, b, o)
    return np.moveaxis(ys, 0, -1).reshape(lead + (w.shape[2], xh.shape[-1]))


def spectral_conv(x, weights, transform):
    """Fourier-multiplier layer on the last axis.

    ``weights`` has shape ``(modes, c_in, c_out, 2)`` (real, imaginary). The
    ``transform`` object supplies ``forward`` (real signal to the first
    ``modes`` coefficients), ``inverse`` (those coefficients back to a real
    signal) and their adjoints ``forward_adjoint``/``inverse_adjoint``.
    """
    xd, wd = value_of(x), value_of(weights)
    w = wd[..., 0] + 1j * wd[..., 1]
    xh = transform.forward(xd)  # (..., c_in, modes)
    yh = _mode_mix(xh, w)
    out = transform.inverse(yh)
    if not isinstance(x, Tensor) and not isinstance(weights, Tensor):
        return out

    def back(g):
        gyh = transform.inverse_adjoint(g)
        xs = np.conj(xh).reshape((-1,) + xh.shape[-2:])
        gs = gyh.reshape((-1,) + gyh.shape[-2:])
        gw = np.matmul(np.transpose(xs, (2, 1, 0)), np.transpose(gs, (2, 0, 1)))  # (k, i, o)
        gxh = _mode_mix(gyh, np.conj(np.swapaxes(w, 1, 2)))
        gx = transform.forward_adjoint(gxh)
        return gx, np.stack([gw.real, gw.imag], axis=-1)

    return Tensor(out, (x, weights), back, op="spectral_conv")
