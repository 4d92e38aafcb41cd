"""Spectral operator with boundary-corrected Fourier layers.

Layout for a batch ``u0`` of shape ``(B, N)``:

    lift      (u0, x) -> C channels, pointwise affine
    layers    L times: v -> act(Kcorr(v) + b), with K(v) = spectral(v) + W v
    project   C -> 2C -> M, pointwise, GeLU in between
    mollify   optional window exp(-tau / (s (1 - s)) + 4 tau), s in [0, 1]
    assign    per output channel boundary assignment

``Kcorr`` is the layer kernel wrapped in the boundary correction; every
application inside a correction calls the same :class:`LayerKernel`, so the
weights are shared by construction. Hidden layers have no prescribed data
of their own: value conditions keep the layer input's boundary values,
derivative conditions keep its stencil derivative, periodic layers average
the two ends. The last layer has no activation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..boundary.corrections import (
    correct_dirichlet,
    correct_neumann,
    neumann_value,
    periodic_average,
)
from ..boundary.spec import BoundarySpec, fd_coefficients
from ..core.autodiff import Tensor, gelu, mix_channels, put, spectral_conv, take, value_of
from ..core.kernels import DFTModes, FFTModes, KernelModule

__all__ = [
    "ArchConfig",
    "TABLE_DEFAULTS",
    "LayerKernel",
    "init_params",
    "param_names",
    "BoonOperator",
    "mollifier",
]

# retained modes and channel width per problem dimension (including time)
TABLE_DEFAULTS = {"1d": (16, 64), "2d": (12, 32), "3d": (8, 20)}


@dataclass(frozen=True)
class ArchConfig:
    modes: int = 16
    width: int = 64
    layers: int = 4
    out_channels: int = 1
    in_channels: int = 2
    mollifier: bool = False
    backend: str = "dft"

    def __post_init__(self):
        if self.modes < 1 or self.width < 1 or self.layers < 1 or self.out_channels < 1:
            raise ValueError("modes, width, layers and out_channels must be positive")
        if self.backend not in ("fft", "dft"):
            raise ValueError(f"unknown spectral backend {self.backend!r}")

    @classmethod
    def for_class(cls, size_class: str, out_channels: int = 1, **kw) -> "ArchConfig":
        m, c = TABLE_DEFAULTS[size_class]
        return cls(modes=m, width=c, out_channels=out_channels, **kw)


def param_names(arch: ArchConfig) -> list[str]:
    names = ["lift.w", "lift.b"]
    for layer in range(arch.layers):
        names += [f"layer{layer}.spectral", f"layer{layer}.w", f"layer{layer}.b"]
    return names + ["proj1.w", "proj1.b", "proj2.w", "proj2.b"]


def init_params(arch: ArchConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Fresh parameters in a fixed order.

    Fourier multipliers are uniform in ``[0, 1/(C_in C_out))`` for both real
    and imaginary parts; pointwise maps and biases are uniform in
    ``+-1/sqrt(fan_in)``.
    """
    c = arch.width

    def affine(fan_in, fan_out):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, (fan_in, fan_out)), rng.uniform(-bound, bound, fan_out)

    p: dict[str, np.ndarray] = {}
    p["lift.w"], p["lift.b"] = affine(arch.in_channels, c)
    for layer in range(arch.layers):
        p[f"layer{layer}.spectral"] = rng.uniform(0.0, 1.0, (arch.modes, c, c, 2)) / (c * c)
        p[f"layer{layer}.w"], p[f"layer{layer}.b"] = affine(c, c)
    p["proj1.w"], p["proj1.b"] = affine(c, 2 * c)
    p["proj2.w"], p["proj2.b"] = affine(2 * c, arch.out_channels)
    return p


class LayerKernel(KernelModule):
    """Linear part of one layer: truncated Fourier multiplier plus pointwise map."""

    def __init__(self, spectral, pointwise, modes: int, backend: str = "dft"):
        super().__init__()
        self.spectral = spectral
        self.pointwise = pointwise
        self.modes = modes
        self.backend = backend
        self._transforms: dict[int, object] = {}

    def transform(self, n: int):
        t = self._transforms.get(n)
        if t is None:
            t = (DFTModes if self.backend == "dft" else FFTModes)(n, self.modes)
            self._transforms[n] = t
        return t

    def _apply(self, v):
        n = np.shape(value_of(v))[-1]
        return spectral_conv(v, self.spectral, self.transform(n)) + mix_channels(v, self.pointwise)


def mollifier(s: np.ndarray, tau: float = 1e-3) -> np.ndarray:
    """``exp(-tau / (s (1 - s)) + 4 tau)``: 1 at ``s = 1/2``, 0 at both ends."""
    s = np.asarray(s, dtype=float)
    inner = (s > 0) & (s < 1)
    out = np.zeros_like(s)
    ss = s[inner]
    out[inner] = np.exp(-tau / (ss * (1.0 - ss)) + 4.0 * tau)
    return out


class BoonOperator:
    """Forward pass of the operator for a fixed architecture and boundary wiring.

    ``bc=None`` (or ``corrected=False``) gives the plain spectral operator.
    Parameters are passed per call as a name -> array/Tensor mapping so the
    same object serves training (Tensors) and inference (arrays).
    """

    def __init__(self, arch: ArchConfig, bc: BoundarySpec | None, corrected: bool = True,
                 stencil_order: int | None = None, tau: float = 1e-3):
        self.arch = arch
        self.bc = bc
        self.corrected = corrected and bc is not None
        self.order = stencil_order if stencil_order is not None else (bc.order if bc is not None else 2)
        self.tau = tau
        self.last_kernels: list[LayerKernel] = []

    def _check(self, n: int):
        if n < 2 * self.arch.modes:
            raise ValueError(f"resolution N={n} is below 2 x modes = {2 * self.arch.modes}")

    def layer(self, kernel: LayerKernel, v, dx: float):
        """Boundary-corrected kernel output for hidden-layer input ``v`` (before bias)."""
        if not self.corrected:
            return kernel.apply(v)
        bc = self.bc
        if bc.kind == "periodic":
            return periodic_average(kernel.apply(v), *bc.weights)
        sides = bc.sides
        if bc.kind == "dirichlet":
            targets = [take(v, 0 if s == "left" else -1) for s in sides]
            alpha = tuple(targets) if bc.side == "both" else targets[0]
            return correct_dirichlet(kernel, v, alpha, bc.side, sample_ndim=2)
        st = fd_coefficients(self.order, dx, "left")
        targets = [_stencil(v, fd_coefficients(self.order, dx, s)) for s in sides]
        alpha = tuple(targets) if bc.side == "both" else targets[0]
        return correct_neumann(kernel, v, alpha, st, bc.side, sample_ndim=2)

    def forward(self, params, u0, x, boundary=None, extent=(0.0, 1.0)):
        """Predictions ``(B, M, N)`` for inputs ``(B, N)`` on gridpoints ``x``.

        ``boundary`` carries the per-sample, per-channel boundary data needed
        by the final assignment: an array ``(B, M)`` for one side or a
        ``(left, right)`` pair. Periodic and uncorrected models ignore it.
        """
        arch = self.arch
        u0 = np.asarray(u0, dtype=float)
        if u0.ndim != 2:
            raise ValueError(f"expected inputs of shape (B, N), got {u0.shape}")
        batch, n = u0.shape
        self._check(n)
        x = np.asarray(x, dtype=float)
        if x.shape != (n,):
            raise ValueError(f"gridpoints {x.shape} do not match inputs {u0.shape}")
        dx = float(x[1] - x[0])
        a = np.stack([u0, np.broadcast_to(x, (batch, n))], axis=1)
        h = mix_channels(a, params["lift.w"]) + _col(params["lift.b"])
        self.last_kernels = []
        for layer in range(arch.layers):
            kernel = LayerKernel(params[f"layer{layer}.spectral"], params[f"layer{layer}.w"], arch.modes, arch.backend)
            self.last_kernels.append(kernel)
            h = self.layer(kernel, h, dx) + _col(params[f"layer{layer}.b"])
            if layer < arch.layers - 1:
                h = gelu(h)
        h = gelu(mix_channels(h, params["proj1.w"]) + _col(params["proj1.b"]))
        out = mix_channels(h, params["proj2.w"]) + _col(params["proj2.b"])
        if arch.mollifier:
            s = (x - extent[0]) / (extent[1] - extent[0])
            out = out * mollifier(s, self.tau)
        if self.corrected:
            out = self.assign(out, boundary, dx)
        return out

    __call__ = forward

    def assign(self, out, boundary, dx: float):
        """Write the prescribed boundary data into every output channel."""
        bc = self.bc
        if bc.kind == "periodic":
            return periodic_average(out, *bc.weights)
        if boundary is None:
            raise ValueError(f"{bc.kind} model needs boundary data for the final assignment")
        values = dict(zip(bc.sides, boundary if bc.side == "both" else (boundary,)))
        for side, alpha in values.items():
            idx = 0 if side == "left" else -1
            alpha = np.asarray(alpha, dtype=float)
            if bc.kind == "dirichlet":
                out = put(out, idx, alpha)
            else:
                out = put(out, idx, neumann_value(out, fd_coefficients(self.order, dx, side), alpha))
        return out


def _stencil(v, st):
    n = np.shape(value_of(v))[-1]
    pos = st.positions(n)
    acc = st.coefficients[0] * take(v, int(pos[0]))
    for k in range(1, st.width):
        acc = acc + st.coefficients[k] * take(v, int(pos[k]))
    return acc


def _col(b):
    """Bias vector as a column so it broadcasts over the spatial axis."""
    return b.reshape(-1, 1) if isinstance(b, Tensor) else np.asarray(b).reshape(-1, 1)

