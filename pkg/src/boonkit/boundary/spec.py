"""Boundary descriptions and one-sided finite-difference stencils."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["BoundarySpec", "FDStencil", "fd_coefficients", "check_weights", "KINDS", "SIDES"]

KINDS = ("dirichlet", "neumann", "periodic")
SIDES = ("left", "right", "both")


@dataclass(frozen=True)
class FDStencil:
    """One-sided derivative ``sum_k c_k u[k]`` (left) or ``sum_k c_k u[N-1-k]`` (right).

    ``coefficients[0]`` multiplies the boundary sample itself.
    """

    coefficients: np.ndarray
    order: int
    side: str = "left"

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("stencil needs at least two coefficients")
        if c[0] == 0.0:
            raise ValueError("stencil coefficient c0 must be nonzero")
        if self.side not in ("left", "right"):
            raise ValueError(f"stencil side must be left or right, got {self.side!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def c0(self) -> float:
        return float(self.coefficients[0])

    @property
    def width(self) -> int:
        return self.coefficients.size

    def positions(self, n: int) -> np.ndarray:
        k = np.arange(self.width)
        return k if self.side == "left" else n - 1 - k

    def apply(self, u, axis: int = -1) -> np.ndarray:
        """Stencil derivative of ``u`` at this boundary along ``axis``."""
        u = np.asarray(u, dtype=float)
        n = u.shape[axis]
        if self.width > n:
            raise ValueError(f"stencil of width {self.width} exceeds length {n}")
        picked = np.take(u, self.positions(n), axis=axis)
        return np.tensordot(np.moveaxis(picked, axis, -1), self.coefficients, axes=([-1], [0]))

    def mirrored(self) -> "FDStencil":
        return FDStencil(-self.coefficients, self.order, "right" if self.side == "left" else "left")


_ONE_SIDED = {
    1: np.array([-1.0, 1.0]),
    2: np.array([-1.5, 2.0, -0.5]),
}


def fd_coefficients(order: int, dx: float, side: str = "left") -> FDStencil:
    """One-sided first-derivative stencil of accuracy ``order`` (1 or 2).

    The right-side stencil is the left one with reversed orientation and
    flipped sign, so both return the derivative along +x.
    """
    if order not in _ONE_SIDED:
        raise ValueError(f"unsupported stencil order {order}; use 1 or 2")
    if not dx > 0:
        raise ValueError("dx must be positive")
    c = _ONE_SIDED[order] / dx
    if side == "right":
        c = -c
    elif side != "left":
        raise ValueError(f"side must be left or right, got {side!r}")
    return FDStencil(c, order, side)


BoundaryData = Callable[[float], float] | float | None


@dataclass(frozen=True)
class BoundarySpec:
    """Which condition, where, and (optionally) the prescribed data.

    ``alpha_D``/``alpha_N`` map a side name to either a constant or a
    function of time. They may be left out when the boundary values are
    supplied per sample at call time (the usual case for learned models,
    whose targets carry the data). ``weights`` is the periodic ``(alpha,
    beta)`` pair and ``order`` the Neumann stencil accuracy.
    """

    kind: str
    side: str = "left"
    alpha_D: dict | None = None
    alpha_N: dict | None = None
    weights: tuple[float, float] | None = None
    order: int = 2

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")
        if kind == "periodic":
            if self.alpha_D is not None or self.alpha_N is not None:
                raise ValueError("periodic boundaries take weights, not boundary data")
            w = (0.5, 0.5) if self.weights is None else tuple(float(v) for v in self.weights)
            check_weights(*w)
            object.__setattr__(self, "weights", w)
            object.__setattr__(self, "side", "both")
        else:
            if self.weights is not None:
                raise ValueError(f"{kind} boundaries do not take periodic weights")
            if kind == "dirichlet" and self.alpha_N is not None:
                raise ValueError("dirichlet boundaries take alpha_D only")
            if kind == "neumann" and self.alpha_D is not None:
                raise ValueError("neumann boundaries take alpha_N only")
            if self.order not in _ONE_SIDED:
                raise ValueError(f"unsupported stencil order {self.order}")

    @property
    def sides(self) -> tuple[str, ...]:
        return ("left", "right") if self.side == "both" else (self.side,)

    def stencil(self, dx: float, side: str) -> FDStencil:
        return fd_coefficients(self.order, dx, side)

    def value(self, side: str, t: float) -> float:
        """Prescribed boundary value (Dirichlet) or derivative (Neumann) at time ``t``."""
        data = self.alpha_D if self.kind == "dirichlet" else self.alpha_N
        if data is None or side not in data:
            raise ValueError(f"no boundary data for side {side!r}")
        a = data[side]
        return float(a(t)) if callable(a) else float(a)


def check_weights(alpha: float, beta: float) -> None:
    if not (alpha > 0 and beta > 0):
        raise ValueError(f"periodic weights must be positive, got ({alpha}, {beta})")
    if alpha + beta != 1.0:
        raise ValueError(f"periodic weights must sum to 1, got {alpha} + {beta} = {alpha + beta}")
