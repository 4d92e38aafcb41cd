"""Uniform endpoint-inclusive grids and the fields that live on them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Grid", "Field"]


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product grid on ``[x0, x_{N-1}]`` per dimension.

    Both boundary points are gridpoints, so the boundary indices along every
    axis are ``0`` and ``N - 1``.
    """

    n: tuple[int, ...]
    extent: tuple[tuple[float, float], ...] = ()

    def __init__(self, n, extent=None):
        n = (int(n),) if np.isscalar(n) else tuple(int(v) for v in n)
        if len(n) not in (1, 2):
            raise ValueError(f"grids are 1D or 2D, got dims={len(n)}")
        if any(v < 4 for v in n):
            raise ValueError(f"need at least 4 points per dimension, got {n}")
        if extent is None:
            extent = ((0.0, 1.0),) * len(n)
        elif np.ndim(extent) == 1:
            extent = (tuple(float(e) for e in extent),) * len(n)
        extent = tuple((float(a), float(b)) for a, b in extent)
        if len(extent) != len(n):
            raise ValueError("extent must have one interval per dimension")
        if any(b <= a for a, b in extent):
            raise ValueError(f"degenerate extent {extent}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "extent", extent)

    @property
    def dims(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple((b - a) / (m - 1) for (a, b), m in zip(self.extent, self.n))

    def axis(self, d: int = 0) -> np.ndarray:
        a, b = self.extent[d]
        return np.linspace(a, b, self.n[d])

    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*(self.axis(d) for d in range(self.dims)), indexing="ij"))

    def with_resolution(self, n) -> "Grid":
        return Grid(n, self.extent)


@dataclass
class Field:
    """Channel-major float64 samples on a grid: ``values.shape == (channels, *grid.n)``."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape == self.grid.n:
            v = v[None]
        if v.shape[1:] != self.grid.n:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.n}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        self.values = v

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)
