"""Grids, fields, kernel modules, FFTs and the small autodiff engine."""

from .autodiff import NonFiniteError, Tensor, as_tensor, value_of
from .grid import Field, Grid
from .kernels import DenseKernel, DFTModes, FFTModes, KernelModule, SpectralKernel, materialize

__all__ = [
    "Grid", "Field", "KernelModule", "DenseKernel", "SpectralKernel", "FFTModes", "DFTModes", "materialize",
    "Tensor", "NonFiniteError", "as_tensor", "value_of",
]
