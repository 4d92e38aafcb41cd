"""Boundary-enforcing kernel corrections, their matrix oracles, bounds and metrics."""

from .bounds import bound_dirichlet, bound_neumann, bound_periodic, neumann_bound_terms
from .corrections import (
    EliminatedOperator,
    ZeroPivotError,
    correct,
    correct_2d,
    correct_dirichlet,
    correct_neumann,
    correct_periodic,
    neumann_value,
    periodic_average,
)
from .metrics import boundary_error, boundary_operator, boundary_values
from .oracles import dense_dirichlet, dense_neumann, dense_oracle, dense_periodic
from .spec import BoundarySpec, FDStencil, fd_coefficients

__all__ = [
    "BoundarySpec",
    "FDStencil",
    "fd_coefficients",
    "EliminatedOperator",
    "ZeroPivotError",
    "correct",
    "correct_2d",
    "correct_dirichlet",
    "correct_neumann",
    "correct_periodic",
    "neumann_value",
    "periodic_average",
    "dense_oracle",
    "dense_dirichlet",
    "dense_neumann",
    "dense_periodic",
    "boundary_error",
    "boundary_operator",
    "boundary_values",
    "bound_periodic",
    "bound_dirichlet",
    "bound_neumann",
    "neumann_bound_terms",
]
