"""Reference solutions, random initial data, solvers and dataset files."""

from .burgers import CFLError, burgers_periodic_fd_solve, stable_dt
from .cavity import LidCavity, PoissonError, lid_cavity_solve
from .dataset import Dataset, bc_residuals, build_dataset, split_sizes
from .exact import (
    burgers_riemann_exact,
    heat_coefficient,
    heat_exact,
    heat_source,
    heat_terms,
    riemann_initial,
    stokes_exact,
    wave_exact,
)
from .grf import grf_eigenvalues, grf_sample, grf_samples
from .io import (
    BadMagicError,
    DatasetFormatError,
    ShapeError,
    TruncatedError,
    VersionError,
    read_dataset,
    write_dataset,
)
from .problems import PROBLEM_TAGS, PROBLEMS, ProblemSpec, problem_spec
from .residuals import RESIDUALS

__all__ = [
    "CFLError", "burgers_periodic_fd_solve", "stable_dt",
    "LidCavity", "PoissonError", "lid_cavity_solve",
    "Dataset", "bc_residuals", "build_dataset", "split_sizes",
    "burgers_riemann_exact", "heat_coefficient", "heat_exact", "heat_source", "heat_terms",
    "riemann_initial", "stokes_exact", "wave_exact",
    "grf_eigenvalues", "grf_sample", "grf_samples",
    "BadMagicError", "DatasetFormatError", "ShapeError", "TruncatedError", "VersionError",
    "read_dataset", "write_dataset",
    "PROBLEM_TAGS", "PROBLEMS", "ProblemSpec", "problem_spec", "RESIDUALS",
]
