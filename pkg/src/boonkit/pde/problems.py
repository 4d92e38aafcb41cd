"""Problem descriptions, default parameters and sampling rules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..boundary.spec import BoundarySpec
from ..core.grid import Grid

__all__ = ["PROBLEMS", "PROBLEM_TAGS", "ProblemSpec", "problem_spec", "SIZE_CLASSES"]

PROBLEM_TAGS = {
    "stokes": 1,
    "burgers_riemann": 2,
    "burgers_periodic": 3,
    "heat": 4,
    "wave": 5,
    "lid_cavity": 6,
}
PROBLEMS = tuple(PROBLEM_TAGS)

# fixed physical parameters and sampling ranges
DEFAULT_PARAMS = {
    "stokes": {"U": 2.0, "nu": 0.1, "omega_min": 3.0, "omega_max": 4.0},
    "burgers_riemann": {"nu": 0.1, "uR": 0.0, "w": 0.8, "eps": 0.01},
    "burgers_periodic": {"nu": 0.1},
    "heat": {"k": 0.01, "U": 5.0, "omega_min": 2.01, "omega_max": 3.99},
    "wave": {"c": 1.0, "k_min": 3.0, "k_max": 4.0},
    "lid_cavity": {"re": 100.0, "U_min": 1.0, "U_max": 1.5},
}
T_FINAL = {"stokes": 2.0, "burgers_riemann": 1.2, "burgers_periodic": 1.0, "heat": 2.0, "wave": 2.0, "lid_cavity": 2.0}
SPATIAL_DIMS = {"stokes": 1, "burgers_riemann": 1, "burgers_periodic": 1, "heat": 1, "wave": 2, "lid_cavity": 2}

# (n_data, n_train, N_t, M) per problem dimension including time
SIZE_CLASSES = {
    "1d": (600, 500, 1, 1),
    "2d": (1200, 1000, 200, 25),
    "3d": (1200, 1000, 30, 25),
}


@dataclass(frozen=True)
class ProblemSpec:
    """Everything that determines a dataset besides its size."""

    problem: str
    grid: Grid
    n_t: int
    m_out: int
    t_final: float
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.problem not in PROBLEM_TAGS:
            raise ValueError(f"unknown problem {self.problem!r}; choose from {PROBLEMS}")
        if self.grid.dims != SPATIAL_DIMS[self.problem]:
            raise ValueError(f"{self.problem} needs a {SPATIAL_DIMS[self.problem]}D grid")
        if not 1 <= self.m_out <= self.n_t:
            raise ValueError(f"need 1 <= M <= N_t, got M={self.m_out}, N_t={self.n_t}")
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        merged = dict(DEFAULT_PARAMS[self.problem])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ValueError(f"unknown parameters for {self.problem}: {sorted(unknown)}")
        merged.update({k: float(v) for k, v in self.params.items()})
        for key in ("nu", "re", "c"):
            if key in merged and merged[key] <= 0:
                raise ValueError(f"{key} must be positive, got {merged[key]}")
        if self.problem == "heat" and merged["k"] <= 0:
            raise ValueError("conductivity k must be positive")
        object.__setattr__(self, "params", merged)

    @property
    def tag(self) -> int:
        return PROBLEM_TAGS[self.problem]

    @property
    def size_class(self) -> str:
        if self.grid.dims == 2:
            return "3d"
        return "1d" if self.m_out == 1 and self.n_t == 1 else "2d"

    def times(self) -> np.ndarray:
        """The last ``M`` of ``N_t`` uniformly spaced output times in ``(0, t_final]``."""
        t = self.t_final * np.arange(1, self.n_t + 1) / self.n_t
        return t[-self.m_out:]

    def boundary(self) -> BoundarySpec:
        if self.problem == "stokes":
            return BoundarySpec("dirichlet", side="left")
        if self.problem in ("burgers_riemann", "lid_cavity"):
            return BoundarySpec("dirichlet", side="both")
        if self.problem == "burgers_periodic":
            return BoundarySpec("periodic")
        return BoundarySpec("neumann", side="both")

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "n": list(self.grid.n),
            "extent": [list(e) for e in self.grid.extent],
            "n_t": self.n_t,
            "m_out": self.m_out,
            "t_final": self.t_final,
            "seed": self.seed,
            "params": dict(sorted(self.params.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemSpec":
        return cls(d["problem"], Grid(tuple(d["n"]), tuple(tuple(e) for e in d["extent"])), int(d["n_t"]),
                   int(d["m_out"]), float(d["t_final"]), int(d["seed"]), dict(d["params"]))


def problem_spec(problem: str, resolution: int, multi_step: bool | None = None, seed: int = 0,
                 n_t: int | None = None, m_out: int | None = None, t_final: float | None = None,
                 **params) -> ProblemSpec:
    """Spec with the standard time sampling for the problem's dimension class.

    1D-space problems default to single-step outputs; ``multi_step=True``
    switches to 200 steps with the last 25 kept. 2D-space problems always
    use 30 steps with the last 25 kept.
    """
    if problem not in PROBLEM_TAGS:
        raise ValueError(f"unknown problem {problem!r}; choose from {PROBLEMS}")
    dims = SPATIAL_DIMS[problem]
    if dims == 2:
        cls = "3d"
    else:
        cls = "2d" if multi_step else "1d"
    _, _, nt_default, m_default = SIZE_CLASSES[cls]
    grid = Grid((resolution,) * dims)
    return ProblemSpec(problem, grid, n_t or nt_default, m_out or m_default,
                       T_FINAL[problem] if t_final is None else t_final, seed, params)
