"""Named property checks run by ``boonkit verify``.

Every check takes a random generator and returns ``(ok, details)``. The
runner executes them in registration order and stops at the first failure.
Oracles and solvers are looked up through their modules at call time, so a
monkeypatched oracle is what the check actually sees.
"""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from ..boundary import corrections, oracles
from ..boundary.metrics import boundary_values
from ..boundary.spec import BoundarySpec, fd_coefficients
from ..core.autodiff import Tensor
from ..core.grid import Grid
from ..core.kernels import DenseKernel
from ..neural.loss import relative_l2_loss
from ..neural.model import ArchConfig, BoonOperator, init_params
from ..pde import residuals
from ..pde.burgers import burgers_periodic_fd_solve
from ..pde.cavity import lid_cavity_solve
from ..pde.dataset import bc_residuals, build_dataset
from ..pde.grf import grf_samples
from ..pde.problems import problem_spec
from . import reports

__all__ = ["SUITES", "register", "select", "run_suites", "random_kernel", "ORACLE_RTOL"]

ORACLE_RTOL = 1e-10
GRAD_RTOL = 1e-5

SUITES: list[tuple[str, Callable]] = []


def register(name: str):
    def deco(fn):
        SUITES.append((name, fn))
        return fn

    return deco


def random_kernel(rng, n: int) -> DenseKernel:
    """Dense kernel with a dominant diagonal, so boundary pivots stay away from zero."""
    return DenseKernel(rng.standard_normal((n, n)) / np.sqrt(n) + np.eye(n))


def _rel(a, b) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def _oracle_check(kind: str, rng, sizes=(8, 16, 32, 64), per_size=100):
    worst = 0.0
    for n in sizes:
        st = fd_coefficients(2, 1.0 / (n - 1), "left")
        for _ in range(per_size):
            K = random_kernel(rng, n)
            u0 = rng.standard_normal(n)
            side = ("left", "right", "both")[rng.integers(3)]
            a = (rng.standard_normal(), rng.standard_normal()) if side == "both" else rng.standard_normal()
            if kind == "dirichlet":
                fast = corrections.correct_dirichlet(K, u0, a, side)
                ref = oracles.dense_dirichlet(K, u0, a, side).apply(u0)
            elif kind == "neumann":
                fast = corrections.correct_neumann(K, u0, a, st, side)
                ref = oracles.dense_neumann(K, u0, a, st, side).apply(u0)
            else:
                w = rng.uniform(0.05, 0.95)
                w = (w, 1.0 - w) if w + (1.0 - w) == 1.0 else (0.5, 0.5)
                fast = corrections.correct_periodic(K, u0, *w)
                ref = oracles.dense_periodic(K, *w).apply(u0)
            worst = max(worst, _rel(fast, ref))
    return worst <= ORACLE_RTOL, {"max_rel_err": worst, "tol": ORACLE_RTOL}


@register("dirichlet_oracle_equivalence")
def _(rng):
    return _oracle_check("dirichlet", rng)


@register("neumann_oracle_equivalence")
def _(rng):
    return _oracle_check("neumann", rng)


@register("periodic_oracle_equivalence")
def _(rng):
    return _oracle_check("periodic", rng)


def _call_count(kind: str, rng):
    n = 64
    K = random_kernel(rng, n)
    u0 = rng.standard_normal(n)
    K.reset_counter()
    if kind == "dirichlet":
        corrections.correct_dirichlet(K, u0, 1.0)
    elif kind == "neumann":
        corrections.correct_neumann(K, u0, 1.0, fd_coefficients(2, 1.0 / (n - 1)))
    else:
        corrections.correct_periodic(K, u0)
    want = {"dirichlet": 3, "neumann": 3, "periodic": 1}[kind]
    return K.call_counter == want, {"calls": K.call_counter, "expected": want}


for _kind in ("dirichlet", "neumann", "periodic"):
    register(f"{_kind}_call_count")(lambda rng, k=_kind: _call_count(k, rng))


def _model(kind: str, out_channels=2, width=4, modes=8):
    bc = BoundarySpec(kind, side="both") if kind != "periodic" else BoundarySpec("periodic")
    return BoonOperator(ArchConfig(modes=modes, width=width, out_channels=out_channels, mollifier=True), bc)


def _model_exactness(kind: str, rng, draws=50, n=32):
    grid = Grid((n,))
    x = grid.axis(0)
    model = _model(kind)
    worst = 0.0
    for _ in range(draws):
        p = init_params(model.arch, rng)
        u0 = rng.standard_normal((3, n))
        target = rng.standard_normal((3, model.arch.out_channels, n))
        bnd = boundary_values(target, model.bc, grid)
        out = model(p, u0, x, bnd)
        if kind == "dirichlet":
            worst = max(worst, float(np.max(np.abs(out[..., 0] - target[..., 0]))),
                        float(np.max(np.abs(out[..., -1] - target[..., -1]))))
        elif kind == "periodic":
            worst = max(worst, float(np.max(np.abs(out[..., 0] - out[..., -1]))))
        else:
            for side, a in zip(("left", "right"), bnd):
                worst = max(worst, float(np.max(np.abs(fd_coefficients(2, grid.dx[0], side).apply(out) - a))))
    tol = 0.0 if kind != "neumann" else 1e-10
    return worst <= tol, {"max_violation": worst, "tol": tol}


for _kind in ("dirichlet", "neumann", "periodic"):
    register(f"{_kind}_model_exactness")(lambda rng, k=_kind: _model_exactness(k, rng))


for _kind in ("periodic", "dirichlet", "neumann"):
    def _bound(rng, k=_kind):
        r = reports.bound_trials(k, 1000, rng)
        return r["ok"], {key: v for key, v in r.items() if key != "ok"}

    register(f"{_kind}_bound_" + ("inequality" if _kind == "neumann" else "equality"))(_bound)


def gradient_check(kind: str | None, rng, n=32, modes=16, width=8, out_channels=2, per_group=6,
                   eps=1e-6, mollify=False) -> float:
    """Worst per-group relative error between reverse-mode and central-difference gradients.

    The target is the model output plus small noise, so the loss sits near a
    minimum where round-off in the loss value does not swamp the difference
    quotient. Error per group is ``||fd - grad|| / ||fd||`` over sampled entries.
    """
    grid = Grid((n,))
    x = grid.axis(0)
    bc = None if kind is None else (BoundarySpec("periodic") if kind == "periodic" else BoundarySpec(kind, side="both"))
    model = BoonOperator(ArchConfig(modes=modes, width=width, out_channels=out_channels, mollifier=mollify), bc)
    p = init_params(model.arch, rng)
    u0 = rng.standard_normal((2, n))
    rough = rng.standard_normal((2, out_channels, n))
    bnd = boundary_values(rough, bc, grid) if model.corrected else None
    target = model(p, u0, x, bnd) + 1e-3 * rng.standard_normal((2, out_channels, n))
    bnd = boundary_values(target, bc, grid) if model.corrected else None

    def loss(params):
        return relative_l2_loss(model(params, u0, x, bnd), target)

    tp = {k: Tensor(v) for k, v in p.items()}
    lt = relative_l2_loss(model(tp, u0, x, bnd), target)
    lt.backward()
    worst = 0.0
    for k, v in p.items():
        sel = rng.choice(v.size, min(v.size, per_group), replace=False)
        fd, an = [], []
        for j in sel:
            q = dict(p)
            flat = v.copy().ravel()
            flat[j] += eps
            q[k] = flat.reshape(v.shape)
            up = loss(q)
            flat[j] -= 2 * eps
            q[k] = flat.reshape(v.shape)
            down = loss(q)
            fd.append((up - down) / (2 * eps))
            an.append(tp[k].grad.ravel()[j])
        fd, an = np.array(fd), np.array(an)
        worst = max(worst, float(np.linalg.norm(fd - an) / max(np.linalg.norm(fd), 1e-300)))
    return worst


for _kind in ("dirichlet", "neumann", "periodic"):
    def _grad(rng, k=_kind):
        w = gradient_check(k, rng, width=4, per_group=3, mollify=True)
        return w <= GRAD_RTOL, {"max_rel_err": w, "tol": GRAD_RTOL}

    register(f"{_kind}_gradient")(_grad)


for _prob in ("stokes", "burgers_riemann", "heat", "wave"):
    def _res(rng, prob=_prob):
        r = residuals.RESIDUALS[prob](rng, n_points=50)
        return r <= 1e-5, {"max_rel_residual": r, "tol": 1e-5}

    register(f"{_prob}_pde_residual")(_res)


@register("periodic_burgers_self_convergence")
def _(rng):
    n_ref = 257
    u_ref0 = grf_samples(n_ref, 1, rng)[0]
    ref = burgers_periodic_fd_solve(u_ref0, 0.1, 1, 0.5)[-1]
    errs = []
    for n in (33, 65, 129):
        step = (n_ref - 1) // (n - 1)
        u = burgers_periodic_fd_solve(u_ref0[::step], 0.1, 1, 0.5)[-1]
        errs.append(float(np.max(np.abs(u - ref[::step]))))
    ok = errs[0] > errs[1] > errs[2]
    return ok, {"errors": errs}


@register("lid_cavity_divergence")
def _(rng):
    worst = 0.0
    for re in (10.0, 100.0):
        _, _, state, _ = lid_cavity_solve(33, re, 1.0, n_t=2, t_final=0.2, return_state=True)
        worst = max(worst, max(state.divergence))
    return worst < 1e-8, {"max_divergence": worst, "tol": 1e-8}


@register("dataset_boundary_residuals")
def _(rng):
    out = {}
    ok = True
    for prob, res, tol in (("stokes", 64, 0.0), ("burgers_riemann", 64, 0.0), ("burgers_periodic", 65, 0.0),
                           ("heat", 64, 1e-2)):
        ds = build_dataset(problem_spec(prob, res, seed=int(rng.integers(1 << 30))), 12)
        r = float(np.max(bc_residuals(ds)))
        out[prob] = r
        ok &= r <= tol
    return bool(ok), out


def select(pattern: str | None):
    if not pattern:
        return list(SUITES)
    return [(name, fn) for name, fn in SUITES if pattern in name]


def run_suites(pattern: str | None = None, seed: int = 0, emit=print) -> tuple[bool, list[dict]]:
    """Run matching suites in order; stop at the first failure."""
    chosen = select(pattern)
    results = []
    if not chosen:
        return False, [{"name": None, "ok": False, "details": {"error": f"no suite matches {pattern!r}"}}]
    for name, fn in chosen:
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        try:
            ok, details = fn(rng)
        except Exception as exc:  # a crashing suite is a failed suite
            ok, details = False, {"error": f"{type(exc).__name__}: {exc}"}
        row = {"name": name, "ok": bool(ok), "seconds": round(time.perf_counter() - t0, 3), "details": details}
        results.append(row)
        emit(f"{'PASS' if ok else 'FAIL'} {name} {details}")
        if not ok:
            return False, results
    return True, results
