import hashlib
import struct

import numpy as np
import pytest

from boonkit.boundary.spec import fd_coefficients
from boonkit.core import fft
from boonkit.core.grid import Grid
from boonkit.pde import residuals
from boonkit.pde.burgers import CFLError, burgers_periodic_fd_solve, stable_dt
from boonkit.pde.cavity import lid_cavity_solve
from boonkit.pde.dataset import bc_residuals, build_dataset, split_sizes
from boonkit.pde.exact import (
    burgers_riemann_exact,
    heat_coefficient,
    heat_exact,
    heat_terms,
    stokes_exact,
    wave_exact,
)
from boonkit.pde.grf import grf_eigenvalues, grf_sample, grf_samples
from boonkit.pde.io import (
    BadMagicError,
    ShapeError,
    TruncatedError,
    VersionError,
    dataset_bytes,
    read_dataset,
    write_dataset,
)
from boonkit.pde.problems import problem_spec

# closed-form solutions -----------------------------------------------------------


def test_stokes_boundary_and_initial():
    t = np.linspace(0, 2, 9)
    assert np.allclose(stokes_exact(0.0, t, 2.0, 3.5, 0.1), 2.0 * np.cos(3.5 * t), atol=1e-15)
    y = np.linspace(0, 1, 7)
    k = np.sqrt(3.5 / 0.2)
    assert np.allclose(stokes_exact(y, 0.0, 2.0, 3.5, 0.1), 2.0 * np.exp(-k * y) * np.cos(k * y), atol=1e-15)
    with pytest.raises(ValueError):
        stokes_exact(y, 0.0, 2.0, 3.5, 0.0)


def test_riemann_center_and_limits():
    uL, uR, nu, t = 0.8, 0.0, 0.05, 0.6
    s = 0.5 * (uL + uR)
    assert burgers_riemann_exact(0.5 + s * t, t, uL, uR, nu) == pytest.approx(0.4, abs=1e-15)
    assert burgers_riemann_exact(-50.0, t, uL, uR, nu) == pytest.approx(uL, abs=1e-12)
    assert burgers_riemann_exact(50.0, t, uL, uR, nu) == pytest.approx(uR, abs=1e-12)
    with pytest.raises(ValueError):
        burgers_riemann_exact(0.0, 0.0, uL, uR, -1.0)


@pytest.mark.parametrize("name", ["stokes", "burgers_riemann", "heat", "wave"])
def test_pde_residuals(name):
    assert residuals.RESIDUALS[name](np.random.default_rng(5), n_points=40) < 1e-5


def test_heat_flux_conditions():
    n = 257
    x = np.linspace(0, 1, n)
    t = np.array([0.3, 0.9, 1.7])
    u = heat_exact(x, t, 0.01, 5.0, 2.5)
    dx = x[1] - x[0]
    left = fd_coefficients(2, dx, "left").apply(u)
    right = fd_coefficients(2, dx, "right").apply(u)
    # second-order stencil: error ~ dx^2 * |u'''|
    assert np.max(np.abs(left)) < 1e-3
    assert np.max(np.abs(right - 5.0 * np.sin(np.pi * t))) < 1e-3


def test_heat_series_approaches_initial_data():
    x = np.linspace(0, 1, 401)
    target = np.cos(2.5 * np.pi * x)
    errs = [np.sqrt(np.mean((heat_exact(x, 0.0, 0.01, 5.0, 2.5, n_terms=m) - target) ** 2)) for m in (10, 100, 1000)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_heat_resonant_coefficient():
    assert heat_coefficient(3, 3.0) == 1.0
    assert heat_coefficient(2, 3.0) == pytest.approx(0.0, abs=1e-15)
    assert abs(heat_coefficient(2, 2.5)) > 0.1


def test_heat_truncation_rule():
    assert heat_terms(0.0, 0.01, 2.5) == 2000
    m = heat_terms(0.01, 0.01, 2.5)
    assert 1 < m < 10_000
    assert 2 / (np.pi * (m - 2.5)) * np.exp(-0.01 * (m * np.pi) ** 2 * 0.01) < 1e-14


def test_wave_initial_and_faces():
    n = 65
    x = np.linspace(0, 1, n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    assert np.allclose(wave_exact(X, Y, 0.0, 1.0, 3.0), 3.0 * np.cos(np.pi * X) * np.cos(np.pi * Y))
    u = wave_exact(X, Y, 0.37, 1.0, 3.0)
    dx = x[1] - x[0]
    for axis in (0, 1):
        for side in ("left", "right"):
            assert np.max(np.abs(fd_coefficients(2, dx, side).apply(u, axis=axis))) < 3.0 * np.pi**3 * dx**2


# random fields -------------------------------------------------------------------


def test_grf_periodic_and_deterministic():
    g = Grid(65)
    a = grf_sample(g, 11).values
    b = grf_sample(g, 11).values
    assert a[0, 0] == a[0, -1]
    assert np.array_equal(a, b)


def test_grf_mode_variance():
    n, samples = 65, 10_000
    u = grf_samples(n, samples, np.random.default_rng(0))
    m = n - 1
    c = fft.rfft(u[:, :-1]) / m
    k = np.arange(1, 6)
    emp = np.mean(np.abs(c[:, k]) ** 2, axis=0)
    assert np.all(np.abs(emp / grf_eigenvalues(k) - 1) < 0.05)
    assert np.allclose(grf_eigenvalues(k), 625 * (4 * np.pi**2 * k**2 + 25) ** -2.0)


# periodic Burgers solver ---------------------------------------------------------


def test_burgers_constant_is_preserved():
    u = burgers_periodic_fd_solve(np.full(33, 0.7), 0.1, 4, 0.5)
    assert np.max(np.abs(u - 0.7)) < 1e-14


def test_burgers_mass_conserved():
    u0 = grf_samples(65, 2, np.random.default_rng(2))
    _, mass = burgers_periodic_fd_solve(u0, 0.1, 3, 0.3, return_mass=True)
    assert np.max(np.abs(np.diff(mass, axis=0))) < 1e-8


def test_burgers_self_convergence():
    n_ref = 257
    u0 = grf_samples(n_ref, 1, np.random.default_rng(9))[0]
    ref = burgers_periodic_fd_solve(u0, 0.1, 1, 0.5)[-1]
    errs = []
    for n in (33, 65, 129):
        step = (n_ref - 1) // (n - 1)
        errs.append(np.max(np.abs(burgers_periodic_fd_solve(u0[::step], 0.1, 1, 0.5)[-1] - ref[::step])))
    assert errs[0] > errs[1] > errs[2]
    # refinement gains at least a factor ~2 each time
    assert errs[1] / errs[0] < 0.6 and errs[2] / errs[1] < 0.6


def test_burgers_errors():
    u0 = grf_samples(33, 1, np.random.default_rng(0))[0]
    with pytest.raises(CFLError, match="dt <="):
        burgers_periodic_fd_solve(u0, 0.1, 1, 0.1, dt=1.0)
    with pytest.raises(ValueError):
        burgers_periodic_fd_solve(np.arange(8.0), 0.1, 1, 0.1)
    with pytest.raises(ValueError):
        burgers_periodic_fd_solve(u0, 0.0, 1, 0.1)
    assert stable_dt(np.zeros(8), 0.1, 0.1) == pytest.approx(0.4 * 0.01 / 0.2)


# lid-driven cavity -----------------------------------------------------------------


def test_cavity_divergence_and_walls():
    w0, snaps, state, solver = lid_cavity_solve(17, 100.0, 1.2, n_t=3, t_final=0.3, return_state=True)
    assert snaps.shape == (3, 17, 17) and w0.shape == (17, 17)
    assert max(state.divergence) < 1e-8
    U, V = state.U, state.V
    # normal velocity is stored on the walls themselves (ghost columns excluded)
    assert np.all(U[0, 1:-1] == 0.0) and np.all(U[-1, 1:-1] == 0.0)
    assert np.all(V[1:-1, 0] == 0.0) and np.all(V[1:-1, -1] == 0.0)
    # tangential velocity enforced through ghost cells: wall averages
    assert np.max(np.abs(0.5 * (U[1:-1, 0] + U[1:-1, 1]))) < 1e-14
    assert np.max(np.abs(0.5 * (U[1:-1, -1] + U[1:-1, -2]) - 1.2)) < 1e-14
    assert np.max(np.abs(0.5 * (V[0, 1:-1] + V[1, 1:-1]))) < 1e-14
    assert np.max(np.abs(0.5 * (V[-1, 1:-1] + V[-2, 1:-1]))) < 1e-14


def test_cavity_approaches_steady_state():
    _, snaps = lid_cavity_solve(17, 10.0, 1.0, n_t=12, t_final=3.0)
    d = [np.linalg.norm(snaps[j] - snaps[j - 1]) for j in range(4, 12)]
    assert all(b < a for a, b in zip(d, d[1:]))


def test_cavity_errors():
    with pytest.raises(ValueError):
        lid_cavity_solve(17, 0.0, 1.0, n_t=1)
    with pytest.raises(ValueError):
        lid_cavity_solve(17, 10.0, -1.0, n_t=1)


# datasets ----------------------------------------------------------------------


def test_split_sizes():
    assert split_sizes(600) == (500, 100)
    assert split_sizes(1200) == (1000, 200)
    assert split_sizes(120) == (100, 20)


def test_default_sizes_1d():
    ds = build_dataset(problem_spec("stokes", 32, seed=1))
    assert ds.n == 600 and ds.train_idx.size == 500 and ds.test_idx.size == 100
    assert ds.outputs.shape == (600, 1, 32)
    assert not set(ds.train_idx) & set(ds.test_idx)


def test_default_sizes_multistep():
    spec = problem_spec("stokes", 16, multi_step=True)
    assert spec.n_t == 200 and spec.m_out == 25
    ds = build_dataset(spec)
    assert ds.n == 1200 and ds.train_idx.size == 1000 and ds.outputs.shape == (1200, 25, 16)


def test_spec_2d_sizes():
    spec = problem_spec("lid_cavity", 17)
    assert (spec.n_t, spec.m_out, spec.size_class) == (30, 25, "3d")


@pytest.mark.parametrize("problem,n", [("stokes", 64), ("burgers_riemann", 64), ("burgers_periodic", 65)])
def test_generated_samples_satisfy_their_conditions(problem, n):
    ds = build_dataset(problem_spec(problem, n, seed=3), 12)
    assert np.max(bc_residuals(ds)) <= 1e-10


def test_heat_samples_flux_within_stencil_error():
    ds = build_dataset(problem_spec("heat", 128, seed=3), 12)
    assert np.max(bc_residuals(ds)) < 1e-2


def test_wave_samples_zero_flux():
    ds = build_dataset(problem_spec("wave", 33, seed=3, n_t=4, m_out=2), 4)
    assert np.max(bc_residuals(ds)) < 3.5 * 4 * np.pi**3 / 32**2


def test_sampling_ranges():
    ds = build_dataset(problem_spec("burgers_riemann", 32, seed=0), 50)
    uL = np.array([q["uL"] for q in ds.samples])
    assert np.all(np.abs(uL - 0.8) < 0.1)
    st = build_dataset(problem_spec("stokes", 32, seed=0), 50)
    om = np.array([q["omega"] for q in st.samples])
    assert np.all((om >= 3) & (om <= 4))


def test_bad_parameters_rejected():
    with pytest.raises(ValueError):
        problem_spec("burgers_riemann", 64, nu=-1.0)
    with pytest.raises(ValueError):
        problem_spec("heat", 64, nu=0.1)
    with pytest.raises(ValueError):
        problem_spec("navier", 64)


def test_dataset_deterministic_bytes():
    a = dataset_bytes(build_dataset(problem_spec("burgers_periodic", 33, seed=4), 6))
    b = dataset_bytes(build_dataset(problem_spec("burgers_periodic", 33, seed=4), 6))
    assert hashlib.sha256(a).hexdigest() == hashlib.sha256(b).hexdigest()


def test_worker_count_does_not_change_data():
    spec = problem_spec("lid_cavity", 9, seed=2, n_t=2, m_out=1, t_final=0.1)
    a = build_dataset(spec, 3, workers=1)
    b = build_dataset(spec, 3, workers=3)
    assert np.array_equal(a.outputs, b.outputs)


# file format ---------------------------------------------------------------------


@pytest.fixture
def small(tmp_path):
    ds = build_dataset(problem_spec("stokes", 16, seed=7), 6)
    return ds, write_dataset(tmp_path / "d.boondata", ds)


def test_io_roundtrip(small):
    ds, path = small
    back = read_dataset(path)
    assert np.array_equal(back.inputs, ds.inputs) and np.array_equal(back.outputs, ds.outputs)
    assert np.array_equal(back.train_idx, ds.train_idx) and back.spec == ds.spec
    assert path.read_bytes()[:8] == b"BOONDATA"


def test_io_bad_magic(small, tmp_path):
    _, path = small
    raw = bytearray(path.read_bytes())
    raw[:8] = b"NOTADATA"
    bad = tmp_path / "bad"
    bad.write_bytes(bytes(raw))
    with pytest.raises(BadMagicError):
        read_dataset(bad)


def test_io_version(small, tmp_path):
    _, path = small
    raw = bytearray(path.read_bytes())
    raw[8:12] = struct.pack("<I", 2)
    bad = tmp_path / "bad"
    bad.write_bytes(bytes(raw))
    with pytest.raises(VersionError):
        read_dataset(bad)


def test_io_truncated_header(small, tmp_path):
    _, path = small
    bad = tmp_path / "bad"
    bad.write_bytes(path.read_bytes()[:14])
    with pytest.raises(TruncatedError):
        read_dataset(bad)


def test_io_shape_mismatch(small, tmp_path):
    _, path = small
    raw = bytearray(path.read_bytes())
    # bump the declared sample count: header no longer matches the payload
    off = 8 + 4 + 4 + 4 + 4
    n = struct.unpack_from("<I", raw, off)[0]
    struct.pack_into("<I", raw, off, n + 3)
    bad = tmp_path / "bad"
    bad.write_bytes(bytes(raw))
    with pytest.raises(ShapeError):
        read_dataset(bad)
