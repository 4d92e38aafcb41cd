import numpy as np
import pytest
from scipy.special import erf

from boonkit.boundary.corrections import correct_dirichlet
from boonkit.boundary.metrics import boundary_error, boundary_values
from boonkit.boundary.spec import BoundarySpec, fd_coefficients
from boonkit.core.autodiff import Tensor
from boonkit.core.grid import Grid
from boonkit.core.kernels import DenseKernel
from boonkit.harness.suites import gradient_check
from boonkit.neural.checkpoint import CheckpointError, checkpoint_bytes, load_checkpoint, save_checkpoint
from boonkit.neural.loss import relative_l2, relative_l2_loss
from boonkit.neural.model import TABLE_DEFAULTS, ArchConfig, BoonOperator, init_params, mollifier, param_names
from boonkit.neural.optim import AdamState, adam_step, step_lr
from boonkit.neural.train import (
    TrainConfig,
    TrainingDiverged,
    evaluate,
    evaluate_resolution_transfer,
    train,
)
from boonkit.pde.dataset import build_dataset
from boonkit.pde.problems import problem_spec

# architecture ------------------------------------------------------------------


def test_table_defaults():
    assert TABLE_DEFAULTS == {"1d": (16, 64), "2d": (12, 32), "3d": (8, 20)}
    a = ArchConfig.for_class("2d", out_channels=25)
    assert (a.modes, a.width, a.layers, a.out_channels) == (12, 32, 4, 25)


def test_param_shapes(rng):
    arch = ArchConfig(modes=6, width=5, out_channels=3)
    p = init_params(arch, rng)
    assert list(p) == param_names(arch)
    assert p["layer0.spectral"].shape == (6, 5, 5, 2)
    assert p["proj1.w"].shape == (5, 10) and p["proj2.w"].shape == (10, 3)
    assert np.all(p["layer2.spectral"] >= 0) and np.all(p["layer2.spectral"] < 1 / 25)


def _gelu(x):
    return 0.5 * x * (1 + erf(x / np.sqrt(2)))


def plain_forward(p, u0, x, layers, modes):
    """Standard spectral operator written directly against numpy's FFT."""
    b, n = u0.shape
    a = np.stack([u0, np.broadcast_to(x, (b, n))], axis=-1)  # (b, n, 2)
    h = a @ p["lift.w"] + p["lift.b"]  # (b, n, c)
    for layer in range(layers):
        w = p[f"layer{layer}.spectral"]
        w = w[..., 0] + 1j * w[..., 1]  # (m, c, c)
        hf = np.fft.rfft(h, axis=1)  # (b, n//2+1, c)
        out = np.zeros_like(hf)
        out[:, :modes] = np.einsum("bki,kio->bko", hf[:, :modes], w)
        y = np.fft.irfft(out, n, axis=1) + h @ p[f"layer{layer}.w"] + p[f"layer{layer}.b"]
        h = _gelu(y) if layer < layers - 1 else y
    h = _gelu(h @ p["proj1.w"] + p["proj1.b"])
    return np.moveaxis(h @ p["proj2.w"] + p["proj2.b"], -1, 1)


@pytest.mark.parametrize("backend", ["dft", "fft"])
def test_baseline_equals_plain_spectral_operator(rng, backend):
    arch = ArchConfig(modes=8, width=6, out_channels=3, backend=backend)
    p = init_params(arch, rng)
    u0 = rng.standard_normal((4, 32))
    x = np.linspace(0, 1, 32)
    ref = plain_forward(p, u0, x, arch.layers, arch.modes)
    for model in (BoonOperator(arch, None), BoonOperator(arch, BoundarySpec("dirichlet"), corrected=False)):
        assert np.max(np.abs(model(p, u0, x) - ref)) < 1e-12


@pytest.mark.parametrize("m", [1, 25])
def test_output_shapes(rng, m):
    arch = ArchConfig(modes=4, width=4, out_channels=m)
    model = BoonOperator(arch, BoundarySpec("dirichlet", side="both"))
    target = rng.standard_normal((3, m, 16))
    out = model(init_params(arch, rng), rng.standard_normal((3, 16)), np.linspace(0, 1, 16),
                boundary_values(target, model.bc, Grid(16)))
    assert out.shape == (3, m, 16)
    assert np.array_equal(out[..., 0], target[..., 0]) and np.array_equal(out[..., -1], target[..., -1])


def test_mollifier_window(rng):
    s = np.linspace(0, 1, 33)
    w = mollifier(s, 1e-3)
    assert w[0] == 0.0 and w[-1] == 0.0 and w[16] == 1.0
    assert w[8] == pytest.approx(np.exp(-1e-3 / (0.25 * 0.75) + 4e-3), rel=1e-15)
    arch = ArchConfig(modes=4, width=4, out_channels=2)
    p = init_params(arch, rng)
    u0 = rng.standard_normal((2, 33))
    plain = BoonOperator(arch, None)(p, u0, s)
    moll = BoonOperator(ArchConfig(modes=4, width=4, out_channels=2, mollifier=True), None)(p, u0, s)
    assert np.array_equal(moll[..., 16], plain[..., 16])
    assert np.allclose(moll, plain * w, rtol=0, atol=1e-15)


@pytest.mark.parametrize("kind", ["dirichlet", "periodic", "neumann"])
def test_untrained_exactness(rng, kind):
    n = 32
    g = Grid(n)
    bc = BoundarySpec(kind, side="both") if kind != "periodic" else BoundarySpec("periodic")
    arch = ArchConfig(modes=8, width=6, out_channels=2, mollifier=True)
    model = BoonOperator(arch, bc)
    for _ in range(5):
        p = init_params(arch, rng)
        target = rng.standard_normal((3, 2, n))
        if kind == "periodic":
            target[..., -1] = target[..., 0]
        out = model(p, rng.standard_normal((3, n)), g.axis(0), boundary_values(target, bc, g))
        if kind == "neumann":
            for side, a in zip(("left", "right"), boundary_values(target, bc, g)):
                assert np.max(np.abs(fd_coefficients(2, g.dx[0], side).apply(out) - a)) <= 1e-10
        else:
            assert boundary_error(out, target, bc, g) == 0.0


def test_layer_kernels_are_shared(rng):
    arch = ArchConfig(modes=4, width=4)
    p = init_params(arch, rng)
    for bc, calls in ((BoundarySpec("dirichlet"), 3), (BoundarySpec("dirichlet", side="both"), 7),
                      (BoundarySpec("periodic"), 1)):
        model = BoonOperator(arch, bc)
        target = rng.standard_normal((2, 1, 16))
        model(p, rng.standard_normal((2, 16)), np.linspace(0, 1, 16), boundary_values(target, bc, Grid(16)))
        for layer, k in enumerate(model.last_kernels):
            assert k.call_counter == calls
            assert k.spectral is p[f"layer{layer}.spectral"] and k.pointwise is p[f"layer{layer}.w"]


def test_periodic_layer_output(rng):
    arch = ArchConfig(modes=4, width=3)
    p = init_params(arch, rng)
    model = BoonOperator(arch, BoundarySpec("periodic"))
    model(p, rng.standard_normal((1, 16)), np.linspace(0, 1, 16))
    v = rng.standard_normal((2, 3, 16))
    v[..., -1] = v[..., 0]
    out = model.layer(model.last_kernels[0], v, 1 / 15)
    assert np.array_equal(out[..., 0], out[..., -1])


def test_resolution_below_modes_rejected(rng):
    arch = ArchConfig(modes=8, width=2)
    with pytest.raises(ValueError):
        BoonOperator(arch, None)(init_params(arch, rng), np.zeros((1, 12)), np.linspace(0, 1, 12))


def test_missing_boundary_data_rejected(rng):
    arch = ArchConfig(modes=4, width=2)
    with pytest.raises(ValueError):
        BoonOperator(arch, BoundarySpec("dirichlet"))(init_params(arch, rng), np.zeros((1, 16)), np.linspace(0, 1, 16))


# gradients -------------------------------------------------------------------------


@pytest.mark.parametrize("kind", [None, "dirichlet", "neumann", "periodic"])
def test_gradients_match_finite_differences(kind):
    err = gradient_check(kind, np.random.default_rng(0), n=32, modes=8, width=4, per_group=3, mollify=kind == "dirichlet")
    assert err <= 1e-5


def test_zero_loss_point_has_zero_gradient(rng):
    arch = ArchConfig(modes=4, width=3)
    model = BoonOperator(arch, BoundarySpec("dirichlet", side="both"))
    p = init_params(arch, rng)
    u0 = rng.standard_normal((2, 16))
    x = np.linspace(0, 1, 16)
    target = model(p, u0, x, (np.zeros((2, 1)), np.ones((2, 1))))
    tp = {k: Tensor(v) for k, v in p.items()}
    relative_l2_loss(model(tp, u0, x, boundary_values(target, model.bc, Grid(16))), target).backward()
    assert all(np.max(np.abs(t.grad)) < 1e-12 for t in tp.values() if t.grad is not None)


def test_correction_changes_gradients_only_near_boundary(rng):
    n = 16
    M = np.diag(np.full(n, 2.0)) + np.diag(np.full(n - 1, -0.5), 1) + np.diag(np.full(n - 1, -0.5), -1)
    K = DenseKernel(M)
    probe = rng.standard_normal(n)
    u = rng.standard_normal(n)
    on, off = Tensor(u.copy()), Tensor(u.copy())
    (correct_dirichlet(K, on, 0.3) * probe).sum().backward()
    (K.apply(off) * probe).sum().backward()
    assert not np.allclose(on.grad[:3], off.grad[:3])
    assert np.array_equal(on.grad[3:], off.grad[3:])


# loss and optimizer ----------------------------------------------------------------


def test_relative_l2_examples(rng):
    t = rng.standard_normal((3, 2, 10))
    assert relative_l2_loss(t, t) == 0.0
    assert relative_l2_loss(2 * t, t) == pytest.approx(1.0, rel=1e-15)
    p = t.copy()
    norms = np.linalg.norm(t.reshape(3, -1), axis=1)
    p[:, 0, 0] += norms
    assert np.allclose(relative_l2(p, t), 1.0, rtol=1e-14)


def test_relative_l2_zero_target_guard():
    assert relative_l2(np.ones((1, 4)), np.zeros((1, 4)))[0] == pytest.approx(2.0 / 1e-12)


def test_tensor_loss_matches_array_loss(rng):
    p, t = rng.standard_normal((2, 4, 7))
    assert float(relative_l2_loss(Tensor(p), t).data) == pytest.approx(relative_l2_loss(p, t), rel=1e-15)


def test_adam_zero_gradient_keeps_params(rng):
    p = {"a": rng.standard_normal(5)}
    st = AdamState.zeros_like(p)
    out = adam_step(p, {"a": np.zeros(5)}, st, 1e-3)
    assert np.array_equal(out["a"], p["a"])


def test_adam_constant_gradient_step_tends_to_lr():
    p = {"a": np.zeros(3)}
    st = AdamState.zeros_like(p)
    g = {"a": np.array([0.5, -2.0, 1e-3])}
    for _ in range(200):
        new = adam_step(p, g, st, 1e-3)
        step = new["a"] - p["a"]
        p = new
    assert np.allclose(np.abs(step), 1e-3, rtol=1e-4)
    assert np.array_equal(np.sign(step), -np.sign(g["a"]))


def test_adam_first_step_is_lr_times_sign():
    p = {"a": np.array([1.0, 1.0])}
    out = adam_step(p, {"a": np.array([3.0, -0.1])}, AdamState.zeros_like(p), 0.01)
    assert np.allclose(out["a"], [0.99, 1.01], rtol=0, atol=1e-9)


def test_step_schedule():
    assert step_lr(1e-3, 49, 50) == 1e-3
    assert step_lr(1e-3, 50, 50) == 0.0005
    assert step_lr(1e-3, 100, 100) == 0.0005
    assert step_lr(1e-3, 120, 50) == 0.00025


def test_train_config_intervals():
    c = TrainConfig()
    assert (c.epochs, c.lr, c.decay_factor) == (500, 1e-3, 0.5)
    assert c.interval("1d") == 50 and c.interval("2d") == 100 and c.interval("3d") == 100


# training ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def heat_small():
    return build_dataset(problem_spec("heat", 32, seed=0), 12)


def test_heat_toy_loss_non_increasing(heat_small):
    cfg = TrainConfig(epochs=10, modes=4, width=8, batch_size=10, lr=1e-3, seed=0)
    hist = train(cfg, heat_small).history
    losses = [r["train_rel_l2"] for r in hist]
    assert all(b <= a for a, b in zip(losses, losses[1:])), losses


def test_training_is_deterministic(heat_small):
    cfg = TrainConfig(epochs=2, modes=4, width=4, batch_size=4, seed=3)
    a, b = train(cfg, heat_small), train(cfg, heat_small)
    strip = lambda h: [{k: v for k, v in r.items() if k != "seconds"} for r in h]
    assert strip(a.history) == strip(b.history)
    assert all(np.array_equal(a.params[k], b.params[k]) for k in a.params)


def test_eval_on_train_matches_history(heat_small):
    res = train(TrainConfig(epochs=2, modes=4, width=4, batch_size=5), heat_small)
    m = evaluate(res.model, res.params, heat_small, "train")
    assert m["rel_l2"] <= res.history[-1]["train_rel_l2"] + 1e-12


def test_neumann_history_boundary(heat_small):
    res = train(TrainConfig(epochs=1, modes=4, width=4, batch_size=5), heat_small)
    m = evaluate(res.model, res.params, heat_small, "test")
    assert m["max_boundary_residual"] <= 1e-8


def test_divergence_aborts_with_history(heat_small):
    with pytest.raises(TrainingDiverged) as info:
        train(TrainConfig(epochs=5, modes=4, width=8, lr=1e4, batch_size=2), heat_small)
    assert isinstance(info.value.history, list)


def test_periodic_transfer_keeps_boundary_exact():
    lo = build_dataset(problem_spec("burgers_periodic", 33, seed=1), 6)
    hi = build_dataset(problem_spec("burgers_periodic", 65, seed=1), 6)
    res = train(TrainConfig(epochs=1, modes=4, width=4, batch_size=5), lo)
    for ds in (lo, hi):
        assert evaluate_resolution_transfer(res.model, res.params, ds)["boundary_l2"] == 0.0
    with pytest.raises(ValueError):
        evaluate_resolution_transfer(res.model, res.params, build_dataset(problem_spec("burgers_periodic", 7), 6))


# checkpoints -----------------------------------------------------------------------


@pytest.fixture
def trained(heat_small):
    return train(TrainConfig(epochs=1, modes=4, width=4, batch_size=5, mollifier=True), heat_small)


def test_checkpoint_roundtrip(tmp_path, trained, heat_small):
    path = save_checkpoint(tmp_path / "m.boonmodl", trained.model, trained.params, trained.adam, {"resolution": 32})
    ck = load_checkpoint(path)
    assert all(np.array_equal(ck.params[k], trained.params[k]) for k in trained.params)
    assert ck.adam.step == trained.adam.step
    assert all(np.array_equal(ck.adam.v[k], trained.adam.v[k]) for k in trained.params)
    assert ck.model.arch == trained.model.arch and ck.model.bc == trained.model.bc
    assert ck.meta["resolution"] == 32
    a = evaluate(ck.model, ck.params, heat_small)
    b = evaluate(trained.model, trained.params, heat_small)
    assert a == b
    assert path.read_bytes() == checkpoint_bytes(ck.model, ck.params, ck.adam, {"resolution": 32})


def test_checkpoint_errors(tmp_path, trained):
    good = checkpoint_bytes(trained.model, trained.params, trained.adam)
    bad = tmp_path / "bad"
    cases = [b"XXXXXXXX" + good[8:], good[:8] + (2).to_bytes(4, "little") + good[12:], good[:40], good[:-3]]
    for raw in cases:
        bad.write_bytes(raw)
        with pytest.raises(CheckpointError):
            load_checkpoint(bad)
    with pytest.raises(FileNotFoundError):
        load_checkpoint(tmp_path / "missing")
