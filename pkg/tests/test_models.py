import math

import numpy as np
import pytest

from conftest import central_fd, desk_instance
from scpls import InvalidArgument, InvalidInstance, generate_instance, min_norm_init
from scpls import mb01
from scpls.models import (
    load_instance,
    logistic_constraint,
    lorentzian_constraint,
    lorentzian_norm,
    poisson_constraint,
    power_iteration_lmax,
    save_instance,
    sq_l2_constraint,
)


def test_desk_preset_is_default():
    inst = generate_instance(seed=4)
    assert (inst.q, inst.n, inst.s0) == (72, 256, 8)


def test_sizes_follow_the_multiplier():
    inst = generate_instance(1, seed=0)
    assert (inst.q, inst.n, inst.s0) == (720, 2560, 80)


def test_generation_is_deterministic():
    a = generate_instance(loss="lorentzian", seed=11)
    b = generate_instance(loss="lorentzian", seed=11)
    for name in ("A", "b", "x_orig"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert a.delta == b.delta
    assert not np.array_equal(a.A, generate_instance(seed=12).A)


@pytest.mark.parametrize("loss", ["sq_l2", "lorentzian"])
def test_instance_structure(loss):
    inst = desk_instance(loss, 0.0, 1)
    np.testing.assert_allclose(np.linalg.norm(inst.A, axis=0), 1.0, rtol=1e-14)
    assert np.linalg.matrix_rank(inst.A) == inst.q
    assert np.count_nonzero(inst.x_orig) == inst.s0
    assert 0 < inst.delta < inst.loss_at(np.zeros(inst.q))
    assert inst.gamma == 0.02


def test_delta_rules_reproduce_noise_draws():
    inst = generate_instance(loss="sq_l2", seed=5)
    noise = inst.b - inst.A @ inst.x_orig
    assert inst.delta == pytest.approx(0.5 * (1.1 * np.linalg.norm(noise)) ** 2, rel=1e-10)
    inst = generate_instance(loss="lorentzian", seed=5)
    noise = inst.b - inst.A @ inst.x_orig
    assert inst.delta == pytest.approx(1.1 * lorentzian_norm(noise, 0.02), rel=1e-10)


def test_noise_draw_order():
    # Pin the documented draw sequence: A, support, x_orig values, noise.
    rng = np.random.default_rng(9)
    A = rng.standard_normal((72, 256))
    A /= np.linalg.norm(A, axis=0)
    T = np.sort(rng.choice(256, size=8, replace=False))
    vals = rng.standard_normal(8)
    u = rng.random(72)
    inst = generate_instance(loss="lorentzian", seed=9)
    assert np.array_equal(inst.A, A)
    assert np.array_equal(np.flatnonzero(inst.x_orig), T)
    assert np.array_equal(inst.x_orig[T], vals)
    np.testing.assert_allclose(inst.b - A @ inst.x_orig, 0.01 * np.tan(np.pi * (u - 0.5)), atol=1e-12)


def test_logistic_and_poisson_need_delta():
    with pytest.raises(InvalidArgument):
        generate_instance(loss="logistic", seed=0)
    inst = generate_instance(loss="logistic", seed=0, delta=30.0)
    assert inst.constraint.value(inst.start_point()) < 0
    inst = generate_instance(loss="poisson", seed=0, delta=55.0)
    assert inst.constraint.value(inst.start_point()) < 0
    assert inst.constraint.lipschitz_grad is None


def test_generation_rejects_bad_sizes():
    with pytest.raises(InvalidArgument):
        generate_instance(q=10, n=5)
    with pytest.raises(InvalidArgument):
        generate_instance(0)


def test_trivial_origin_is_rejected():
    with pytest.raises(InvalidInstance):
        generate_instance(loss="sq_l2", seed=0, delta=1e6)


def test_sq_l2_scalar_example():
    con = sq_l2_constraint(np.eye(1), np.zeros(1), 1.0)
    assert con.value(np.array([2.0])) == 1.0
    np.testing.assert_array_equal(con.gradient(np.array([2.0])), [2.0])


@pytest.mark.parametrize("loss", ["sq_l2", "lorentzian"])
def test_zero_residual_gives_minus_delta(loss):
    inst = desk_instance(loss, 0.0, 2)
    x0 = inst.start_point()
    assert inst.constraint.value(x0) == pytest.approx(-inst.delta, abs=1e-10 * inst.delta)
    assert np.linalg.norm(inst.constraint.gradient(x0)) <= 1e-8


def test_lorentzian_scalar_derivative():
    gamma = 0.3
    con = lorentzian_constraint(np.eye(1), np.zeros(1), 1.0, gamma)
    assert con.gradient(np.array([gamma]))[0] == pytest.approx(1.0 / gamma, rel=1e-15)


def test_logistic_and_poisson_at_origin():
    A = np.random.default_rng(0).standard_normal((6, 10))
    b = np.array([1.0, -1.0, 1.0, 1.0, -1.0, -1.0])
    assert logistic_constraint(A, b, 0.5).value(np.zeros(10)) == pytest.approx(6 * math.log(2) - 0.5)
    counts = np.array([0.0, 3.0, 1.0, 2.0, 0.0, 5.0])
    assert poisson_constraint(A, counts, 0.5).value(np.zeros(10)) == pytest.approx(6 - 0.5)


def test_logistic_is_overflow_safe():
    con = logistic_constraint(np.eye(2), np.array([1.0, -1.0]), 1.0)
    x = np.array([1e4, 1e4])
    assert np.isfinite(con.value(x))
    assert np.all(np.isfinite(con.gradient(x)))


def _all_constraints(rng):
    A = rng.standard_normal((12, 20))
    A /= np.linalg.norm(A, axis=0)
    b = rng.standard_normal(12)
    labels = np.sign(rng.standard_normal(12))
    counts = rng.poisson(1.0, 12).astype(float)
    return {
        "sq_l2": sq_l2_constraint(A, b, 0.1),
        "lorentzian": lorentzian_constraint(A, b, 0.1, 0.5),
        "logistic": logistic_constraint(A, labels, 0.1),
        "poisson": poisson_constraint(A, counts, 0.1),
    }


@pytest.mark.parametrize("name", ["sq_l2", "lorentzian", "logistic", "poisson"])
def test_gradients_match_finite_differences(name, rng):
    con = _all_constraints(np.random.default_rng(1))[name]
    for _ in range(25):
        x = 0.5 * rng.standard_normal(20)
        h = 1e-6 * max(1.0, np.linalg.norm(x))
        fd = central_fd(con.value, x, h)
        g = con.gradient(x)
        assert np.linalg.norm(fd - g) <= 1e-6 * max(1.0, np.linalg.norm(g))


@pytest.mark.parametrize("name", ["sq_l2", "lorentzian", "logistic"])
def test_lipschitz_moduli_are_not_exceeded(name, rng):
    con = _all_constraints(np.random.default_rng(2))[name]
    for _ in range(300):
        x1 = rng.standard_normal(20)
        x2 = x1 + 10.0 ** rng.uniform(-4, 0) * rng.standard_normal(20)
        ratio = np.linalg.norm(con.gradient(x1) - con.gradient(x2)) / np.linalg.norm(x1 - x2)
        assert ratio <= con.lipschitz_grad * (1 + 1e-8)


def test_power_iteration_matches_eigensolver(rng):
    for n in (1, 5, 20, 50):
        A = rng.standard_normal((max(1, n // 2), n))
        exact = np.linalg.eigvalsh(A.T @ A)[-1]
        assert power_iteration_lmax(A) == pytest.approx(exact, rel=1e-6)


def test_min_norm_examples():
    np.testing.assert_allclose(min_norm_init(np.array([[1.0, 0.0]]), np.array([2.0])), [2.0, 0.0])
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((9, 4)))
    b = np.arange(1.0, 5.0)
    np.testing.assert_allclose(min_norm_init(Q.T, b), Q @ b, atol=1e-13)
    inst = desk_instance("sq_l2", 0.0, 1)
    x0 = min_norm_init(inst.A, inst.b)
    assert np.linalg.norm(inst.A @ x0 - inst.b) <= 1e-8 * np.linalg.norm(inst.b)


def test_min_norm_rejects_rank_deficiency():
    A = np.ones((2, 4))
    with pytest.raises(InvalidInstance):
        min_norm_init(A, np.ones(2))


def test_mb01_round_trip(tmp_path):
    M = np.random.default_rng(0).standard_normal((3, 5))
    mb01.write_array(tmp_path / "m.mb01", M)
    assert np.array_equal(mb01.read_array(tmp_path / "m.mb01"), M)
    v = np.array([1.5, -0.0, np.pi])
    mb01.write_array(tmp_path / "v.mb01", v)
    assert np.array_equal(mb01.read_vector(tmp_path / "v.mb01"), v)
    raw = (tmp_path / "m.mb01").read_bytes()
    assert raw[:4] == b"MB01" and len(raw) == 4 + 16 + 8 * 15


def test_mb01_rejects_corrupt_files(tmp_path):
    p = tmp_path / "bad.mb01"
    p.write_bytes(b"XXXX" + bytes(16))
    with pytest.raises(InvalidInstance):
        mb01.read_array(p)
    mb01.write_array(p, np.ones(4))
    p.write_bytes(p.read_bytes()[:-1])
    with pytest.raises(InvalidInstance):
        mb01.read_array(p)
    mb01.write_array(p, np.ones((2, 2)))
    with pytest.raises(InvalidInstance):
        mb01.read_vector(p)


def test_instance_save_load_round_trip(tmp_path):
    inst = desk_instance("lorentzian", 1.0, 3)
    save_instance(inst, tmp_path / "inst")
    back = load_instance(tmp_path / "inst")
    assert np.array_equal(back.A, inst.A) and np.array_equal(back.b, inst.b)
    assert np.array_equal(back.x_orig, inst.x_orig)
    assert (back.delta, back.gamma, back.mu, back.loss, back.seed, back.s0) == (
        inst.delta, inst.gamma, inst.mu, inst.loss, inst.seed, inst.s0
    )
