import numpy as np
import pytest

from expfit.dense import vandermonde
from expfit.signals import generate_mrs, mrs_truth
from expfit.subspace import build_subspace
from expfit.varpro import (IllConditionedError, VarproProblem, evaluate, real_jacobian,
                           real_residual, recover_amplitudes, varpro_jacobian, varpro_residual)
from instances import random_freqs

TOY_MU = np.array([-0.008 + 0.0014j, -0.008 - 0.0014j])


def noisy_problem(rng, n=200, p=2):
    omega = random_freqs(rng, p, (-0.05, 0))
    y = vandermonde(omega, n) @ (1 + rng.standard_normal(p)) + 0.3 * rng.standard_normal(n)
    return omega, y + 0j


def test_exact_data_has_zero_residual():
    rng = np.random.default_rng(0)
    omega = random_freqs(rng, 3)
    y = vandermonde(omega, 100) @ np.array([1, 2j, -1])
    r = varpro_residual(VarproProblem.full(y), omega)
    assert np.linalg.norm(r) <= 1e-10 * np.linalg.norm(y)


def test_orthogonal_data_is_untouched():
    n = 8
    omega = np.array([0j])
    y = np.exp(2j * np.pi * np.arange(n) / n)
    np.testing.assert_allclose(varpro_residual(VarproProblem.full(y), omega), y, atol=1e-14)


def test_toy_projected_residual_zero_at_truth():
    n = 1000
    y = np.exp(-0.01 * np.arange(n)) + 0j
    prob = VarproProblem.projected_from_data(TOY_MU, y)
    assert np.linalg.norm(varpro_residual(prob, [-0.01])) < 0.05 * np.linalg.norm(y)
    # with -0.01 itself among the points the projected model interpolates
    prob = VarproProblem.projected_from_data(np.append(TOY_MU, -0.01), y)
    assert np.linalg.norm(varpro_residual(prob, [-0.01])) <= 1e-8 * np.linalg.norm(y)


def fd_check(prob, omega, h=1e-7):
    J = varpro_jacobian(prob, omega)
    for k in range(len(omega)):
        e = np.zeros(len(omega))
        e[k] = h
        fd = (varpro_residual(prob, omega + e) - varpro_residual(prob, omega - e)) / (2 * h)
        assert np.linalg.norm(fd - J[:, k]) <= 1e-5 * np.linalg.norm(J)


def test_jacobian_finite_differences_full():
    rng = np.random.default_rng(1)
    omega, y = noisy_problem(rng)
    fd_check(VarproProblem.full(y), omega + 0.003)


def test_jacobian_finite_differences_projected():
    rng = np.random.default_rng(2)
    omega, y = noisy_problem(rng)
    mu = np.concatenate([omega + d for d in (0.01, -0.01 + 0.02j, -0.02 - 0.01j)])
    mu = np.minimum(mu.real, 0) + 1j * mu.imag
    fd_check(VarproProblem.projected_from_data(mu, y), omega + 0.002)


def test_real_jacobian_matches_imaginary_perturbations():
    rng = np.random.default_rng(3)
    omega, y = noisy_problem(rng)
    prob = VarproProblem.full(y)
    ev = evaluate(prob, omega)
    Jr = real_jacobian(ev)
    h = 1e-7
    p = len(omega)
    for k in range(p):
        e = np.zeros(p, dtype=complex)
        e[k] = 1j * h
        r1 = evaluate(prob, omega + e)
        r0 = evaluate(prob, omega - e)
        fd = (real_residual(r1) - real_residual(r0)) / (2 * h)
        assert np.linalg.norm(fd - Jr[:, p + k]) <= 1e-5 * np.linalg.norm(Jr)


def test_zero_data_zero_jacobian():
    prob = VarproProblem.full(np.zeros(50, dtype=complex))
    assert np.all(varpro_jacobian(prob, np.array([-0.1 + 0.2j])) == 0)


def test_gradient_consistency():
    rng = np.random.default_rng(4)
    omega, y = noisy_problem(rng)
    prob = VarproProblem.full(y)
    ev = evaluate(prob, omega)
    g = real_jacobian(ev).T @ real_residual(ev)
    h = 1e-6
    p = len(omega)
    for k in range(2 * p):
        e = np.zeros(p, dtype=complex)
        e[k % p] = h if k < p else 1j * h
        f1 = 0.5 * evaluate(prob, omega + e).norm ** 2
        f0 = 0.5 * evaluate(prob, omega - e).norm ** 2
        assert (f1 - f0) / (2 * h) == pytest.approx(g[k], rel=1e-5, abs=1e-8 * np.abs(g).max())


def test_recover_amplitudes():
    rng = np.random.default_rng(5)
    omega = random_freqs(rng, 3)
    a0 = np.array([1 - 1j, 2, 0.5j])
    y = vandermonde(omega, 120) @ a0
    np.testing.assert_allclose(recover_amplitudes(VarproProblem.full(y), omega), a0, rtol=1e-9)
    np.testing.assert_allclose(recover_amplitudes(VarproProblem.full(np.ones(30)), [0j]), [1])


def test_mrs_amplitudes_at_truth():
    sig = generate_mrs(256, noise_scale=0)
    omega, a = mrs_truth(256)
    got = recover_amplitudes(VarproProblem.full(sig.y), omega)
    np.testing.assert_allclose(got, a, rtol=1e-6)
    assert np.allclose(np.angle(a), 135 * np.pi / 180)


def test_orthogonality_and_norm_reduction():
    rng = np.random.default_rng(6)
    for _ in range(10):
        omega, y = noisy_problem(rng)
        ev = evaluate(VarproProblem.full(y), omega)
        assert np.linalg.norm(ev.Q.conj().T @ ev.residual) <= 1e-10 * np.linalg.norm(y)
        assert ev.norm <= np.linalg.norm(y)


def test_projected_equals_full_with_complete_subspace():
    rng = np.random.default_rng(7)
    n = 24
    omega, y = noisy_problem(rng, n=n)
    mu = -0.001 + 2j * np.pi * (np.arange(n) - n // 2) / n
    proj = VarproProblem.projected(build_subspace(mu, n, data=y))
    assert proj.state.rank == n
    full = VarproProblem.full(y)
    assert evaluate(proj, omega).norm == pytest.approx(evaluate(full, omega).norm, rel=1e-8)


def test_coalesced_frequencies_signal():
    y = np.ones(50, dtype=complex)
    with pytest.raises(IllConditionedError):
        evaluate(VarproProblem.full(y), np.array([-0.1j, -0.1j]))
    with pytest.raises(IllConditionedError):
        evaluate(VarproProblem.full(y), np.array([-0.1j, -0.1j + 1e-13]))
    with pytest.raises(IllConditionedError):
        evaluate(VarproProblem.full(y), np.array([np.nan + 0j]))


def test_problem_validation():
    with pytest.raises(ValueError):
        VarproProblem("other", np.zeros(3), 3)
    with pytest.raises(ValueError):
        VarproProblem("projected", np.zeros(3), 3)
    with pytest.raises(ValueError):
        VarproProblem.projected(build_subspace([0j], 5))
