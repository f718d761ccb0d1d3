import numpy as np
import pytest
import scipy.linalg

from expfit.dense import (jacobian_basis, orthonormal_basis, selection_basis, subspace_basis,
                          vandermonde)
from expfit.subspace import (build_subspace, efficiency, efficiency_at, pair_efficiency,
                             project_data, projected_jacobian, projected_model,
                             single_efficiency_grid, subspace_angles)
from instances import random_freqs, random_orthonormal, efficiency_instance

TOY_MU = np.array([-0.008 + 0.0014j, -0.008 - 0.0014j])


def dense_w(state):
    return vandermonde(state.mu, state.n) @ state.orthogonalizer


def test_single_point_constant_data():
    st = build_subspace([0j], 16, data=np.ones(16))
    np.testing.assert_allclose(st.projected_data, [4], rtol=1e-14)
    assert st.rank == 1


def test_projection_is_contraction():
    rng = np.random.default_rng(0)
    y = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    st = build_subspace([-0.1 + 0.3j, -0.2 - 1j], 64, data=y)
    assert np.linalg.norm(st.projected_data) <= np.linalg.norm(y)


def test_toy_subspace_orthonormal():
    st = build_subspace(TOY_MU, 1000)
    assert st.rank == 2
    W = dense_w(st)
    assert np.linalg.norm(W.conj().T @ W - np.eye(2)) <= 1e-10
    # same range as a dense QR of V(mu)
    Q = scipy.linalg.qr(vandermonde(TOY_MU, 1000), mode="economic")[0]
    np.testing.assert_allclose(subspace_angles(W, Q), 0, atol=1e-7)


def test_build_subspace_errors():
    with pytest.raises(ValueError):
        build_subspace([0.1j, 0.1j], 10)
    with pytest.raises(ValueError):
        build_subspace(1j * np.arange(5) / 10, 4)
    # exp(mu) equal after wrapping the imaginary part
    with pytest.raises(ValueError):
        build_subspace([0.5j, 0.5j + 2j * np.pi], 10)


def test_rank_truncation_for_clustered_points():
    mu = -0.01 + 1e-9j * np.arange(6)
    st = build_subspace(mu, 100)
    assert st.rank < 6
    W = dense_w(st)
    assert np.linalg.norm(W.conj().T @ W - np.eye(st.rank)) < 1e-8


def test_data_products_reuse():
    rng = np.random.default_rng(1)
    y = rng.standard_normal(200) + 0j
    mu = random_freqs(rng, 4)
    a = build_subspace(mu, 200, data=y)
    b = build_subspace(mu, 200, data_products=project_data(mu, y))
    np.testing.assert_array_equal(a.projected_data, b.projected_data)


def test_projected_model_interpolates():
    rng = np.random.default_rng(2)
    n = 300
    mu = random_freqs(rng, 5)
    omega = mu[[1, 3]]
    a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    st = build_subspace(mu, n)
    f = vandermonde(omega, n) @ a
    assert np.linalg.norm(projected_model(st, omega, a)) == pytest.approx(np.linalg.norm(f),
                                                                          rel=1e-10)
    assert np.all(projected_model(st, omega, np.zeros(2)) == 0)


def test_projected_products_match_dense():
    rng = np.random.default_rng(3)
    n = 512
    mu = random_freqs(rng, 6)
    omega = random_freqs(rng, 2)
    a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    st = build_subspace(mu, n)
    W = dense_w(st)
    V = vandermonde(omega, n)
    Vp = np.arange(n)[:, None] * V
    np.testing.assert_allclose(projected_model(st, omega, a), W.conj().T @ V @ a, atol=1e-10)
    J = projected_jacobian(st, omega, a)
    dense = W.conj().T @ np.hstack([Vp * a, V])
    assert np.linalg.norm(J - dense) <= 1e-10 * np.linalg.norm(dense)
    assert np.all(projected_jacobian(st, omega, np.zeros(2))[:, :2] == 0)


def test_projected_jacobian_finite_differences():
    rng = np.random.default_rng(4)
    n = 400
    st = build_subspace(random_freqs(rng, 6), n)
    omega = random_freqs(rng, 2)
    ones = np.ones(2)
    h = 1e-6
    J = projected_jacobian(st, omega, ones)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (projected_model(st, omega + e, np.eye(2)[k])
              - projected_model(st, omega - e, np.eye(2)[k])) / (2 * h)
        assert np.linalg.norm(fd - J[:, k]) <= 1e-6 * np.linalg.norm(J[:, k])


def test_subspace_angles_basics():
    rng = np.random.default_rng(5)
    A = random_orthonormal(rng, 30, 3)
    np.testing.assert_allclose(subspace_angles(A, A), 0, atol=1e-7)
    I = np.eye(4, dtype=complex)
    np.testing.assert_allclose(subspace_angles(I[:, :2], I[:, 2:]), np.pi / 2)
    with pytest.raises(ValueError):
        subspace_angles(2 * A, A)


def test_subspace_angles_projector_formulation():
    rng = np.random.default_rng(6)
    A = random_orthonormal(rng, 100, 6)
    B = random_orthonormal(rng, 100, 3)
    ang = subspace_angles(A, B)
    # sin of the angles are the singular values of (I - P_A) B
    s = scipy.linalg.svd(B - A @ (A.conj().T @ B), compute_uv=False)
    np.testing.assert_allclose(np.sort(np.sin(ang)), np.sort(s), atol=1e-8)


def test_efficiency_extremes():
    rng = np.random.default_rng(7)
    W = random_orthonormal(rng, 40, 5)
    J = W[:, :2] @ (rng.standard_normal((2, 2)) + 0j)
    assert efficiency(W, J) == pytest.approx(1, abs=1e-10)
    I = np.eye(6, dtype=complex)
    assert efficiency(I[:, :3], I[:, 3:5]) == 0
    with pytest.raises(ValueError):
        efficiency(W, np.zeros((40, 2)))


def test_toy_interpolation_efficiency():
    eta = efficiency(subspace_basis(TOY_MU, 1000), jacobian_basis([-0.01], 1000))
    assert eta == pytest.approx(0.957, abs=0.005)
    assert efficiency_at(TOY_MU, [-0.01], 1000) == pytest.approx(eta, abs=1e-8)


def test_toy_row_selection_efficiency():
    n = 1000
    eta = efficiency(selection_basis(n, np.arange(0, n, 10)), jacobian_basis([-0.01], n))
    assert eta == pytest.approx(0.0119, abs=0.002)


def test_efficiency_angle_identity():
    rng = np.random.default_rng(8)
    for _ in range(20):
        n, omega, mu = efficiency_instance(rng)
        W = subspace_basis(mu, n)
        Q = jacobian_basis(omega, n)
        if W.shape[1] < Q.shape[1]:
            continue
        prod = np.prod(np.cos(subspace_angles(W, Q)) ** 2)
        assert efficiency(W, Q) == pytest.approx(prod, abs=1e-9)


def test_efficiency_independent_of_amplitudes():
    rng = np.random.default_rng(9)
    n = 150
    omega = random_freqs(rng, 2)
    W = subspace_basis(random_freqs(rng, 8), n)
    a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    np.testing.assert_allclose(subspace_angles(W, jacobian_basis(omega, n, a)),
                               subspace_angles(W, jacobian_basis(omega, n)), atol=1e-7)


def test_efficiency_at_matches_dense():
    rng = np.random.default_rng(10)
    for _ in range(10):
        n, omega, mu = efficiency_instance(rng)
        W = subspace_basis(mu, n)
        Q = jacobian_basis(omega, n)
        if W.shape[1] < Q.shape[1]:
            continue
        assert efficiency_at(mu, omega, n) == pytest.approx(efficiency(W, Q), abs=1e-8)


def test_single_efficiency_grid_matches_scalar():
    rng = np.random.default_rng(11)
    mu = random_freqs(rng, 4)
    z = random_freqs(rng, 7)
    grid = single_efficiency_grid(mu, z, 256)
    for zi, g in zip(z, grid):
        assert g == pytest.approx(efficiency_at(mu, [zi], 256), abs=1e-9)


def test_pair_efficiency_matches_dense():
    z1, z2 = -0.03 + 0.2j, -0.05 + 0.25j
    n = 300
    dense = efficiency(jacobian_basis([z1], n), jacobian_basis([z2], n))
    assert pair_efficiency(z1, z2, n) == pytest.approx(dense, abs=1e-9)
    assert pair_efficiency(z1, z1, n) == pytest.approx(1, abs=1e-9)


def test_largest_angle_triangle_inequality():
    # the sound replacement for the product-form nearby bound
    rng = np.random.default_rng(12)
    for _ in range(50):
        n, omega, mu = efficiency_instance(rng)
        W = subspace_basis(mu, n)
        J1 = jacobian_basis(omega, n)
        J2 = jacobian_basis(omega + 0.01 * random_freqs(rng, omega.size, (-1, 1)), n)
        if W.shape[1] < J1.shape[1]:
            continue
        lhs = subspace_angles(W, J1).max()
        rhs = subspace_angles(W, J2).max() + subspace_angles(J1, J2).max()
        assert lhs <= rhs + 1e-10


def test_product_nearby_bound_counterexample():
    # eta(W, J2) eta(J1, J2) <= eta(W, J1) fails for lines in C^2
    I = np.eye(2, dtype=complex)
    W, J1 = I[:, :1], I[:, 1:]
    J2 = np.array([[1], [1]], dtype=complex) / np.sqrt(2)
    assert efficiency(W, J2) * efficiency(J1, J2) == pytest.approx(0.25)
    assert efficiency(W, J1) == 0


def test_orthonormal_basis_drops_dependent_columns():
    A = np.array([[1, 2], [1, 2], [0, 0]], dtype=complex)
    assert orthonormal_basis(A).shape == (3, 1)
