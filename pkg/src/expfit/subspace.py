r"""Vandermonde subspaces W(mu) and their efficiency for exponential models.

The basis ``W(mu) = V(mu) R(mu)^{-1}`` is never formed.  ``R(mu)^{-1}`` is
realized from an eigendecomposition of the Gram matrix ``V(mu)^* V(mu)``
(closed form, see :mod:`expfit.kernels`), so projected models and Jacobians
cost O(m p) once the data projection ``V(mu)^* y`` is known.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import opcount
from .kernels import (generalized_geometric_sum, geometric_sum, geometric_sum_derivative,
                      gram_vpvp, gram_vv, gram_vvp, reduce_imag)

EIG_RTOL = 1e-14


@dataclass(frozen=True)
class SubspaceState:
    """Everything needed to project onto W(mu) without touching length-n data.

    Attributes
    ----------
    mu : ndarray
        Interpolation points, shape (m,).
    n : int
        Signal length.
    gram : ndarray
        V(mu)^* V(mu), shape (m, m).
    orthogonalizer : ndarray
        Matrix X of shape (m, rank) with W(mu) = V(mu) X orthonormal.
    projected_data : ndarray or None
        W(mu)^* y, shape (rank,).
    rank : int
        Number of eigenvalues kept after relative truncation.
    data_products : ndarray or None
        The raw products V(mu)^* y, kept for reuse when mu grows.
    """

    mu: np.ndarray
    n: int
    gram: np.ndarray
    orthogonalizer: np.ndarray
    projected_data: np.ndarray | None
    rank: int
    data_products: np.ndarray | None = None

    def project(self, vectors):
        """Map V(mu)^* x (shape (m, ...)) to W(mu)^* x."""
        return self.orthogonalizer.conj().T @ vectors


def check_distinct(mu):
    mu = np.asarray(mu, dtype=complex)
    d = reduce_imag((mu[:, None] - mu[None, :]).ravel()).reshape(len(mu), len(mu))
    same = np.abs(np.expm1(d)) == 0
    np.fill_diagonal(same, False)
    if np.any(same):
        raise ValueError("interpolation points must have distinct exp(mu)")


def project_data(mu, data):
    """V(mu)^* data, the only O(n m) step of the projected method."""
    mu = np.atleast_1d(np.asarray(mu, dtype=complex))
    data = np.asarray(data, dtype=complex)
    ell = np.arange(data.shape[0], dtype=float)
    out = np.empty(len(mu), dtype=complex)
    for j, m in enumerate(mu):
        out[j] = np.dot(np.exp(np.conj(m) * ell), data)
    opcount.record("project_data", len(mu))
    return out


def orthogonalizer(gram, rtol=EIG_RTOL):
    """Return X = U Lambda^{-1/2} over eigenvalues above rtol * max eigenvalue."""
    G = (gram + gram.conj().T) / 2
    lam, U = scipy.linalg.eigh(G)
    keep = lam > rtol * lam[-1]
    return U[:, keep] / np.sqrt(lam[keep])


def build_subspace(mu, n, data=None, data_products=None):
    """Construct the projection state for interpolation points ``mu``.

    Either ``data`` (length n) or precomputed ``data_products = V(mu)^* data``
    may be supplied; the latter avoids all O(n) work.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=complex))
    if n < len(mu):
        raise ValueError("need n >= number of interpolation points")
    check_distinct(mu)
    G = gram_vv(mu, mu, n)
    X = orthogonalizer(G)
    if data_products is None and data is not None:
        if len(data) != n:
            raise ValueError("data length does not match n")
        data_products = project_data(mu, data)
    projected = None if data_products is None else X.conj().T @ data_products
    return SubspaceState(mu=mu, n=n, gram=G, orthogonalizer=X,
                         projected_data=projected, rank=X.shape[1],
                         data_products=data_products)


def projected_model(state, omega, a):
    """W(mu)^* V(omega) a."""
    return state.project(gram_vv(state.mu, omega, state.n)) @ np.asarray(a, dtype=complex)


def projected_vandermonde(state, omega):
    """The pair (W^* V(omega), W^* V'(omega))."""
    VV = state.project(gram_vv(state.mu, omega, state.n))
    VVp = state.project(gram_vvp(state.mu, omega, state.n))
    return VV, VVp


def projected_jacobian(state, omega, a):
    """W(mu)^* [V'(omega) diag(a), V(omega)], shape (rank, 2p)."""
    VV, VVp = projected_vandermonde(state, omega)
    return np.hstack([VVp * np.asarray(a, dtype=complex)[None, :], VV])


def _check_orthonormal(A, name, tol=1e-8):
    err = np.linalg.norm(A.conj().T @ A - np.eye(A.shape[1]))
    if err > tol:
        raise ValueError(f"{name} is not orthonormal (residual {err:.2e})")


def subspace_angles(A, B):
    """Canonical angles between range(A) and range(B), ascending.

    Both arguments must have orthonormal columns.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    _check_orthonormal(A, "A")
    _check_orthonormal(B, "B")
    s = scipy.linalg.svd(A.conj().T @ B, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))


def efficiency(W, J, rank_tol=1e-12):
    """Linearized D-efficiency det(J^* P_W J) / det(J^* J).

    ``W`` is an orthonormal basis; ``J`` any full column rank matrix with no
    more columns than ``W``.
    """
    W = np.asarray(W)
    J = np.asarray(J)
    _check_orthonormal(W, "W")
    if J.shape[1] > W.shape[1]:
        raise ValueError("subspace dimension must be at least the number of columns of J")
    scale = np.linalg.norm(J, axis=0)
    if np.any(scale == 0):
        raise ValueError("J is rank deficient")
    Q, R = np.linalg.qr(J / scale)
    d = np.abs(np.diag(R))
    if d.min() <= rank_tol * d.max():
        raise ValueError("J is rank deficient")
    s = scipy.linalg.svd(W.conj().T @ Q, compute_uv=False)
    return float(np.prod(s**2))


def jacobian_gram(omega1, omega2, n):
    """[V'(w1) V(w1)]^* [V'(w2) V(w2)] in closed form."""
    S2 = gram_vpvp(omega1, omega2, n)
    S1 = gram_vvp(omega1, omega2, n)
    S0 = gram_vv(omega1, omega2, n)
    return np.block([[S2, S1], [S1, S0]])


def _whiten(C):
    # lower-triangular L with C = L L^*, after symmetric diagonal scaling
    d = np.sqrt(np.real(np.diag(C)))
    Cs = C / d[:, None] / d[None, :]
    Cs = (Cs + Cs.conj().T) / 2
    L = np.linalg.cholesky(Cs)
    return d, L


def efficiency_at(mu, omega, n):
    """Efficiency of W(mu) for the exponentials ``omega`` (amplitude free).

    Evaluated entirely from closed-form Gram matrices, so the cost does not
    depend on ``n``.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=complex))
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    X = orthogonalizer(gram_vv(mu, mu, n))
    if X.shape[1] < 2 * len(omega):
        return 0.0
    B = np.hstack([gram_vvp(mu, omega, n), gram_vv(mu, omega, n)])
    d, L = _whiten(jacobian_gram(omega, omega, n))
    # W^* Q_J with Q_J = J diag(1/d) L^{-*}
    K = scipy.linalg.solve_triangular(L.conj(), (X.conj().T @ (B / d[None, :])).T, lower=True).T
    s = scipy.linalg.svd(K, compute_uv=False)
    return float(np.prod(s**2))


def single_efficiency_grid(mu, z, n, X=None):
    """Efficiency of W(mu) for each single exponential in the array ``z``.

    Vectorized over ``z``; used when auditing and building box partitions.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=complex))
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if X is None:
        X = orthogonalizer(gram_vv(mu, mu, n))
    WB1 = X.conj().T @ gram_vvp(mu, z, n)      # (r, N), derivative column
    WB0 = X.conj().T @ gram_vv(mu, z, n)       # (r, N)
    dz = 2 * z.real + 0j
    c22 = np.real(gram_vpvp(np.zeros(1), dz, n))[0]
    c21 = np.real(gram_vvp(np.zeros(1), dz, n))[0]
    c11 = np.real(gram_vv(np.zeros(1), dz, n))[0]
    # scaled Gram of [V'(z), V(z)]: [[1, rho], [rho, 1]]
    s2 = np.sqrt(c22)
    s0 = np.sqrt(c11)
    rho = c21 / (s2 * s0)
    a = WB1 / s2
    b = WB0 / s0
    # M = [a b]^* [a b] (2x2 per point); efficiency = det(M) / (1 - rho^2)
    aa = np.sum(np.abs(a) ** 2, axis=0)
    bb = np.sum(np.abs(b) ** 2, axis=0)
    ab = np.sum(np.conj(a) * b, axis=0)
    det_m = aa * bb - np.abs(ab) ** 2
    return det_m / (1 - rho**2)


def pair_efficiency(z1, z2, n):
    """eta(J(z1), J(z2)) for two single exponentials.

    With 2x2 cross Gram C12 this is |det C12|^2 / (det C11 det C22).
    """
    z1 = complex(z1)
    z2 = complex(z2)
    d = np.array([2 * z1.real, 2 * z2.real, np.conj(z1) + z2])
    s0 = geometric_sum(d, n)
    s1 = geometric_sum_derivative(d, n)
    s2 = generalized_geometric_sum(2, 0, n, d) if n > 1 else np.zeros(3, complex)
    det11 = (s2[0] * s0[0] - s1[0] ** 2).real
    det22 = (s2[1] * s0[1] - s1[1] ** 2).real
    det12 = s2[2] * s0[2] - s1[2] ** 2
    return float(abs(det12) ** 2 / (det11 * det22))
