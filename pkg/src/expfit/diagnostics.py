"""Checks of the projected least-squares error bounds and precision statistics.

Every bound checker evaluates both sides of an inequality with dense linear
algebra and returns a :class:`BoundReport`.  They are meant for modest ``n``
(dense n x q matrices are formed) and refuse inputs longer than
``MAX_DENSE_N`` unless told otherwise.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .dense import orthonormal_basis, subspace_basis, vandermonde
from .subspace import projected_jacobian, subspace_angles

MAX_DENSE_N = 4096


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one bound check; ``slack = bound - actual``."""

    actual: float
    bound: float
    slack: float
    inputs_digest: str
    applicable: bool = True

    @property
    def holds(self):
        return not self.applicable or self.slack >= -1e-10 * max(1.0, self.bound)


def _digest(*arrays):
    h = hashlib.sha256()
    for x in arrays:
        h.update(np.ascontiguousarray(np.asarray(x, dtype=complex)).tobytes())
    return h.hexdigest()[:16]


def _report(actual, bound, *inputs, applicable=True):
    actual = float(actual)
    bound = float(bound)
    return BoundReport(actual, bound, bound - actual, _digest(*inputs), applicable)


def _check_n(n, limit):
    if limit is not None and n > limit:
        raise ValueError(f"dense diagnostics are capped at n = {limit}")


def model_jacobian(omega, a, n):
    """Dense J = [V'(omega) diag(a), V(omega)] of the model V(omega) a."""
    V = vandermonde(omega, n)
    Vp = np.arange(n)[:, None] * V
    return np.hstack([Vp * np.asarray(a)[None, :], V])


def _angles(A_basis, B_basis):
    return subspace_angles(A_basis, B_basis)


def check_projected_ls_bound(A, b, W_basis):
    """Distance between the full and projected least-squares solutions."""
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    W = np.asarray(W_basis, dtype=complex)
    q = A.shape[1]
    if W.shape[1] < q:
        raise ValueError("subspace must have dimension at least q")
    x = scipy.linalg.lstsq(A, b)[0]
    y = scipy.linalg.lstsq(W.conj().T @ A, W.conj().T @ b)[0]
    s = scipy.linalg.svd(A, compute_uv=False)
    if s[-1] <= 1e-14 * s[0]:
        raise ValueError("A is rank deficient")
    phi_a = _angles(W, orthonormal_basis(A))
    nb = np.linalg.norm(b)
    if nb == 0:
        return _report(np.linalg.norm(x - y), 0.0, A, b, W)
    phi_b = _angles(W, (b / nb)[:, None])
    pq, p1 = phi_a.max(), phi_b.min()
    if np.cos(pq) == 0:
        return _report(np.linalg.norm(x - y), np.inf, A, b, W, applicable=False)
    bound = nb / s[-1] * (np.sin(pq) * np.sin(p1) + np.tan(pq) ** 2 * np.cos(p1))
    return _report(np.linalg.norm(x - y), bound, A, b, W)


def check_projected_normal_bound(A, b, W_basis):
    """Full normal-equation residual of the projected least-squares solution."""
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    W = np.asarray(W_basis, dtype=complex)
    if W.shape[1] < A.shape[1]:
        raise ValueError("subspace must have dimension at least q")
    y = scipy.linalg.lstsq(W.conj().T @ A, W.conj().T @ b)[0]
    actual = np.linalg.norm(A.conj().T @ (A @ y) - A.conj().T @ b)
    UA = orthonormal_basis(A)
    if UA.shape[1] < A.shape[1]:
        raise ValueError("A is rank deficient")
    phi = _angles(UA, W)
    p1, pq = phi.min(), phi.max()
    perp = b - UA @ (UA.conj().T @ b)
    if np.cos(pq) == 0:
        return _report(actual, np.inf, A, b, W, applicable=False)
    bound = np.cos(p1) * np.sin(pq) / np.cos(pq) ** 2 * np.linalg.norm(A, 2) * np.linalg.norm(perp)
    return _report(actual, bound, A, b, W)


def _model_residual(omega, a, data):
    n = len(data)
    return vandermonde(omega, n) @ np.asarray(a, dtype=complex) - np.asarray(data, dtype=complex)


def check_gn_step_bound(omega, a, mu, data, max_n=MAX_DENSE_N):
    """Mismatch of the full and projected Gauss-Newton steps at (omega, a).

    The model is V(omega) a with complex parameters [omega, a]; the subspace
    is W(mu).
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    n = len(data)
    _check_n(n, max_n)
    J = model_jacobian(omega, a, n)
    r = _model_residual(omega, a, data)
    W = subspace_basis(mu, n)
    s = -scipy.linalg.lstsq(J, r)[0]
    sW = -scipy.linalg.lstsq(W.conj().T @ J, W.conj().T @ r)[0]
    actual = np.linalg.norm(s - sW)
    sv = scipy.linalg.svd(J, compute_uv=False)
    pq = _angles(W, orthonormal_basis(J)).max()
    if np.cos(pq) == 0:
        return _report(actual, np.inf, omega, a, mu, data, applicable=False)
    bound = np.linalg.norm(r) / sv[-1] * (np.sin(pq) + np.tan(pq) ** 2)
    return _report(actual, bound, omega, a, mu, data)


def check_inexact_lm_bound(omega, mu, lam, data, a=None, max_n=MAX_DENSE_N):
    """Relative normal-equation error of a projected Levenberg-Marquardt step.

    The step solves the damped problem restricted to W(mu); the bound uses
    the augmented subspace blockdiag(W, I), Jacobian [J; lam I] and residual
    [r; 0].  Amplitudes default to the least-squares fit at ``omega``.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    data = np.asarray(data, dtype=complex)
    n = len(data)
    _check_n(n, max_n)
    if a is None:
        a = scipy.linalg.lstsq(vandermonde(omega, n), data)[0]
    J = model_jacobian(omega, a, n)
    r = _model_residual(omega, a, data)
    q = J.shape[1]
    W = subspace_basis(mu, n)
    g = J.conj().T @ r
    if np.linalg.norm(g) == 0:
        return _report(0.0, 0.0, omega, mu, data, applicable=False)
    Jh = np.vstack([J, lam * np.eye(q)])
    rh = np.concatenate([r, np.zeros(q)])
    Wh = scipy.linalg.block_diag(W, np.eye(q))
    st = -scipy.linalg.lstsq(Wh.conj().T @ Jh, Wh.conj().T @ rh)[0]
    actual = np.linalg.norm(J.conj().T @ (J @ st) + lam**2 * st + g) / np.linalg.norm(g)
    sv = scipy.linalg.svd(Jh, compute_uv=False)
    pq = _angles(Wh, orthonormal_basis(Jh)).max()
    p1 = _angles(orthonormal_basis(Jh), (rh / np.linalg.norm(rh))[:, None]).min()
    if np.cos(pq) == 0 or np.cos(p1) == 0:
        return _report(actual, np.inf, omega, mu, data, applicable=False)
    bound = np.sin(pq) * np.tan(p1) / np.cos(pq) ** 2 * sv[0] / sv[-1]
    return _report(actual, bound, omega, mu, data)


def realify(J):
    """Real lift of a complex-linear map: [Re J, -Im J; Im J, Re J]."""
    J = np.asarray(J, dtype=complex)
    return np.block([[J.real, -J.imag], [J.imag, J.real]])


def lift_parameters(omega, a):
    """Real vector [Re omega, Re a, Im omega, Im a] matching :func:`realify`."""
    theta = np.concatenate([omega, a])
    return np.concatenate([theta.real, theta.imag])


def linearized_covariance(omega, a, noise_sigma, n=None, subspace=None, max_n=MAX_DENSE_N):
    """Covariance of the real-lifted parameter estimate to first order.

    ``noise_sigma`` is the complex noise scale, ``E[g g^*] = noise_sigma**2 I``
    with circular noise, so each real component has variance
    ``noise_sigma**2 / 2``.  With a ``subspace`` the projected estimator is
    described, using the closed-form projected Jacobian.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    if subspace is not None:
        J = projected_jacobian(subspace, omega, a)
    else:
        if n is None:
            raise ValueError("n is required without a subspace")
        _check_n(n, max_n)
        J = model_jacobian(omega, a, n)
    Jr = realify(J)
    M = Jr.T @ Jr
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular normal matrix") from exc
    Linv = scipy.linalg.solve_triangular(L, np.eye(M.shape[0]), lower=True)
    return noise_sigma**2 / 2 * (Linv.T @ Linv)


def standardized_error(estimate, truth, covariance):
    """Squared Mahalanobis length of ``estimate - truth`` (real vectors)."""
    z = np.asarray(estimate, dtype=float) - np.asarray(truth, dtype=float)
    C = np.asarray(covariance, dtype=float)
    try:
        L = np.linalg.cholesky((C + C.T) / 2)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is not positive definite") from exc
    w = scipy.linalg.solve_triangular(L, z, lower=True)
    return float(w @ w)


def match_parameters(omega_est, a_est, omega_true):
    """Reorder estimates to the truth by minimum-cost assignment on |d omega|.

    Returns the reordered (omega, a); when fewer estimates than true
    frequencies exist the missing entries are NaN.
    """
    omega_est = np.atleast_1d(np.asarray(omega_est, dtype=complex))
    a_est = np.atleast_1d(np.asarray(a_est, dtype=complex))
    omega_true = np.atleast_1d(np.asarray(omega_true, dtype=complex))
    cost = np.abs(omega_est[:, None] - omega_true[None, :])
    rows, cols = linear_sum_assignment(cost)
    om = np.full(omega_true.shape, np.nan + 0j)
    aa = np.full(omega_true.shape, np.nan + 0j)
    om[cols] = omega_est[rows]
    aa[cols] = a_est[rows]
    return om, aa


def max_frequency_error(omega_est, omega_true):
    om, _ = match_parameters(omega_est, np.zeros(len(np.atleast_1d(omega_est))), omega_true)
    return float(np.max(np.abs(om - omega_true)))


def precision_sample(omega_est, a_est, omega_true, a_true, covariance):
    """Standardized squared error of an estimate after matching to the truth."""
    om, aa = match_parameters(omega_est, a_est, omega_true)
    if np.any(np.isnan(om)):
        return np.nan
    return standardized_error(lift_parameters(om, aa), lift_parameters(omega_true, a_true),
                              covariance)
