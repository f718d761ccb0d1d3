"""Explicit n-row matrices for oracles and diagnostics.

Nothing in the projected solver path calls these; they exist so that the
closed-form machinery can be checked against straightforward dense algebra.
"""
import numpy as np
import scipy.linalg

from . import opcount


def vandermonde(omega, n):
    """V(omega) with entries exp(j * omega_k), j = 0..n-1."""
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    opcount.record("dense_vandermonde")
    return np.exp(np.arange(n)[:, None] * omega[None, :])


def vandermonde_derivative(omega, n):
    """V'(omega) with entries j * exp(j * omega_k)."""
    j = np.arange(n)[:, None]
    return j * vandermonde(omega, n)


def orthonormal_basis(A, rtol=1e-14):
    """Orthonormal basis for range(A) via a truncated SVD (after column scaling)."""
    A = np.asarray(A, dtype=complex)
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1
    U, s, _ = scipy.linalg.svd(A / scale, full_matrices=False)
    keep = s > rtol * s[0]
    return U[:, keep]


def subspace_basis(mu, n):
    """Orthonormal basis for W(mu) = range V(mu)."""
    return orthonormal_basis(vandermonde(mu, n))


def jacobian_basis(omega, n, a=None):
    """Orthonormal basis for range [V'(omega) diag(a), V(omega)]."""
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    V = vandermonde(omega, n)
    Vp = np.arange(n)[:, None] * V
    if a is not None:
        Vp = Vp * np.asarray(a)[None, :]
    return orthonormal_basis(np.hstack([Vp, V]))


def selection_basis(n, rows):
    """Columns of the identity picking out ``rows``."""
    E = np.zeros((n, len(rows)), dtype=complex)
    E[np.asarray(rows), np.arange(len(rows))] = 1
    return E
