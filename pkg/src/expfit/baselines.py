"""Hankel SVD (HSVD) baselines, dense and FFT-accelerated.

Both variants take the leading ``p`` left singular vectors ``U`` of the
Hankel matrix ``H[j, k] = y[j + k]`` and recover ``exp(omega)`` as the
eigenvalues of ``pinv(U[:-1]) @ U[1:]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg
import scipy.sparse.linalg

from . import opcount
from .kernels import gram_vv
from .subspace import project_data

DENSE_LSTSQ_MAX_N = 2**16
# a dense SVD beyond this length takes minutes and gigabytes
DENSE_HSVD_MAX_N = 8192


class RankDeficientError(ValueError):
    """The data has numerical rank below the requested model order."""


@dataclass(frozen=True)
class HankelSpec:
    """Implicit L x (n - L + 1) Hankel matrix built from ``y``."""

    y: np.ndarray
    L: int

    def __post_init__(self):
        y = np.asarray(self.y, dtype=complex)
        object.__setattr__(self, "y", y)
        if not 1 <= self.L <= y.size:
            raise ValueError("need 1 <= L <= n")

    @property
    def rows(self):
        return self.L

    @property
    def cols(self):
        return self.y.size - self.L + 1

    @property
    def shape(self):
        return (self.rows, self.cols)

    def dense(self):
        return scipy.linalg.hankel(self.y[: self.L], self.y[self.L - 1:])

    def matvec(self, x):
        return hankel_matvec(self, x)

    def rmatvec(self, z):
        return hankel_matvec(self, z, adjoint=True)

    def operator(self):
        return scipy.sparse.linalg.LinearOperator(
            self.shape, matvec=self.matvec, rmatvec=self.rmatvec, dtype=complex)


def _fft_size(m):
    return scipy.fft.next_fast_len(m)


def hankel_matvec(spec, x, adjoint=False):
    """H x (or H^* x) in O(n log n) through a circulant embedding."""
    x = np.asarray(x, dtype=complex)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    L, K = spec.rows, spec.cols
    expect = L if adjoint else K
    if x.shape[0] != expect:
        raise ValueError(f"vector length {x.shape[0]} does not match {expect}")
    y = spec.y
    n = y.size
    opcount.record("hankel_matvec")
    size = _fft_size(n + max(L, K))
    if adjoint:
        # (H^* z)_k = sum_j conj(y_{j+k}) z_j: correlate conj(y) with z
        fy = scipy.fft.fft(np.conj(y), size)
        fz = scipy.fft.fft(x[::-1], size, axis=0)
        out = scipy.fft.ifft(fy[:, None] * fz, axis=0)[L - 1: L - 1 + K]
    else:
        fy = scipy.fft.fft(y, size)
        fx = scipy.fft.fft(x[::-1], size, axis=0)
        out = scipy.fft.ifft(fy[:, None] * fx, axis=0)[K - 1: K - 1 + L]
    return out[:, 0] if squeeze else out


def _default_L(n, L):
    return int(np.ceil(n / 2)) if L is None else int(L)


def _frequencies_from_basis(U):
    # shift invariance: U[1:] ~ U[:-1] A
    A = scipy.linalg.lstsq(U[:-1], U[1:])[0]
    z = scipy.linalg.eigvals(A)
    omega = np.log(z.astype(complex))
    # principal log gives Im in (-pi, pi]; move pi to -pi
    omega = np.where(omega.imag >= np.pi, omega - 2j * np.pi, omega)
    return omega


def amplitudes(data, omega):
    """Least-squares amplitudes for fixed frequencies."""
    data = np.asarray(data, dtype=complex)
    n = data.size
    if omega.size == 0:
        return np.zeros(0, dtype=complex)
    if n <= DENSE_LSTSQ_MAX_N:
        V = np.exp(np.arange(n)[:, None] * omega[None, :])
        return scipy.linalg.lstsq(V, data)[0]
    G = gram_vv(omega, omega, n)
    return scipy.linalg.solve(G, project_data(omega, data), assume_a="her")


def _check_rank(s, p, shape):
    tol = max(shape) * np.finfo(float).eps * s[0]
    if s[0] == 0 or s[p - 1] <= tol:
        raise RankDeficientError(f"data rank is below p = {p}")


def hsvd_dense(data, p, L=None, max_n=DENSE_HSVD_MAX_N):
    """HSVD with a dense SVD of the Hankel matrix (O(n^3))."""
    data = np.asarray(data, dtype=complex)
    if max_n is not None and data.size > max_n:
        raise ValueError(f"dense HSVD is limited to n <= {max_n}")
    if p == 0:
        return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)
    spec = HankelSpec(data, _default_L(data.size, L))
    if p > min(spec.shape):
        raise ValueError("p exceeds the Hankel dimensions")
    opcount.record("dense_hankel")
    U, s, _ = scipy.linalg.svd(spec.dense(), full_matrices=False)
    _check_rank(s, p, spec.shape)
    omega = _frequencies_from_basis(U[:, :p])
    return omega, amplitudes(data, omega)


def hankel_svds(spec, p, tol=1e-16, maxiter=None):
    """Leading ``p`` singular triplets of the implicit Hankel matrix, descending."""
    # ARPACK treats tol = 0 as machine precision
    tol = 0.0 if tol <= np.finfo(float).eps else tol
    try:
        U, s, Vh = scipy.sparse.linalg.svds(spec.operator(), k=p, tol=tol, maxiter=maxiter,
                                            solver="arpack", random_state=0)
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        raise RuntimeError("iterative SVD did not converge") from exc
    order = np.argsort(-s)
    return U[:, order], s[order], Vh[order]


def hsvd_fast(data, p, L=None, ritz_tol=1e-16, maxiter=None):
    """HSVD with a Krylov partial SVD driven by FFT Hankel products."""
    data = np.asarray(data, dtype=complex)
    if p == 0:
        return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)
    spec = HankelSpec(data, _default_L(data.size, L))
    if p >= min(spec.shape):
        raise ValueError("p must be smaller than the Hankel dimensions")
    U, s, _ = hankel_svds(spec, p, ritz_tol, maxiter)
    _check_rank(s, p, spec.shape)
    omega = _frequencies_from_basis(U)
    return omega, amplitudes(data, omega)
