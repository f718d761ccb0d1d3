r"""Variable projection residual and Jacobian for sums of exponentials.

With ``V(omega) = Q T`` (thin QR) the reduced residual is
``r = y - Q Q^* y`` and the amplitudes are ``a = T^{-1} Q^* y``.  The same
formulas serve the projected problem after replacing ``V(omega)`` by
``W(mu)^* V(omega)`` and ``y`` by ``W(mu)^* y``.

The residual is not holomorphic in ``omega``; to first order

    dr = A d(omega) + B conj(d(omega)),
    A = -(I - Q Q^*) V'(omega) diag(a),
    B = -Q T^{-*} diag(V'(omega)^* r).

:func:`varpro_jacobian` returns ``A + B``, the derivative along real
perturbations, and :func:`real_jacobian` the exact real lift used by the
solver.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import opcount
from .subspace import SubspaceState, build_subspace, projected_vandermonde

COND_LIMIT = 1e12
COALESCE_TOL = 1e-12


class IllConditionedError(ArithmeticError):
    """Raised when the frequencies are too close for a stable amplitude solve."""


@dataclass(frozen=True)
class VarproProblem:
    """A separable exponential fitting problem in full or projected form.

    Parameters
    ----------
    mode : {"full", "projected"}
    data : ndarray
        ``y`` in full mode, ``W(mu)^* y`` in projected mode.
    n : int
        Signal length.
    state : SubspaceState, optional
        Required in projected mode.
    """

    mode: str
    data: np.ndarray
    n: int
    state: SubspaceState | None = None

    def __post_init__(self):
        if self.mode not in ("full", "projected"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "projected" and self.state is None:
            raise ValueError("projected mode needs a SubspaceState")

    @classmethod
    def full(cls, data):
        data = np.asarray(data, dtype=complex)
        return cls("full", data, len(data))

    @classmethod
    def projected(cls, state):
        if state.projected_data is None:
            raise ValueError("subspace was built without data")
        return cls("projected", state.projected_data, state.n, state)

    @classmethod
    def projected_from_data(cls, mu, data):
        return cls.projected(build_subspace(mu, len(data), data=data))

    def model_matrices(self, omega):
        """(V, V') in the space of this problem."""
        omega = np.asarray(omega, dtype=complex)
        if self.mode == "full":
            opcount.record("full_model")
            j = np.arange(self.n, dtype=float)[:, None]
            V = np.exp(j * omega[None, :])
            return V, j * V
        return projected_vandermonde(self.state, omega)


@dataclass(frozen=True)
class VarproEval:
    """Everything computed at one iterate; reused for the Jacobian."""

    omega: np.ndarray
    residual: np.ndarray
    amplitudes: np.ndarray
    Q: np.ndarray
    T: np.ndarray
    Vp: np.ndarray

    @property
    def norm(self):
        return float(np.linalg.norm(self.residual))


def check_separation(omega):
    omega = np.asarray(omega, dtype=complex)
    if omega.size < 2:
        return
    d = omega[:, None] - omega[None, :]
    gap = np.abs(np.expm1(d))
    np.fill_diagonal(gap, np.inf)
    if gap.min() <= COALESCE_TOL:
        raise IllConditionedError("frequencies have coalesced")


def evaluate(problem, omega):
    """Residual, amplitudes and factors at ``omega``."""
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    if not np.all(np.isfinite(omega)):
        raise IllConditionedError("non-finite frequencies")
    check_separation(omega)
    V, Vp = problem.model_matrices(omega)
    if V.shape[0] < V.shape[1]:
        raise IllConditionedError("fewer rows than exponentials")
    Q, T = scipy.linalg.qr(V, mode="economic")
    # conditioning after column equilibration, so that very different
    # decay rates alone do not trip the check
    scale = np.linalg.norm(V, axis=0)
    if np.any(scale == 0) or not np.all(np.isfinite(V)):
        raise IllConditionedError("degenerate model columns")
    cond = np.linalg.cond(T / scale[None, :])
    if not cond < COND_LIMIT:
        raise IllConditionedError(f"condition number {cond:.3g} exceeds {COND_LIMIT:g}")
    y = problem.data
    c = Q.conj().T @ y
    r = y - Q @ c
    a = scipy.linalg.solve_triangular(T, c)
    return VarproEval(omega, r, a, Q, T, Vp)


def varpro_residual(problem, omega):
    return evaluate(problem, omega).residual


def recover_amplitudes(problem, omega):
    """Least-squares amplitudes ``V(omega)^+ y``."""
    return evaluate(problem, omega).amplitudes


def jacobian_parts(ev):
    """The pair (A, B) with dr = A d(omega) + B conj(d(omega))."""
    Q, T, Vp, a, r = ev.Q, ev.T, ev.Vp, ev.amplitudes, ev.residual
    Vpa = Vp * a[None, :]
    A = -(Vpa - Q @ (Q.conj().T @ Vpa))
    g = Vp.conj().T @ r
    # Q T^{-*} diag(g)
    Tinv_h = scipy.linalg.solve_triangular(T, np.diag(g), trans="C")
    B = -(Q @ Tinv_h)
    return A, B


def varpro_jacobian(problem, omega, ev=None):
    """Derivative of the reduced residual along real frequency perturbations."""
    if ev is None:
        ev = evaluate(problem, omega)
    A, B = jacobian_parts(ev)
    return A + B


def real_jacobian(ev):
    """Real Jacobian of [Re r; Im r] with respect to [Re omega; Im omega]."""
    A, B = jacobian_parts(ev)
    dre = A + B
    dim = 1j * (A - B)
    return np.block([[dre.real, dim.real], [dre.imag, dim.imag]])


def real_residual(ev):
    return np.concatenate([ev.residual.real, ev.residual.imag])
