"""Levenberg-Marquardt fitting of exponential sums, full and projected.

The projected driver grows a set of interpolation points between inner
solves.  Points are never discarded, and the inner products ``V(mu_j)^* y``
are cached so that each point costs one O(n) pass over the data, ever.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import opcount
from .partition import default_partition, select_interpolation_points
from .subspace import build_subspace, project_data
from .varpro import (IllConditionedError, VarproProblem, evaluate, real_jacobian,
                     real_residual)

EPS = np.finfo(float).eps


class FitFailure(RuntimeError):
    """A fit could not be completed; ``diagnostics`` says where it stopped."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the Levenberg-Marquardt iteration and the outer loop.

    ``residual_tol`` bounds the relative change of the residual norm between
    accepted iterates, ``step_tol`` the step length relative to the size of
    ``omega``.
    """

    residual_tol: float = 1e-16
    step_tol: float = 1e-16
    max_iters: int = 500
    lambda0: float = 1.0
    lambda_up: float = 10.0
    lambda_down: float = 10.0
    max_outer: int = 20

    def __post_init__(self):
        for name in ("residual_tol", "step_tol", "lambda0", "max_iters", "max_outer"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not (self.lambda_up > 1 and self.lambda_down > 1):
            raise ValueError("lambda factors must exceed 1")


@dataclass
class LMInfo:
    iters: int = 0
    evaluations: int = 0
    rejections: int = 0
    history: list = field(default_factory=list)
    reason: str = ""


@dataclass
class FitResult:
    omega: np.ndarray
    a: np.ndarray
    residual_norm_full: float
    inner_iters: int
    outer_rounds: int
    subspace_dims: list
    elapsed: dict
    method: str = ""
    seeds: list = field(default_factory=list)
    points: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def as_dict(self):
        return {
            "method": self.method,
            "omega_real": self.omega.real.tolist(),
            "omega_imag": self.omega.imag.tolist(),
            "a_real": self.a.real.tolist(),
            "a_imag": self.a.imag.tolist(),
            "residual_norm_full": self.residual_norm_full,
            "inner_iters": self.inner_iters,
            "outer_rounds": self.outer_rounds,
            "subspace_dims": list(self.subspace_dims),
            "elapsed": dict(self.elapsed),
            "num_points": int(len(self.points)),
        }


def _lm_factor(J, r):
    """SVD data of J reused by every damped step at one iterate."""
    U, s, Vh = scipy.linalg.svd(J, full_matrices=False)
    return s, Vh, U.T @ r


def _lm_step(factor, lam):
    # minimizer of ||[J; lam I] s + [r; 0]|| through the SVD of J
    s, Vh, Ur = factor
    filt = s / (s**2 + lam**2)
    return -(Vh.T @ (filt * Ur))


def levenberg_marquardt(problem, omega0, opts=None):
    """Minimize the reduced residual norm over the frequencies.

    Returns ``(omega, info)``; ``info.iters`` counts accepted steps.
    Trial points where the amplitude problem is ill conditioned count as
    rejections.  An ill-conditioned starting point raises
    :class:`IllConditionedError`.
    """
    opts = opts or SolverOptions()
    omega = np.atleast_1d(np.asarray(omega0, dtype=complex)).copy()
    p = omega.size
    info = LMInfo()
    ev = evaluate(problem, omega)
    info.evaluations += 1
    info.history.append(ev.norm)
    lam = opts.lambda0
    need_jac = True
    while info.iters < opts.max_iters:
        if need_jac:
            factor = _lm_factor(real_jacobian(ev), real_residual(ev))
            need_jac = False
        if ev.norm == 0:
            info.reason = "zero residual"
            break
        s = _lm_step(factor, lam)
        step = s[:p] + 1j * s[p:]
        trial = omega + step
        if np.all(trial == omega) or np.linalg.norm(step) <= opts.step_tol * np.linalg.norm(omega):
            info.reason = "step below tolerance"
            break
        try:
            new = evaluate(problem, trial)
            info.evaluations += 1
            ok = new.norm < ev.norm
        except IllConditionedError:
            ok = False
        if ok:
            change = ev.norm - new.norm
            omega, ev = trial, new
            info.iters += 1
            info.history.append(ev.norm)
            lam /= opts.lambda_down
            need_jac = True
            if change <= opts.residual_tol * info.history[-2]:
                info.reason = "residual change below tolerance"
                break
        else:
            info.rejections += 1
            # repeated accepted steps can drive lam to zero; restart growth
            # from a level that still perturbs the singular values of J
            lam = max(lam, EPS * factor[0][0]) * opts.lambda_up
    else:
        info.reason = "max_iters"
    return omega, info


def _fft_seed(residual, taken):
    """Frequency 2 pi i k / n at the largest DFT coefficient not yet used."""
    n = residual.size
    opcount.record("fft")
    F = np.abs(np.fft.fft(residual)) / np.sqrt(n)
    for k in np.argsort(-F, kind="stable"):
        kk = int(k)
        if kk > n // 2:
            kk -= n
        w = 2j * np.pi * kk / n
        if all(abs(np.expm1(w - t)) > 1e-8 for t in taken):
            return w
    raise FitFailure("no unused DFT bin available for seeding")


def full_residual(data, omega, a):
    """y - V(omega) a, an O(n p) evaluation."""
    opcount.record("full_residual")
    j = np.arange(len(data), dtype=float)
    out = np.asarray(data, dtype=complex).copy()
    for w, c in zip(omega, a):
        out -= c * np.exp(w * j)
    return out


def initialize_frequencies(data, p, fitter=None, seeds=None):
    """Greedy FFT initialization.

    Each round adds the frequency at the largest DFT coefficient of the
    current residual, then calls ``fitter(omega) -> (omega, residual)`` to
    re-optimize all frequencies found so far.  Without a fitter the seeds are
    kept as they are and the residual comes from a least-squares amplitude
    fit, so the result is the list of purely imaginary seeds.
    """
    data = np.asarray(data, dtype=complex)
    n = data.size
    if p < 1:
        raise ValueError("p must be at least 1")
    if n <= 4 * p:
        raise ValueError("need n > 4 p")
    if fitter is None:
        def fitter(om):
            ev = evaluate(VarproProblem.full(data), om)
            return om, ev.residual
    omega = np.zeros(0, dtype=complex)
    residual = data
    for _ in range(p):
        w = _fft_seed(residual, omega)
        if seeds is not None:
            seeds.append(w)
        omega, residual = fitter(np.append(omega, w))
    return omega


def _elapsed_add(elapsed, key, t0):
    elapsed[key] = elapsed.get(key, 0.0) + time.perf_counter() - t0


def fit_full(data, p, opts=None):
    """Fit ``p`` exponentials by full variable projection."""
    opts = opts or SolverOptions()
    data = np.asarray(data, dtype=complex)
    problem = VarproProblem.full(data)
    elapsed = {}
    counts = {"iters": 0}
    seeds = []

    def fitter(om):
        t0 = time.perf_counter()
        try:
            om, info = levenberg_marquardt(problem, om, opts)
        except IllConditionedError as exc:
            raise FitFailure(str(exc), {"omega": om}) from exc
        counts["iters"] += info.iters
        ev = evaluate(problem, om)
        _elapsed_add(elapsed, "solve", t0)
        return om, ev.residual

    t0 = time.perf_counter()
    omega = initialize_frequencies(data, p, fitter, seeds)
    total = time.perf_counter() - t0
    ev = evaluate(problem, omega)
    elapsed["init"] = total - elapsed.get("solve", 0.0)
    return FitResult(omega=omega, a=ev.amplitudes, residual_norm_full=ev.norm,
                     inner_iters=counts["iters"], outer_rounds=p, subspace_dims=[],
                     elapsed=elapsed, method="full", seeds=seeds)


class _PointCache:
    """Ordered union of interpolation points with cached V(mu)^* y."""

    def __init__(self, data):
        self.data = data
        self.points = []
        self.products = []
        self._keys = set()

    @staticmethod
    def _key(mu):
        return (float(mu.real) + 0.0, float(mu.imag) + 0.0)

    def add(self, mus):
        new = []
        for m in mus:
            k = self._key(m)
            if k not in self._keys:
                self._keys.add(k)
                new.append(complex(m))
        if new:
            self.points.extend(new)
            self.products.extend(project_data(np.array(new), self.data))
        return len(new)

    def state(self):
        return build_subspace(np.array(self.points), len(self.data),
                              data_products=np.array(self.products))


def fit_projected(data, p, partition=None, opts=None):
    """Fit ``p`` exponentials by projected variable projection.

    The inner iterations only touch arrays whose size is the subspace
    dimension.  O(n) work happens when a new interpolation point is
    projected onto the data, in the FFT seeding, and once per greedy stage
    when the full residual is formed.
    """
    opts = opts or SolverOptions()
    data = np.asarray(data, dtype=complex)
    n = data.size
    partition = partition or default_partition(n)
    cache = _PointCache(data)
    elapsed = {}
    dims = []
    counts = {"iters": 0, "outer": 0}
    seeds = []

    def solve_stage(om):
        ran = False
        for _ in range(opts.max_outer):
            t0 = time.perf_counter()
            added = cache.add(select_interpolation_points(om, partition, n))
            _elapsed_add(elapsed, "projection", t0)
            if ran and not added:
                break
            t0 = time.perf_counter()
            state = cache.state()
            dims.append(state.rank)
            problem = VarproProblem.projected(state)
            try:
                om, info = levenberg_marquardt(problem, om, opts)
            except IllConditionedError as exc:
                raise FitFailure(str(exc), {"omega": om, "points": len(cache.points)}) from exc
            _elapsed_add(elapsed, "solve", t0)
            counts["iters"] += info.iters
            counts["outer"] += 1
            ran = True
        return om, problem

    def fitter(om):
        om, problem = solve_stage(om)
        t0 = time.perf_counter()
        a = evaluate(problem, om).amplitudes
        res = full_residual(data, om, a)
        _elapsed_add(elapsed, "residual", t0)
        return om, res

    t0 = time.perf_counter()
    omega = initialize_frequencies(data, p, fitter, seeds)
    total = time.perf_counter() - t0
    elapsed["init"] = total - sum(elapsed.get(k, 0.0) for k in ("solve", "projection", "residual"))
    state = cache.state()
    a = evaluate(VarproProblem.projected(state), omega).amplitudes
    t1 = time.perf_counter()
    res = full_residual(data, omega, a)
    _elapsed_add(elapsed, "residual", t1)
    return FitResult(omega=omega, a=a, residual_norm_full=float(np.linalg.norm(res)),
                     inner_iters=counts["iters"], outer_rounds=counts["outer"],
                     subspace_dims=dims, elapsed=elapsed, method="projected", seeds=seeds,
                     points=np.array(cache.points))
