"""Benchmark drivers behind the command line: fits, timing, precision, audit.

Monte Carlo trials are independent and may run in a process pool whose size
is capped by the ``EXPFIT_THREADS`` environment variable.  Trial ``i`` of a
study with base seed ``s`` always uses seed ``s + i``, so every method sees
the same noise realizations and rows come back in trial order.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

import numpy as np
from scipy.stats import ks_2samp

from .baselines import DENSE_HSVD_MAX_N, RankDeficientError, hsvd_dense, hsvd_fast
from .diagnostics import linearized_covariance, max_frequency_error, precision_sample
from .kernels import geometric_sum, geometric_sum_derivative
from .partition import default_partition, select_interpolation_points
from .signals import MRS_NOISE_SCALE, generate_mrs, mrs_truth
from .solver import FitFailure, fit_full, fit_projected
from .subspace import project_data

METHODS = ("projected", "full", "hsvd", "hsvd-fast")
KERNEL_THRESHOLDS = {"gram_vv": 1e-13, "gram_vvp": 1e-12}
FIT_ERRORS = (FitFailure, RankDeficientError, np.linalg.LinAlgError, ArithmeticError)


def worker_count():
    """Pool size: the CPU count, capped by ``EXPFIT_THREADS`` when set."""
    cpus = os.cpu_count() or 1
    cap = os.environ.get("EXPFIT_THREADS")
    if cap:
        try:
            cap = int(cap)
        except ValueError as exc:
            raise ValueError(f"EXPFIT_THREADS must be an integer, got {cap!r}") from exc
        if cap < 1:
            raise ValueError("EXPFIT_THREADS must be at least 1")
        cpus = min(cpus, cap)
    return cpus


def parallel_map(func, items, workers=None):
    """``[func(x) for x in items]``, spread over a process pool."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))


def run_method(method, data, p, partition=None):
    """Fit with one of :data:`METHODS`.

    Returns ``(omega, a, info)``; ``info`` holds the phase timings and, for
    the NLS methods, the :class:`FitResult` summary.
    """
    t0 = time.perf_counter()
    if method == "projected":
        res = fit_projected(data, p, partition=partition)
    elif method == "full":
        res = fit_full(data, p)
    elif method == "hsvd":
        omega, a = hsvd_dense(data, p)
        return omega, a, {"elapsed": {"total": time.perf_counter() - t0}}
    elif method == "hsvd-fast":
        omega, a = hsvd_fast(data, p)
        return omega, a, {"elapsed": {"total": time.perf_counter() - t0}}
    else:
        raise ValueError(f"unknown method {method!r}")
    info = res.as_dict()
    info["elapsed"]["total"] = time.perf_counter() - t0
    return res.omega, res.a, info


def mrs_covariance(n, noise_scale=MRS_NOISE_SCALE):
    """Linearized full-NLS covariance of the MRS parameters at length ``n``."""
    omega, a = mrs_truth(n)
    return linearized_covariance(omega, a, noise_scale, n=n)


def precision_trial(args):
    """One Monte Carlo trial; ``args = (method, n, seed, covariance)``."""
    method, n, seed, cov = args
    sig = generate_mrs(n, seed=seed)
    row = {"method": method, "n": n, "seed": seed}
    try:
        omega, a, _ = run_method(method, sig.y, sig.p)
    except FIT_ERRORS as exc:
        row.update(status=f"failed: {exc}", standardized_error_sq=math.nan,
                   max_frequency_error=math.nan)
        return row
    row.update(status="ok",
               standardized_error_sq=precision_sample(omega, a, sig.omega, sig.a, cov),
               max_frequency_error=max_frequency_error(omega, sig.omega))
    return row


def precision_study(methods, n, trials, seed=0, workers=None):
    """Standardized squared errors of each method over ``trials`` noisy MRS signals.

    All methods are scored against the linearized full-NLS covariance.
    Returns a list of per-trial rows in (method, trial) order.
    """
    cov = mrs_covariance(n)
    jobs = [(m, n, seed + t, cov) for m in methods for t in range(trials)]
    rows = parallel_map(precision_trial, jobs, workers)
    for i, row in enumerate(rows):
        row["trial"] = i % trials
    return rows


def precision_summary(rows):
    """Per (method, n): successful trial count, failures, mean and quantiles."""
    out = []
    keys = sorted({(r["method"], r["n"]) for r in rows}, key=lambda k: (k[1], METHODS.index(k[0])))
    for method, n in keys:
        vals = np.array([r["standardized_error_sq"] for r in rows
                         if r["method"] == method and r["n"] == n and r["status"] == "ok"])
        failed = sum(1 for r in rows if r["method"] == method and r["n"] == n and r["status"] != "ok")
        q = np.quantile(vals, [0.1, 0.25, 0.5, 0.75, 0.9]) if vals.size else [math.nan] * 5
        out.append({"method": method, "n": n, "trials": int(vals.size), "failed": failed,
                    "mean": float(vals.mean()) if vals.size else math.nan,
                    "q10": q[0], "q25": q[1], "median": q[2], "q75": q[3], "q90": q[4]})
    return out


def kolmogorov_distance(x, y):
    """Two-sample Kolmogorov-Smirnov statistic."""
    return float(ks_2samp(x, y).statistic)


def timing_trial(method, n, seed):
    """Wall-clock phases of one fit; returns ``{phase: seconds}``."""
    sig = generate_mrs(n, seed=seed)
    if method == "vmu-product":
        mu = reference_points(n)
        t0 = time.perf_counter()
        project_data(mu, sig.y)
        return {"total": time.perf_counter() - t0}
    _, _, info = run_method(method, sig.y, sig.p)
    return dict(info["elapsed"])


def reference_points(n, m=44):
    """``m`` interpolation points around the MRS truth, for the V(mu)^* y timing."""
    mu = select_interpolation_points(mrs_truth(n)[0], default_partition(n), n)
    if mu.size < m:
        # pad with distinct points just inside the unit circle
        extra = 1j * np.linspace(-np.pi, np.pi, m - mu.size, endpoint=False) - 1e-3
        mu = np.concatenate([mu, extra])
    return mu[:m]


def timing_study(methods, n_list, trials, seed=0):
    """Rows ``(method, n, trial, phase, seconds)``; trials run one at a time.

    Dense HSVD is skipped above ``DENSE_HSVD_MAX_N``.
    """
    rows = []
    for n in n_list:
        for method in methods:
            if method == "hsvd" and n > DENSE_HSVD_MAX_N:
                continue
            for t in range(trials):
                for phase, sec in timing_trial(method, n, seed + t).items():
                    rows.append({"method": method, "n": n, "trial": t, "phase": phase,
                                 "seconds": sec})
    return rows


def median_times(rows, phase="total"):
    """``{(method, n): median seconds}`` for one phase."""
    groups = {}
    for r in rows:
        if r["phase"] == phase:
            groups.setdefault((r["method"], r["n"]), []).append(r["seconds"])
    return {k: float(np.median(v)) for k, v in groups.items()}


def read_kernel_fixtures(path=None):
    """Records ``(p, n1, n2, delta, reference)`` from a fixture file."""
    if path is None:
        text = resources.files("expfit").joinpath("data/kernel_fixtures.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    recs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        f = line.split()
        if len(f) != 7:
            raise ValueError(f"line {lineno}: expected 7 fields, got {len(f)}")
        recs.append((int(f[0]), int(f[1]), int(f[2]), complex(float(f[3]), float(f[4])),
                     complex(float(f[5]), float(f[6]))))
    if not recs:
        raise ValueError("no fixture records")
    return recs


def kernel_audit(path=None):
    """Worst relative error of each kernel over the fixture grid.

    ``p = 0`` records check :func:`gram_vv` entries, ``p = 1`` records
    :func:`gram_vvp` entries.  Returns ``{kernel: {max_rel_error, worst_delta,
    worst_n, threshold, passed, count}}``.
    """
    recs = read_kernel_fixtures(path)
    report = {}
    for p, name, func in ((0, "gram_vv", geometric_sum), (1, "gram_vvp", geometric_sum_derivative)):
        sel = [r for r in recs if r[0] == p]
        if not sel:
            continue
        if any(r[1] != 0 for r in sel):
            raise ValueError("fixtures must start summation at 0")
        errs = []
        for _, _, n2, d, ref in sel:
            got = complex(func(np.array([d]), n2)[0])
            errs.append(abs(got - ref) / abs(ref) if ref != 0 else abs(got))
        errs = np.array(errs)
        # a NaN result is the worst possible outcome
        i = int(np.argmax(np.where(np.isnan(errs), np.inf, errs)))
        worst = (float(errs[i]), sel[i][3], sel[i][2])
        thr = KERNEL_THRESHOLDS[name]
        report[name] = {"max_rel_error": worst[0], "worst_delta": worst[1], "worst_n": worst[2],
                        "threshold": thr, "passed": bool(np.all(errs <= thr)), "count": len(sel)}
    return report
