"""Command line entry point: ``expfit <command> ...``.

Commands
--------
fit              fit one signal with a chosen method, write JSON or CSV
bench-timing     wall-clock phases per method and length (CSV)
bench-precision  Monte Carlo standardized errors on noisy MRS signals (CSV)
build-partition  rebuild a box partition ladder and write it to a file
kernel-audit     compare the Gram kernels against high-precision fixtures
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import bench
from .diagnostics import max_frequency_error
from .partition import TAIL_CONSTANT, build_partition, load_partition, save_partition
from .signals import generate_mrs, generate_toy

NEAR_DUPLICATE_TOL = 1e-6
NEGLIGIBLE_AMPLITUDE = 1e-8


class InputError(ValueError):
    """Bad command line input."""


def _parse_kv(text):
    out = {}
    for item in filter(None, text.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def load_input(spec, seed):
    """Signal from ``mrs:n=..,noise=..``, ``toy:n=..,noise_var=..`` or a file.

    Files are ``.npy`` complex arrays or text with columns ``re im``.
    Returns ``(y, truth_omega or None)``.
    """
    kind, _, rest = spec.partition(":")
    if kind in ("mrs", "toy"):
        kv = _parse_kv(rest)
        s = int(kv.pop("seed", seed))
        try:
            if kind == "mrs":
                sig = generate_mrs(int(kv.pop("n", 256)), seed=s,
                                   noise_scale=float(kv.pop("noise", 15.0)))
            else:
                sig = generate_toy(int(kv.pop("n", 1000)), seed=s,
                                   noise_var=float(kv.pop("noise_var", 0.01)))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        if kv:
            raise InputError(f"unknown generator options: {', '.join(kv)}")
        return sig.y, sig.omega
    try:
        if spec.endswith(".npy"):
            y = np.load(spec).astype(complex).ravel()
        else:
            cols = np.loadtxt(spec, ndmin=2)
            if cols.shape[1] != 2:
                raise InputError("text input needs two columns: re im")
            y = cols[:, 0] + 1j * cols[:, 1]
    except OSError as exc:
        raise InputError(f"cannot read {spec}: {exc}") from exc
    return y, None


def _write_rows(path, rows, fields, header):
    fh = open(path, "w", newline="") if path and path != "-" else sys.stdout
    try:
        fh.write(f"# {header}\n")
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _min_separation(omega):
    if len(omega) < 2:
        return math.inf
    d = np.abs(np.expm1(omega[:, None] - omega[None, :]))
    np.fill_diagonal(d, np.inf)
    return float(d.min())


def cmd_fit(args):
    y, truth = load_input(args.input, args.seed)
    partition = load_partition(args.partition) if args.partition else None
    method = {"hsvd-dense": "hsvd"}.get(args.method, args.method)
    try:
        omega, a, info = bench.run_method(method, y, args.p, partition=partition)
    except bench.FIT_ERRORS as exc:
        print(f"fit failed ({args.method}): {exc}", file=sys.stderr)
        return 2
    sep = _min_separation(omega)
    out = {
        "seed": args.seed,
        "method": args.method,
        "n": int(y.size),
        "p": args.p,
        "omega_real": omega.real.tolist(),
        "omega_imag": omega.imag.tolist(),
        "a_real": a.real.tolist(),
        "a_imag": a.imag.tolist(),
        "residual_norm": float(np.linalg.norm(y - np.exp(np.arange(y.size)[:, None] * omega) @ a)),
        "elapsed": info["elapsed"],
        "min_separation": sep,
        "near_duplicate": bool(sep < NEAR_DUPLICATE_TOL),
        "negligible_amplitude": bool(a.size and np.abs(a).min() <= NEGLIGIBLE_AMPLITUDE
                                     * np.abs(a).max()),
    }
    for key in ("inner_iters", "outer_rounds", "subspace_dims"):
        if key in info:
            out[key] = info[key]
    if truth is not None and len(omega) >= len(truth):
        out["max_frequency_error"] = max_frequency_error(omega, truth)
    if out["near_duplicate"]:
        print("warning: two fitted frequencies nearly coincide; p may be too large",
              file=sys.stderr)
    if out["negligible_amplitude"]:
        print("warning: a fitted amplitude is negligible; p may be too large", file=sys.stderr)
    if args.out and args.out.endswith(".csv"):
        rows = [{"k": k, "omega_real": w.real, "omega_imag": w.imag, "a_real": c.real,
                 "a_imag": c.imag} for k, (w, c) in enumerate(zip(omega, a))]
        _write_rows(args.out, rows, list(rows[0]) if rows else ["k"],
                    f"expfit fit method={args.method} seed={args.seed} "
                    f"residual_norm={out['residual_norm']:.17g}")
    else:
        text = json.dumps(out, indent=2)
        if args.out and args.out != "-":
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)
    return 0


def _n_list(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if ".." in tok:
            lo, hi = (t.strip() for t in tok.split(".."))
            if not (lo.startswith("2^") and hi.startswith("2^")):
                raise InputError(f"ranges are dyadic, like 2^8..2^12; got {tok!r}")
            out.extend(2**k for k in range(int(lo[2:]), int(hi[2:]) + 1))
        elif tok.startswith("2^"):
            out.append(2 ** int(tok[2:]))
        else:
            out.append(int(tok))
    return out


def cmd_bench_timing(args):
    rows = bench.timing_study(args.methods, _n_list(args.n_list), args.trials, args.seed)
    _write_rows(args.out, rows, ["method", "n", "trial", "phase", "seconds"],
                f"expfit bench-timing seed={args.seed} trials={args.trials}")
    for (method, n), sec in sorted(bench.median_times(rows).items(), key=lambda kv: kv[0][::-1]):
        print(f"{method:>12s} n={n:<8d} median {sec:.4g} s", file=sys.stderr)
    return 0


def cmd_bench_precision(args):
    t0 = time.perf_counter()
    rows = []
    for n in _n_list(args.n_list):
        rows.extend(bench.precision_study(args.methods, n, args.trials, args.seed))
    fields = ["method", "n", "trial", "seed", "status", "standardized_error_sq",
              "max_frequency_error"]
    _write_rows(args.out, rows, fields,
                f"expfit bench-precision seed={args.seed} trials={args.trials}")
    summary = bench.precision_summary(rows)
    if args.summary:
        _write_rows(args.summary, summary, list(summary[0]),
                    f"expfit bench-precision summary seed={args.seed}")
    for s in summary:
        print(f"{s['method']:>10s} n={s['n']:<6d} ok={s['trials']} failed={s['failed']} "
              f"mean={s['mean']:.3f} median={s['median']:.3f}", file=sys.stderr)
    print(f"elapsed {time.perf_counter() - t0:.1f} s", file=sys.stderr)
    return 0


def cmd_build_partition(args):
    n = None if args.n in ("inf", "infinity") else int(args.n)
    t0 = time.perf_counter()
    part = build_partition(args.target, args.eta_grid, n)
    save_partition(part, args.out)
    print(f"# seed={args.seed} (unused: the construction is deterministic)")
    print(f"built {part.num_stacks} stacks in {time.perf_counter() - t0:.1f} s -> {args.out}")
    for ell, alpha in enumerate(part.alphas[:-1], 1):
        tail = TAIL_CONSTANT * 2.0**-ell
        print(f"alpha_{ell:<2d} = {alpha: .7f}   tail model {tail: .7f}")
    return 0


def cmd_kernel_audit(args):
    try:
        report = bench.kernel_audit(args.fixtures)
    except (OSError, ValueError) as exc:
        print(f"kernel audit failed: {exc}", file=sys.stderr)
        return 2
    print(f"# seed={args.seed} (unused: fixtures are fixed)")
    ok = True
    for name, r in report.items():
        status = "pass" if r["passed"] else "FAIL"
        d = r["worst_delta"]
        print(f"{name:<9s} {status} max rel err {r['max_rel_error']:.3e} "
              f"(threshold {r['threshold']:.0e}) at delta={d.real:.6g}{d.imag:+.6g}j "
              f"n={r['worst_n']} over {r['count']} records")
        ok &= r["passed"]
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="expfit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
        p.set_defaults(func=func)
        return p

    p = add("fit", cmd_fit, "fit a sum of exponentials to one signal")
    p.add_argument("--method", required=True,
                   choices=["projected", "full", "hsvd", "hsvd-dense", "hsvd-fast"])
    p.add_argument("--input", required=True,
                   help="mrs:n=256,noise=15 | toy:n=1000,noise_var=0.01 | file.npy | file.txt")
    p.add_argument("--p", type=int, required=True, help="number of exponentials")
    p.add_argument("--partition", help="partition file for the projected method")
    p.add_argument("--out", help="output .json or .csv (default: JSON on stdout)")

    p = add("bench-timing", cmd_bench_timing, "time each method over signal lengths")
    p.add_argument("--methods", nargs="+", default=["projected", "full", "hsvd", "hsvd-fast",
                                                     "vmu-product"],
                   choices=list(bench.METHODS) + ["vmu-product"])
    p.add_argument("--n-list", default="2^8..2^14",
                   help="comma list of lengths; 2^k and 2^a..2^b ranges allowed")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--out", default="-")

    p = add("bench-precision", cmd_bench_precision, "Monte Carlo precision study on MRS data")
    p.add_argument("--methods", nargs="+", default=["full", "projected", "hsvd-fast"],
                   choices=list(bench.METHODS))
    p.add_argument("--n-list", default="4096")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--out", default="-")
    p.add_argument("--summary", help="also write per-method quantiles to this CSV")

    p = add("build-partition", cmd_build_partition, "rebuild the box partition ladder")
    p.add_argument("--target-eff", "--target", dest="target", type=float, default=0.95, help="target efficiency")
    p.add_argument("--eta-grid", type=float, default=0.99999, help="auxiliary grid efficiency")
    p.add_argument("--n", default="inf", help="signal length or 'inf'")
    p.add_argument("--out", required=True)

    p = add("kernel-audit", cmd_kernel_audit, "check Gram kernels against fixtures")
    p.add_argument("--fixtures", help="fixture file (default: the shipped one)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
