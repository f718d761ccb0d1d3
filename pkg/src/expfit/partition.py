"""Box partitions of the frequency domain and interpolation point selection.

A partition is a ladder of real coordinates ``alpha_1 < ... < alpha_L = 0``.
Stack ``l`` covers real parts in ``(alpha_{l-1}, alpha_l]`` and splits the
imaginary range ``[-pi, pi)`` into ``2**l`` equal boxes.  Taking the four
corners of the box containing a frequency as interpolation points gives a
subspace whose efficiency for that frequency is at least the target.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.optimize

from .kernels import gram_vv
from .subspace import orthogonalizer, pair_efficiency, single_efficiency_grid

ALPHA_FLOOR = -30.0
INF_SURROGATE_N = 2**24
TAIL_CONSTANT = -2.9720
ETA_TOL = 1e-6


@dataclass(frozen=True)
class AuxGrid:
    """Grid points ``z_{j,k} = reals[j] + 1j * k * spacings[j]``."""

    reals: np.ndarray
    spacings: np.ndarray
    grid_eff: float
    n: int

    def points(self, upto, height):
        """All grid points with index j <= upto and imaginary part in [0, height]."""
        zs = []
        for a, b in zip(self.reals[: upto + 1], self.spacings[: upto + 1]):
            k = np.arange(int(np.floor(height / b * (1 + 1e-12))) + 1)
            zs.append(a + 1j * b * k)
        return np.concatenate(zs)


@dataclass(frozen=True)
class BoxPartition:
    """Ladder of real coordinates; stack ``l`` (1-based) has ``2**l`` boxes."""

    target_eff: float
    alphas: np.ndarray
    n: float = math.inf
    eta_grid: float | None = None
    floor: float = ALPHA_FLOOR
    stack_splits: tuple = field(init=False)

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float)
        if alphas.size == 0 or alphas[-1] != 0 or np.any(np.diff(alphas) <= 0):
            raise ValueError("alphas must be strictly increasing and end at 0")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "stack_splits", tuple(2**l for l in range(1, len(alphas) + 1)))

    @property
    def num_stacks(self):
        return len(self.alphas)

    def left_edge(self, stack):
        """Real coordinate on the left of ``stack`` (1-based)."""
        return self.floor if stack == 1 else float(self.alphas[stack - 2])

    def stack_of(self, re):
        """Stack index for a real part ``re <= 0``; edges belong to the left stack."""
        return int(np.searchsorted(self.alphas, re, side="left")) + 1

    def corners(self, omega):
        """The four corners of the box that contains ``omega``."""
        re, im = _normalize(omega)
        stack = self.stack_of(re)
        k, h, nbox = _box_index(im, stack)
        lo = -np.pi + k * h
        hi = -np.pi + ((k + 1) % nbox) * h
        left, right = self.left_edge(stack), float(self.alphas[stack - 1])
        return np.array([left + 1j * lo, left + 1j * hi, right + 1j * lo, right + 1j * hi])


def _normalize(omega):
    re = min(float(np.real(omega)), 0.0)
    im = (float(np.imag(omega)) + np.pi) % (2 * np.pi) - np.pi
    return re, im


def _box_index(im, stack):
    nbox = 2**stack
    h = 2 * np.pi / nbox
    # boxes are half open (lo, hi]; an edge goes to the box below it
    k = int(np.ceil((im + np.pi) / h)) - 1
    return k % nbox, h, nbox


def _bracket(im, count):
    """Indices of the two points of the grid -pi + 2 pi k / count around ``im``."""
    h = 2 * np.pi / count
    k = int(np.ceil((im + np.pi) / h)) - 1
    return -np.pi + (k % count) * h, -np.pi + ((k + 1) % count) * h


def _is_power_of_two(n):
    n = int(n)
    return n > 0 and n & (n - 1) == 0


def select_interpolation_points(omega, partition, n):
    """Interpolation points for the frequencies ``omega``.

    Each frequency contributes the corners of its box.  When ``n`` is not a
    power of two, frequencies in the rightmost stack instead contribute the
    two nearest points on the line ``Re = alpha_{L-1}`` and the two nearest
    angles ``2 pi k / n`` on the imaginary axis.  The result is deduplicated,
    keeping first appearance order.
    """
    pts = []
    rightmost_special = not _is_power_of_two(n) and partition.num_stacks > 1
    for w in np.atleast_1d(np.asarray(omega, dtype=complex)):
        re, im = _normalize(w)
        stack = partition.stack_of(re)
        if rightmost_special and stack == partition.num_stacks:
            left = partition.left_edge(stack)
            lo, hi = _bracket(im, 2 ** (stack - 1))
            # roots of unity exp(2 pi i k / n), wrapped into [-pi, pi)
            h = 2 * np.pi / n
            k = int(np.ceil(im / h)) - 1
            r = [((k + d) * h + np.pi) % (2 * np.pi) - np.pi for d in (0, 1)]
            pts.extend([left + 1j * lo, left + 1j * hi, 1j * r[0], 1j * r[1]])
        else:
            pts.extend(partition.corners(w))
    out = []
    seen = set()
    for p in pts:
        key = (float(p.real) + 0.0, float(p.imag) + 0.0)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return np.array(out, dtype=complex)


def shift_rule_points(omega, n):
    """Two interpolation points per frequency from a closed-form shift rule.

    For each ``w`` the points are ``0.8 Re w + i (Im w +- h)`` with
    ``h = max(-0.52 Re w, 1.39 / n)``.  This is a lightweight alternative to
    the box partition that keeps single-frequency efficiency near 0.95.
    """
    out = []
    for w in np.atleast_1d(np.asarray(omega, dtype=complex)):
        re, im = _normalize(w)
        h = max(-0.52 * re, 1.39 / n)
        for s in (1, -1):
            out.append(0.8 * re + 1j * ((im + s * h + np.pi) % (2 * np.pi) - np.pi))
    return np.array(out, dtype=complex)


def _grid_step(a, eta_grid, n, limit):
    """Solve eta(J(a), J(a + (1+i)c)) = eta_grid for c; None if c would exceed limit."""
    def f(c):
        return pair_efficiency(a + 0j, a + (1 + 1j) * c, n) - eta_grid

    scale = max(abs(a), 1.0 / n)
    lo, hi = 0.0, min(1e-3 * scale, limit)
    while f(hi) > 0:
        if hi >= limit:
            return None
        lo, hi = hi, min(2 * hi, limit)
    c = scipy.optimize.brentq(f, lo, hi, xtol=1e-14 * scale, rtol=1e-14, maxiter=200)
    if abs(f(c)) > ETA_TOL:
        raise RuntimeError(f"aux grid root finder did not reach tolerance at a = {a}")
    return c


class _LazyGrid:
    def __init__(self, start, eta_grid, n, stop):
        self.eta_grid = eta_grid
        self.n = n
        self.stop = stop
        self.reals = [start]
        self.spacings = []
        self.done = False

    def extend_to(self, j):
        while len(self.reals) <= j and not self.done:
            a = self.reals[-1]
            c = _grid_step(a, self.eta_grid, self.n, self.stop - a)
            if c is None or a + c >= self.stop:
                # the last real is pinned to the end of the range
                if a < self.stop:
                    self.reals.append(self.stop)
                    self.spacings.append(self.stop - a if c is None else c)
                self.done = True
                break
            self.reals.append(a + c)
            self.spacings.append(c)
        return len(self.reals) > j

    def freeze(self):
        sp = [self.spacings[0]] + self.spacings if self.spacings else [np.inf]
        return AuxGrid(np.array(self.reals), np.array(sp), self.eta_grid, self.n)


def build_aux_grid(eta_grid, real_range, n):
    """Grid of reals between ``real_range[0]`` and ``real_range[1]``.

    Consecutive reals satisfy eta(J(a_j), J(a_j + (1+i) b_{j+1})) = eta_grid
    with ``a_{j+1} = a_j + b_{j+1}`` and ``b_0 = b_1``.
    """
    if not 0.9 < eta_grid < 1:
        raise ValueError("eta_grid must lie in (0.9, 1)")
    start, stop = real_range
    if stop <= start:
        raise ValueError("empty real range")
    g = _LazyGrid(float(start), eta_grid, n, float(stop))
    while g.extend_to(len(g.reals)):
        pass
    if len(g.reals) < 2:
        raise RuntimeError("could not bracket an aux grid step inside the range")
    return g.freeze()


def box_min_efficiency(left, right, height, zs, n):
    """Smallest efficiency over ``zs`` for the corners of [left, right] x [0, height]i."""
    mu = np.array([left, left + 1j * height, right, right + 1j * height])
    X = orthogonalizer(gram_vv(mu, mu, n))
    return float(np.min(single_efficiency_grid(mu, zs, n, X=X)))


def _ladder_step(left, stack, target_eff, eta_grid, n, stop):
    height = 2 * np.pi / 2**stack
    grid = _LazyGrid(left, eta_grid, n, stop)

    def feasible(j):
        if not grid.extend_to(j):
            return False
        alpha = grid.reals[j]
        frozen = grid.freeze()
        zs = frozen.points(j, height)
        return eta_grid * box_min_efficiency(left, alpha, height, zs, n) >= target_eff

    # exponential then binary search for the last feasible grid index,
    # treating feasibility as monotone in the candidate edge
    if not feasible(1):
        raise RuntimeError(f"no feasible box edge for stack {stack}")
    good, step = 1, 1
    while True:
        trial = good + step
        if feasible(trial):
            good, step = trial, 2 * step
        else:
            bad = trial
            break
        if grid.done and len(grid.reals) <= trial + 1:
            return grid.reals[good], True
    while bad - good > 1:
        mid = (good + bad) // 2
        if feasible(mid):
            good = mid
        else:
            bad = mid
    return grid.reals[good], False


def build_partition(target_eff=0.95, eta_grid=0.99999, n=None, floor=ALPHA_FLOOR):
    """Build the ladder of box edges by maximizing each edge in turn.

    ``n=None`` or ``math.inf`` builds at a large surrogate length.
    """
    if not 0 < target_eff < eta_grid < 1:
        raise ValueError("need 0 < target_eff < eta_grid < 1")
    n_eff = INF_SURROGATE_N if n is None or n == math.inf else int(n)
    # grids end at 0: an edge past 0 would be clamped there anyway
    stop = 0.0
    alphas = []
    left = floor
    stack = 1
    while True:
        alpha, _ = _ladder_step(left, stack, target_eff, eta_grid, n_eff, stop)
        if alpha >= 0:
            alphas.append(0.0)
            break
        alphas.append(alpha)
        left = alpha
        stack += 1
    return BoxPartition(target_eff=target_eff, alphas=np.array(alphas),
                        n=math.inf if n is None else n, eta_grid=eta_grid, floor=floor)


def save_partition(partition, path):
    n = "inf" if partition.n == math.inf else str(int(partition.n))
    lines = [
        f"target_eff = {partition.target_eff!r}",
        f"eta_grid = {partition.eta_grid!r}",
        f"n = {n}",
        "alphas = " + ", ".join(f"{a:.17g}" for a in partition.alphas),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def parse_partition(text):
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    n = fields.get("n", "inf")
    eta = fields.get("eta_grid", "None")
    return BoxPartition(
        target_eff=float(fields["target_eff"]),
        eta_grid=None if eta == "None" else float(eta),
        n=math.inf if n == "inf" else int(n),
        alphas=np.array([float(a) for a in fields["alphas"].split(",")]),
    )


def load_partition(path):
    return parse_partition(Path(path).read_text())


def stored_partition():
    """The shipped 95% ladder built at the large-n surrogate."""
    text = resources.files("expfit").joinpath("data/partition_95_inf.txt").read_text()
    return parse_partition(text)


def default_partition(n):
    """95% partition for length ``n`` from the stored large-n ladder.

    The stored edges are used except the last two, which depend on the
    length they were built for; beyond them the tail follows
    ``alpha_l = -2.9720 * 2**-l``.  The ladder gets ``ceil(log2 n)`` stacks,
    so the rightmost stack is the first whose boxes are no taller than
    ``2 pi / n`` and, for powers of two, its corners on the imaginary axis are
    the n-th roots of unity.
    """
    if n < 16:
        raise ValueError("n must be at least 16")
    base = stored_partition()
    head = base.alphas[:-3]
    stacks = max(1, math.ceil(math.log2(n)))
    alphas = []
    for ell in range(1, stacks):
        if ell <= len(head):
            alphas.append(float(head[ell - 1]))
        else:
            alphas.append(TAIL_CONSTANT * 2.0**-ell)
    alphas.append(0.0)
    return BoxPartition(target_eff=base.target_eff, alphas=np.array(alphas), n=n,
                        eta_grid=base.eta_grid)
