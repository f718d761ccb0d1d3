r"""Closed-form geometric sums and Vandermonde inner products.

Every product of two Vandermonde matrices with ``n`` rows reduces to sums of
the form :math:`\sum_{\ell} \ell^p e^{\delta\ell}`, which are evaluated here in
closed form so that no step costs :math:`O(n)`.  The naive formulas lose all
accuracy when :math:`e^\delta \approx 1`; the routines below switch to
``expm1`` ratios and short series in that regime.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

__all__ = [
    "reduce_imag",
    "geometric_sum",
    "geometric_sum_derivative",
    "expdiff",
    "ChiTable",
    "chi_coefficients",
    "bernoulli_numbers",
    "bernoulli_polynomial",
    "generalized_geometric_sum",
    "gram_vv",
    "gram_vvp",
    "gram_vpvp",
]

MAX_CHI_ORDER = 12
MAX_BERNOULLI_ORDER = 13

# |expm1(delta)| at or below this uses the two-term Taylor patch
TAYLOR_SWITCH = 1e-15
# number of terms kept in the small-|n delta| power series
_SERIES_TERMS = 24


def reduce_imag(delta):
    """Map the imaginary part of ``delta`` into [-pi, pi).

    Entries already inside the interval are returned untouched so that tiny
    imaginary parts keep full relative precision.
    """
    delta = np.asarray(delta, dtype=complex)
    im = delta.imag
    outside = (im < -np.pi) | (im >= np.pi)
    if np.any(outside):
        im = np.where(outside, np.mod(im + np.pi, 2 * np.pi) - np.pi, im)
        # np.mod can round up to exactly 2 pi
        im = np.where(im >= np.pi, im - 2 * np.pi, im)
        delta = delta.real + 1j * im
    return delta


def _ratio(delta, n):
    """(1 - e^{n delta}) / (1 - e^{delta}) with the Taylor patch near delta = 0."""
    e1 = np.expm1(delta)
    big = np.abs(e1) > TAYLOR_SWITCH
    out = n * (1 + (n - 1) * delta / 2)
    out = np.asarray(out, dtype=complex)
    if np.any(big):
        out[big] = np.expm1(n * delta[big]) / e1[big]
    return out


def geometric_sum(delta, n):
    r"""Evaluate :math:`\sum_{\ell=0}^{n-1} e^{\delta\ell}`.

    Parameters
    ----------
    delta : complex or array_like
        Exponent; the imaginary part is reduced modulo :math:`2\pi`.
    n : int
        Number of terms, ``n >= 1``.

    Returns
    -------
    complex or ndarray
        Same shape as ``delta``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    scalar = np.ndim(delta) == 0
    d = np.atleast_1d(reduce_imag(delta))
    out = _ratio(d, n)
    return out[0] if scalar else out


def expdiff(n, delta):
    r"""Seven-term series of :math:`e^\delta/(1-e^\delta) - n e^{n\delta}/(1-e^{n\delta})`.

    Only valid for ``|delta| <= 0.5/n``; the caller picks the branch.
    """
    d = np.asarray(delta, dtype=complex)
    n = float(n)
    d2 = d * d
    # coefficients of delta^(2k-1) multiply (n^(2k) - 1)
    out = (n - 1) / 2 + (n**2 - 1) * d / 12
    dk = d * d2
    out = out - (n**4 - 1) * dk / 720
    dk = dk * d2
    out = out + (n**6 - 1) * dk / 30240
    dk = dk * d2
    out = out - (n**8 - 1) * dk / 1209600
    dk = dk * d2
    out = out + (n**10 - 1) * dk / 47900160
    dk = dk * d2
    out = out - 691 * (n**12 - 1) * dk / 1307674368000
    return out


def geometric_sum_derivative(delta, n):
    r"""Evaluate :math:`\sum_{\ell=0}^{n-1} \ell e^{\delta\ell}`.

    Three branches depending on ``|delta|`` relative to ``0.5/n``: a ratio of
    ``expm1`` terms, the ``expm1`` ratio times :func:`expdiff`, and the exact
    value ``n(n-1)/2`` at ``delta == 0``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    scalar = np.ndim(delta) == 0
    d = np.atleast_1d(reduce_imag(delta))
    mag = np.abs(d)
    out = np.full(d.shape, n * (n - 1) / 2, dtype=complex)

    far = mag > 0.5 / n
    if np.any(far):
        df = d[far]
        e1 = np.expm1(df)
        out[far] = (n * np.exp(n * df) * e1 - np.exp(df) * np.expm1(n * df)) / e1**2

    near = (mag > 0) & ~far
    if np.any(near):
        dn = d[near]
        out[near] = _ratio(dn, n) * expdiff(n, dn)
    return out[0] if scalar else out


@dataclass(frozen=True)
class ChiTable:
    """Coefficients chi_n(p, l), l = 0..p, as integer polynomials in n.

    ``coeffs[l][k]`` is the coefficient of ``n**k`` in chi_n(p, l).
    """

    p: int
    coeffs: tuple

    def evaluate(self, n):
        """Exact integer values chi_n(p, l) for l = 0..p."""
        vals = []
        for poly in self.coeffs:
            acc = 0
            for c in reversed(poly):
                acc = acc * n + c
            vals.append(acc)
        return vals


@lru_cache(maxsize=None)
def chi_coefficients(p: int) -> ChiTable:
    """Build the chi table of order ``p`` from the recurrence

    chi_n(p+1, l) = (n + l) chi_n(p, l) + l chi_n(p, l-1),  chi_n(0, l) = [l == 0].
    """
    if p < 0:
        raise ValueError("order must be non-negative")
    if p > MAX_CHI_ORDER:
        raise ValueError(f"order {p} exceeds cap {MAX_CHI_ORDER}")
    # polys[l] is a list of ints, ascending powers of n
    polys = [[1]]
    for q in range(p):
        new = []
        for ell in range(q + 2):
            cur = polys[ell] if ell <= q else [0]
            prev = polys[ell - 1] if ell >= 1 else [0]
            size = max(len(cur) + 1, len(prev))
            poly = [0] * size
            # (n + ell) * cur
            for k, c in enumerate(cur):
                poly[k + 1] += c
                poly[k] += ell * c
            for k, c in enumerate(prev):
                poly[k] += ell * c
            while len(poly) > 1 and poly[-1] == 0:
                poly.pop()
            new.append(poly)
        polys = new
    return ChiTable(p=p, coeffs=tuple(tuple(c) for c in polys))


@lru_cache(maxsize=None)
def bernoulli_numbers(kmax: int) -> tuple:
    """Bernoulli numbers B_0..B_kmax as Fractions, with B_1 = -1/2."""
    B = [Fraction(1)]
    for m in range(1, kmax + 1):
        B.append(-sum(comb(m + 1, k) * B[k] for k in range(m)) / (m + 1))
    return tuple(B)


def _bernoulli_coeffs(p):
    B = bernoulli_numbers(p)
    # B_p(x) = sum_k C(p, k) B_k x^(p-k)
    return [comb(p, k) * B[k] for k in range(p + 1)]


def bernoulli_polynomial(p: int, x):
    """The Bernoulli polynomial B_p evaluated at ``x``.

    Integer or Fraction arguments are evaluated exactly (returning a
    Fraction); anything else is evaluated in floating point.
    """
    if p < 0:
        raise ValueError("order must be non-negative")
    if p > MAX_BERNOULLI_ORDER:
        raise ValueError(f"order {p} exceeds cap {MAX_BERNOULLI_ORDER}")
    coeffs = _bernoulli_coeffs(p)
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        acc = Fraction(0)
        for c in coeffs:
            acc = acc * x + c
        return acc
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for c in coeffs:
        acc = acc * x + float(c)
    return acc if acc.ndim else float(acc)


@lru_cache(maxsize=4096)
def _power_sum_differences(p, n1, n2, terms):
    """Normalized exact power sums.

    Returns floats  (S_{p+m}(n2) - S_{p+m}(n1)) / (m! n2^(p+m+1))  for
    m = 0..terms-1, where S_q(N) = sum_{k<N} k^q.
    """
    out = np.empty(terms)
    for m in range(terms):
        q = p + m
        B = bernoulli_numbers(q + 1)

        def S(N):
            if N == 0:
                return Fraction(0)
            return sum(comb(q + 1, j) * B[j] * Fraction(N) ** (q + 1 - j)
                       for j in range(q + 1)) / (q + 1)

        diff = S(n2) - S(n1)
        out[m] = float(diff / (factorial(m) * Fraction(n2) ** (q + 1)))
    return out


def _series_sum(p, n1, n2, d):
    # sum_m d^m/m! sum_k k^(p+m), written in the scaled variable x = n2 d
    coef = _power_sum_differences(p, n1, n2, _SERIES_TERMS)
    x = d * n2
    acc = np.zeros_like(d)
    for c in coef[::-1]:
        acc = acc * x + c
    return acc * float(n2) ** (p + 1)


def _chi_sum(p, n1, n2, d):
    table = chi_coefficients(p)
    c1 = table.evaluate(n1)
    c2 = table.evaluate(n2)
    one_minus = -np.expm1(d)
    out = np.zeros_like(d)
    # exp(n d) may underflow for large n and Re d < 0; that is harmless here
    with np.errstate(under="ignore"):
        e1 = np.exp(n1 * d)
        e2 = np.exp(n2 * d)
        ed = np.exp(d)
        pw = one_minus.copy()
        for ell in range(p + 1):
            num = c1[ell] * e1 - c2[ell] * e2
            out += num / pw
            e1 = e1 * ed
            e2 = e2 * ed
            pw = pw * one_minus
    return out


def generalized_geometric_sum(p: int, n1: int, n2: int, delta):
    r"""Evaluate :math:`\sum_{k=n_1}^{n_2-1} k^p e^{\delta k}`.

    Uses the chi-coefficient closed form away from ``e^delta = 1``, the
    Bernoulli-polynomial formula at ``e^delta = 1`` and, in between, a power
    series in ``delta`` whose coefficients are exact power sums.  The series
    branch is taken when ``|delta| * n2 <= 1``, where the closed form suffers
    cancellation of order ``|delta n2|^-(p+1)``.
    """
    if not 0 <= n1 < n2:
        raise ValueError("require 0 <= n1 < n2")
    if p < 0:
        raise ValueError("order must be non-negative")
    if p > MAX_CHI_ORDER:
        raise ValueError(f"order {p} exceeds cap {MAX_CHI_ORDER}")
    scalar = np.ndim(delta) == 0
    d = np.atleast_1d(reduce_imag(delta)).astype(complex)
    out = np.empty(d.shape, dtype=complex)

    unit = np.abs(np.expm1(d)) <= TAYLOR_SWITCH * max(1, p)
    small = ~unit & (np.abs(d) * n2 <= 1.0)
    far = ~unit & ~small

    if np.any(unit):
        val = (bernoulli_polynomial(p + 1, n2) - bernoulli_polynomial(p + 1, n1)) / (p + 1)
        if np.all(d[unit] == 0):
            out[unit] = float(val)
        else:
            out[unit] = _series_sum(p, n1, n2, d[unit])
    if np.any(small):
        out[small] = _series_sum(p, n1, n2, d[small])
    if np.any(far):
        out[far] = _chi_sum(p, n1, n2, d[far])
    return out[0] if scalar else out


def _delta(mu, omega):
    mu = np.atleast_1d(np.asarray(mu, dtype=complex))
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    return np.conj(mu)[:, None] + omega[None, :]


def gram_vv(mu, omega, n):
    """V(mu)^* V(omega) for Vandermonde matrices with ``n`` rows."""
    d = _delta(mu, omega)
    return geometric_sum(d.ravel(), n).reshape(d.shape)


def gram_vvp(mu, omega, n):
    """V(mu)^* V'(omega), where V' holds the derivatives j e^{j omega_k}."""
    d = _delta(mu, omega)
    return geometric_sum_derivative(d.ravel(), n).reshape(d.shape)


def gram_vpvp(mu, omega, n):
    """V'(mu)^* V'(omega), entries sum_l l^2 e^{(conj mu_j + omega_k) l}."""
    d = _delta(mu, omega)
    if n == 1:
        return np.zeros(d.shape, dtype=complex)
    return generalized_geometric_sum(2, 0, n, d.ravel()).reshape(d.shape)
