"""Random instance generators shared by the test modules."""
import numpy as np

from expfit.dense import jacobian_basis, orthonormal_basis, subspace_basis


def random_freqs(rng, k, re=(-0.2, 0.0)):
    return rng.uniform(*re, k) + 1j * rng.uniform(-np.pi, np.pi, k)


def efficiency_instance(rng):
    """Random n, frequencies and nearby interpolation points for efficiency checks."""
    n = int(rng.integers(20, 201))
    p = int(rng.integers(1, 3))
    omega = random_freqs(rng, p)
    # points near the frequencies so efficiencies are neither 0 nor 1
    mu = np.concatenate([omega + 0.05 * random_freqs(rng, p, (-1, 1)) for _ in range(3)])
    mu = mu.real.clip(max=0) + 1j * mu.imag
    return n, omega, mu


def random_orthonormal(rng, n, k):
    A = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    return orthonormal_basis(A)


__all__ = ["jacobian_basis", "orthonormal_basis", "random_freqs", "random_orthonormal",
           "subspace_basis", "efficiency_instance"]
