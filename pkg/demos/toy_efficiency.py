"""Why projection beats subsampling on a single damped exponential.

A thousand samples of exp(-0.01 j) are compressed two ways: by keeping every
tenth row, and by projecting onto the span of two Vandermonde columns at
-0.008 +- 0.0014i.  The efficiency of each subspace predicts how much the
parameter covariance inflates, and a small Monte Carlo run confirms it.

Run with ``python3 demos/toy_efficiency.py``.
"""
import numpy as np

from expfit import fit_full, fit_projected, generate_toy
from expfit.dense import jacobian_basis, selection_basis, subspace_basis
from expfit.diagnostics import linearized_covariance
from expfit.subspace import efficiency

n = 1000
mu = np.array([-0.008 + 0.0014j, -0.008 - 0.0014j])
J = jacobian_basis([-0.01], n)

eta_proj = efficiency(subspace_basis(mu, n), J)
eta_rows = efficiency(selection_basis(n, np.arange(0, n, 10)), J)
print(f"efficiency of two interpolation points: {eta_proj:.4f}")
print(f"efficiency of every tenth row:          {eta_rows:.4f}")

cov = linearized_covariance([-0.01], [1.0], 0.1, n=n)
print(f"predicted std of Re(omega) from the full data: {np.sqrt(cov[0, 0]):.3e}")

full, proj = [], []
for seed in range(200):
    y = generate_toy(n, seed=seed).y
    full.append(fit_full(y, 1).omega[0])
    proj.append(fit_projected(y, 1).omega[0])
full, proj = np.array(full), np.array(proj)
print(f"empirical std of Re(omega), full NLS:      {full.real.std():.3e}")
print(f"empirical std of Re(omega), projected NLS: {proj.real.std():.3e}")
