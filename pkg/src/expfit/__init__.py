"""Fitting sums of complex exponentials with projected nonlinear least squares.

The main entry points are :func:`fit_projected` and :func:`fit_full`; the
HSVD baselines live in :mod:`expfit.baselines` and the theory checks in
:mod:`expfit.diagnostics`.
"""
from .baselines import HankelSpec, RankDeficientError, hankel_matvec, hsvd_dense, hsvd_fast
from .kernels import (generalized_geometric_sum, geometric_sum, geometric_sum_derivative,
                      gram_vpvp, gram_vv, gram_vvp)
from .partition import (BoxPartition, build_partition, default_partition, load_partition,
                        save_partition, select_interpolation_points, shift_rule_points,
                        stored_partition)
from .signals import SampledSignal, generate_mrs, generate_toy
from .solver import FitFailure, FitResult, SolverOptions, fit_full, fit_projected
from .subspace import SubspaceState, build_subspace, efficiency, efficiency_at
from .varpro import IllConditionedError, VarproProblem

__all__ = [
    "BoxPartition",
    "FitFailure",
    "FitResult",
    "HankelSpec",
    "IllConditionedError",
    "RankDeficientError",
    "SampledSignal",
    "SolverOptions",
    "SubspaceState",
    "VarproProblem",
    "build_partition",
    "build_subspace",
    "default_partition",
    "efficiency",
    "efficiency_at",
    "fit_full",
    "fit_projected",
    "generalized_geometric_sum",
    "generate_mrs",
    "generate_toy",
    "geometric_sum",
    "geometric_sum_derivative",
    "gram_vpvp",
    "gram_vv",
    "gram_vvp",
    "hankel_matvec",
    "hsvd_dense",
    "hsvd_fast",
    "load_partition",
    "save_partition",
    "select_interpolation_points",
    "shift_rule_points",
    "stored_partition",
]
