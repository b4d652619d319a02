"""Time-uniform concentration boundaries for products of i.i.d. PSD matrices.

The product ``Z_n = (I + eta_n X_n) ... (I + eta_1 X_1)`` is compared with its
mean ``E_n``; :mod:`.boundary` computes thresholds that hold simultaneously
for all n, and :mod:`.streams`, :mod:`.oracle` and :mod:`.montecarlo` check
them by simulation and exact enumeration.
"""

__version__ = "0.1.0"

from .boundary import (
    BoundaryParams,
    CumulativeStats,
    HorizonError,
    StepSchedule,
    anytime_boundary,
    anytime_boundary_curve,
    check_condition,
    epoch_index,
    fixed_time_threshold,
    huang_tail,
    smooth_boundary,
    stitching_h,
    zeta,
)
from .linalg import expected_product, inverse_expected_product, operator_norm, sym_eigen
from .streams import DiagonalPerturbation, FiniteSupport, RankOneSphere, simulate_trajectory

__all__ = [
    "__version__",
    "BoundaryParams",
    "CumulativeStats",
    "HorizonError",
    "StepSchedule",
    "anytime_boundary",
    "anytime_boundary_curve",
    "check_condition",
    "epoch_index",
    "fixed_time_threshold",
    "huang_tail",
    "smooth_boundary",
    "stitching_h",
    "zeta",
    "expected_product",
    "inverse_expected_product",
    "operator_norm",
    "sym_eigen",
    "DiagonalPerturbation",
    "FiniteSupport",
    "RankOneSphere",
    "simulate_trajectory",
]
