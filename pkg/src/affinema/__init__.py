"""Monge-Ampere equations with singular right-hand sides and the affine hypersurfaces they produce."""
__version__ = "0.1.0"

from .barriers import BallBarrier, SimplexBarrier, barrier_constants, exact_solution
from .convex import (
    BoundaryData,
    Disk,
    Grid,
    GridFunction,
    PLConvexFunction,
    Polygon,
    convex_envelope,
    legendre_transform,
    slope_classifier,
    three_point_data,
)
from .estimators import CKSolver, ChengYauSolver, LegendreTransformer
from .foliation import FoliationSweep, k_convexity_certificate, leaf_label, sweep
from .geometry import (
    HypersurfaceSample,
    export_hypersurface,
    gauss_kronecker,
    hypersphere_residual,
    legendre_map,
    li_normal_field,
)
from .solver import SolverConfig, solve_cheng_yau, solve_ck, solve_ck_singular, solve_ma_alexandrov

__all__ = [
    "BallBarrier",
    "BoundaryData",
    "CKSolver",
    "ChengYauSolver",
    "Disk",
    "FoliationSweep",
    "Grid",
    "GridFunction",
    "HypersurfaceSample",
    "LegendreTransformer",
    "PLConvexFunction",
    "Polygon",
    "SimplexBarrier",
    "SolverConfig",
    "barrier_constants",
    "convex_envelope",
    "exact_solution",
    "export_hypersurface",
    "gauss_kronecker",
    "hypersphere_residual",
    "k_convexity_certificate",
    "leaf_label",
    "legendre_map",
    "legendre_transform",
    "li_normal_field",
    "slope_classifier",
    "solve_cheng_yau",
    "solve_ck",
    "solve_ck_singular",
    "solve_ma_alexandrov",
    "sweep",
    "three_point_data",
]
