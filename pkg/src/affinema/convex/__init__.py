"""Convex domains, extended-real PL functions, grids and boundary data."""
from .boundary import BoundaryData, three_point_data
from .domains import ConvexCone, ConvexDomain, Disk, Polygon, dual_section, standard_triangle
from .grid import Grid, GridFunction
from .plconvex import (
    PLConvexFunction,
    convex_envelope,
    legendre_involution_check,
    legendre_transform,
    ma_measure,
    pl_from_grid,
)
from .slopes import SlopeVerdict, boundary_value, slope_classifier

__all__ = [
    "BoundaryData",
    "ConvexCone",
    "ConvexDomain",
    "Disk",
    "Grid",
    "GridFunction",
    "PLConvexFunction",
    "Polygon",
    "SlopeVerdict",
    "boundary_value",
    "convex_envelope",
    "dual_section",
    "legendre_involution_check",
    "legendre_transform",
    "ma_measure",
    "pl_from_grid",
    "slope_classifier",
    "standard_triangle",
    "three_point_data",
]
