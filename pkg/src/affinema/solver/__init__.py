"""Monotone grid solver, problem drivers and the semi-discrete oracle."""
from .alexandrov import solve_ma_alexandrov
from .config import SolveReport, SolverConfig
from .problems import (
    comparison_check,
    sandwich_report,
    singular_domain,
    solve_cheng_yau,
    solve_ck,
    solve_ck_singular,
    solve_dirichlet_ma,
)
from .scheme import WideStencilMA

__all__ = [
    "SolveReport",
    "SolverConfig",
    "WideStencilMA",
    "comparison_check",
    "sandwich_report",
    "singular_domain",
    "solve_cheng_yau",
    "solve_ck",
    "solve_ck_singular",
    "solve_dirichlet_ma",
    "solve_ma_alexandrov",
]
