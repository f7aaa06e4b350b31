"""Solver knobs and run reports."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

from .scheme import WIDTHS


@dataclass(frozen=True)
class SolverConfig:
    """Numerical parameters shared by every grid solve.

    ``stencil`` is the number of lattice directions used at ordinary nodes,
    ``boundary_stencil`` the number used within ``band * h`` of the
    boundary.  ``tol`` bounds the sup-norm of the log residual and
    ``eps_w`` floors ``-w`` inside the right-hand side.
    """

    h: float = 1.0 / 64
    stencil: int = 16
    boundary_stencil: int = 88
    band: float = 2.0
    damping: float = 1.0
    tol: float = 1e-8
    eps_w: float = 1e-10
    max_iter: int = 60
    gamma: float = 4.0
    lam: float = 1.0
    profile: bool = True

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.stencil < 8 or self.stencil not in WIDTHS:
            raise ValueError(f"stencil must be >= 8 and one of {sorted(WIDTHS)}")
        if self.boundary_stencil not in WIDTHS or self.boundary_stencil < self.stencil:
            raise ValueError("boundary_stencil must be a stencil width >= stencil")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if not self.gamma > 1:
            raise ValueError("gamma must exceed 1")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.tol <= 0 or self.eps_w <= 0 or self.max_iter < 1:
            raise ValueError("tol, eps_w and max_iter must be positive")

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass
class SolveReport:
    iterations: int = 0
    residual: float = float("inf")
    monotone_certificate: bool = False
    runtime_ms: float = 0.0
    converged: bool = False
    history: list = field(default_factory=list)
    violating_node: list | None = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d["residual"] = float(d["residual"])
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)
