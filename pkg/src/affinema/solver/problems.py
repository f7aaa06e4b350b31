"""Grid solves of the Dirichlet, Cheng-Yau and lambda problems."""
from __future__ import annotations

import warnings

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..barriers import BallBarrier
from ..convex.boundary import BoundaryData
from ..convex.domains import Disk, Polygon
from ..convex.grid import BOUNDARY, INTERIOR, Grid, GridFunction
from ..convex.plconvex import PLConvexFunction, convex_envelope
from ..errors import (
    DomainError,
    EmptyInterior,
    ExponentOutOfRange,
    GridMismatch,
    NonPositiveRHS,
    SandwichViolated,
)
from .config import SolverConfig
from .newton import newton_log_ma
from .scheme import WideStencilMA

_ENV_SAMPLES = 2048


def _check_planar(domain):
    if getattr(domain, "dim", 2) != 2:
        raise DomainError("grid solves are planar")


def boundary_exponent(domain, gamma):
    """Exponent ``beta`` of ``-dist**beta`` decay of the singular solution.

    Near a smooth strictly convex arc the solution behaves like
    ``dist**((n+1)/(n+gamma))``; along flat edges like ``dist**(2/(n+gamma))``.
    """
    n = 2
    if isinstance(domain, Disk):
        return (n + 1.0) / (n + gamma)
    return 2.0 / (n + gamma)


def _shape(domain, gamma):
    """Convex negative function vanishing on the boundary, used for starts."""
    if isinstance(domain, Disk):
        b = BallBarrier(domain.center, domain.radius, max(gamma, 1.0))
        return b.value
    if isinstance(domain, Polygon):
        m = len(domain.vertices)
        a = min(2.0 / (2.0 + gamma), 1.0 / m)
        scale = np.sqrt(domain.area)

        def psi(X):
            gaps = np.maximum(domain._offsets - X @ domain._normals.T, 0.0) / scale
            return -np.prod(gaps, axis=1) ** a

        return psi
    return lambda X: -np.maximum(domain.distance(X), 0.0)


def _as_boundary(domain, g):
    if isinstance(g, BoundaryData):
        if g.has_infinite:
            raise ValueError("Dirichlet data must be finite")
        return g
    if callable(g):
        return BoundaryData.from_function(domain, g)
    return BoundaryData.constant(domain, float(g))


def _operator(grid, g, cfg, profile):
    return WideStencilMA(
        grid,
        g,
        width=cfg.stencil,
        boundary_width=cfg.boundary_stencil,
        band=cfg.band,
        profile=profile,
    )


def _boundary_samples(domain, g, count):
    s = np.arange(count) / count
    P = domain.boundary_point(s)
    if isinstance(domain, Polygon):
        P = np.vstack([P, domain.vertices])
    return P, np.asarray(g(P), dtype=float)


def _envelope(domain, g):
    """Convex envelope of finite Dirichlet data, as a PL hull."""
    return PLConvexFunction(*_boundary_samples(domain, g, _ENV_SAMPLES))


def _assemble(grid, u, g, op):
    vals = np.full(grid.shape, np.nan)
    vals[tuple(grid.interior.T)] = u
    bmask = grid.mask == BOUNDARY
    if np.any(bmask):
        vals[bmask] = g(grid.X[bmask])
    # uniform boundary samples, about four per boundary cell
    count = max(256, int(4 * _perimeter(grid.domain) / grid.h))
    bp, bv = _boundary_samples(grid.domain, g, count)
    return GridFunction(grid, vals, bp, bv, boundary=g)


def _perimeter(domain):
    if isinstance(domain, Disk):
        return 2 * np.pi * domain.radius
    return domain.perimeter


def _scaled_start(op, base, shape_vals, log_rhs, fixed=True):
    """``base + mu * shape`` with ``mu`` balancing the median log residual."""
    mu = 1.0
    for _ in range(3 if fixed else 1):
        u = base + mu * shape_vals
        ma, _, _ = op.evaluate(u)
        lr, _ = log_rhs(u)
        F = np.log(np.maximum(ma, 1e-300)) - lr
        F = F[np.isfinite(F)]
        if not F.size:
            break
        # MA is homogeneous of degree two in the non-affine part
        mu *= float(np.exp(-np.median(F) / 2.0))
    return base + mu * shape_vals


def solve_dirichlet_ma(domain, rhs, g, cfg=None, profile=None, u0=None):
    """Discrete convex solution of ``det D^2 u = f`` with ``u = g`` on the boundary.

    ``rhs`` is a positive callable of the node coordinates or a constant.
    The returned grid function carries the solve report as ``.report``.
    """
    cfg = cfg or SolverConfig()
    _check_planar(domain)
    g = _as_boundary(domain, g)
    grid = Grid(domain, cfg.h)
    X = grid.points
    f = rhs(X) if callable(rhs) else np.full(len(X), float(rhs))
    f = np.asarray(f, dtype=float)
    if np.any(~np.isfinite(f)) or np.any(f <= 0):
        raise NonPositiveRHS("the density must be finite and positive at interior nodes")
    op = _operator(grid, g, cfg, profile)
    logf = np.log(f)
    zero = np.zeros_like(logf)

    def log_rhs(u):
        return logf, zero

    if u0 is None:
        env = _envelope(domain, g).extended(X)
        u0 = _scaled_start(op, env, _shape(domain, 2.0)(X), log_rhs)
    u, rep = newton_log_ma(op, u0, log_rhs, cfg)
    out = _assemble(grid, u, g, op)
    out.report = rep
    return out


def _cy_log_rhs(gamma, eps, scale=1.0, wvals=None):
    """``log(scale * max(-w, eps)**-gamma)`` with ``w = u`` unless given."""
    logs = np.log(scale)
    if wvals is not None:
        const = logs - gamma * np.log(np.maximum(-wvals, eps))
        zero = np.zeros_like(const)
        return lambda u: (const, zero)

    def log_rhs(u):
        mw = -u
        val = logs - gamma * np.log(np.maximum(mw, eps))
        der = np.where(mw > eps, gamma / np.maximum(mw, eps), 0.0)
        return val, der

    return log_rhs


def solve_cheng_yau(domain, gamma=None, cfg=None):
    """Negative convex ``w`` with ``det D^2 w = (-w)^(-gamma)`` and ``w = 0`` on the boundary.

    Returns ``(w, report)``.  Balls accept any ``gamma > 1``; polygons need
    ``gamma > 2``.
    """
    cfg = cfg or SolverConfig()
    gamma = cfg.gamma if gamma is None else float(gamma)
    _check_planar(domain)
    if not gamma > 1:
        raise ExponentOutOfRange("no convex solution exists for gamma <= 1")
    if not isinstance(domain, Disk) and not gamma > 2:
        raise ExponentOutOfRange("non-ball domains need gamma > n")
    g = BoundaryData.constant(domain, 0.0)
    grid = Grid(domain, cfg.h)
    X = grid.points
    profile = boundary_exponent(domain, gamma) if cfg.profile else None
    op = _operator(grid, g, cfg, profile)
    log_rhs = _cy_log_rhs(gamma, cfg.eps_w)
    v = _shape(domain, gamma)(X)
    # det(mu v) / (-mu v)^-gamma scales like mu^(2 + gamma)
    ma, _, _ = op.evaluate(v)
    F = np.log(np.maximum(ma, 1e-300)) - log_rhs(v)[0]
    mu = float(np.exp(-np.median(F) / (2.0 + gamma)))
    w, rep = newton_log_ma(op, mu * v, log_rhs, cfg, admissible=lambda u: bool(np.all(u < 0)))
    if not np.all(w < 0):
        rep.notes.append("non-negative interior value")
    out = _assemble(grid, w, g, op)
    out.report = rep
    return out, rep


def _node_values(w, grid):
    """Values of ``w`` at ``grid``'s interior nodes, on a shared lattice."""
    if not w.grid.same_lattice(grid):
        raise GridMismatch("w lives on a different lattice")
    idx = w.grid.node_of(grid.points)
    nx, ny = w.grid.shape
    ok = (idx[:, 0] >= 0) & (idx[:, 0] < nx) & (idx[:, 1] >= 0) & (idx[:, 1] < ny)
    if not np.all(ok):
        raise GridMismatch("grid nodes fall outside the grid of w")
    vals = w.values[idx[:, 0], idx[:, 1]]
    if np.any(~np.isfinite(vals)):
        raise GridMismatch("w is undefined at some nodes")
    return vals


def sandwich_report(u, env_vals, w_vals, lam, h):
    """Excess over the bounds ``env + lam^(1/2) w <= u <= env``."""
    lower = env_vals + np.sqrt(lam) * w_vals
    below = lower - u
    above = u - env_vals
    excess = np.maximum(below, above)
    k = int(np.argmax(excess))
    return {
        "max_below_lower": float(below.max()),
        "max_above_upper": float(above.max()),
        "max_excess": float(excess[k]),
        "node": k,
        "tolerance": 2.0 * h,
        "ok": bool(excess[k] <= 2.0 * h),
    }


def solve_ck(domain, gamma, lam, w, phi, cfg=None):
    """Solve ``det D^2 u = lam (-w)^(-gamma)`` with ``u = phi`` on the boundary.

    ``w`` is the Cheng-Yau solution on the same grid.  The sandwich bounds
    are checked on return (``report.sandwich``).
    """
    cfg = cfg or SolverConfig()
    _check_planar(domain)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if isinstance(phi, BoundaryData) and not phi.dominating_affine_exists():
        warnings.warn("no affine function dominates the sampled boundary data", stacklevel=2)
    g = _as_boundary(domain, phi)
    grid = Grid(domain, cfg.h)
    if w.grid != grid:
        raise GridMismatch("w must live on the solve grid")
    return _solve_lambda(grid, gamma, lam, w, g, cfg, boundary_exponent(domain, gamma), check=True)


def _solve_lambda(grid, gamma, lam, w, g, cfg, beta, check):
    X = grid.points
    wv = _node_values(w, grid)
    op = _operator(grid, g, cfg, beta if cfg.profile else None)
    log_rhs = _cy_log_rhs(gamma, cfg.eps_w, scale=lam, wvals=wv)
    env = _envelope(grid.domain, g).extended(X)
    u0 = _scaled_start(op, env, _shape(grid.domain, gamma)(X), log_rhs)
    u, rep = newton_log_ma(op, u0, log_rhs, cfg)
    sw = sandwich_report(u, env, wv, lam, grid.h)
    rep.notes.append(f"sandwich max excess {sw['max_excess']:.3e}")
    out = _assemble(grid, u, g, op)
    out.report = rep
    out.sandwich = sw
    rep.sandwich = sw
    if check and not sw["ok"]:
        node = [float(v) for v in X[sw["node"]]]
        raise SandwichViolated("sandwich bound violated", node=node, excess=sw["max_excess"])
    return out, rep


def singular_domain(domain, phi):
    """``U = int dom(env phi)`` as a polygon (or the domain itself)."""
    if not phi.has_infinite:
        return domain
    pts, _ = phi.finite_points()
    if len(pts) < 3:
        raise EmptyInterior("fewer than three finite boundary values")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise EmptyInterior("finite boundary values are collinear") from exc
    if hull.volume < 1e-14:
        raise EmptyInterior("dom env phi has empty interior")
    return Polygon(pts[hull.vertices])


def solve_ck_singular(domain, gamma, lam, w, phi, cfg=None):
    """Lambda problem for boundary data with ``+inf`` values (planar).

    Solves on ``U = int dom(env phi)`` with data ``env phi`` on the boundary
    of ``U``; ``w`` must share the lattice.  Returns ``(u on U, report)``.
    """
    cfg = cfg or SolverConfig()
    _check_planar(domain)
    if not phi.has_infinite:
        return solve_ck(domain, gamma, lam, w, phi, cfg)
    U = singular_domain(domain, phi)
    env = convex_envelope(domain, phi, resolution=max(_ENV_SAMPLES, int(np.sum(phi.finite))))

    def g_on_u(p):
        return env.extended(np.atleast_2d(p))

    g = BoundaryData.from_function(U, g_on_u)
    grid = Grid(U, cfg.h)
    if grid.n_interior == 0:
        raise EmptyInterior("U contains no grid node")
    u, rep = _solve_lambda(grid, gamma, lam, w, g, cfg, None, check=False)
    u.envelope = env
    rep.notes.append("solved on int dom env phi")
    return u, rep


def comparison_check(u_minus, u_plus):
    """Largest ``u_minus - u_plus`` over nodes the two grids share."""
    ga, gb = u_minus.grid, u_plus.grid
    if not ga.same_lattice(gb):
        raise GridMismatch("grid spacings differ")
    m = ga.mask != 0
    idx = gb.node_of(ga.X[m])
    nx, ny = gb.shape
    ok = (idx[:, 0] >= 0) & (idx[:, 0] < nx) & (idx[:, 1] >= 0) & (idx[:, 1] < ny)
    a = u_minus.values[m][ok]
    b = np.full(len(a), np.nan)
    b = u_plus.values[idx[ok, 0], idx[ok, 1]]
    pts = ga.X[m][ok]
    both = np.isfinite(a) & np.isfinite(b)
    if not np.any(both):
        raise GridMismatch("no shared nodes")
    diff = a[both] - b[both]
    k = int(np.argmax(diff))
    return {
        "max_excess": float(diff[k]),
        "node": [float(v) for v in pts[both][k]],
        "n_shared": int(both.sum()),
        "h": float(ga.h),
    }


__all__ = [
    "INTERIOR",
    "boundary_exponent",
    "comparison_check",
    "sandwich_report",
    "singular_domain",
    "solve_cheng_yau",
    "solve_ck",
    "solve_ck_singular",
    "solve_dirichlet_ma",
]
