"""Boundary values and inner slopes of convex functions at boundary points."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NotOnBoundary
from .plconvex import PLConvexFunction, _Polytope

_DEPTH = 40


def _anchor_and_domain(u, anchor):
    if isinstance(u, PLConvexFunction):
        dom = u.domain
        if dom is None:
            raise NotOnBoundary("a function finite everywhere has no boundary")
        x = u.points.mean(axis=0) if anchor is None else np.asarray(anchor, dtype=float)
        return x, dom
    dom = u.domain
    if anchor is None:
        lo, hi = dom.bounds()
        x = 0.5 * (np.asarray(lo) + np.asarray(hi))
        if not dom.contains(x[None])[0]:
            x = u.grid.points.mean(axis=0)
    else:
        x = np.asarray(anchor, dtype=float)
    return x, dom


def _on_boundary(dom, p, tol):
    P = np.atleast_2d(p)
    if isinstance(dom, _Polytope):
        return bool(dom.on_boundary(P)[0])
    return abs(float(np.ravel(dom.distance(P))[0])) <= tol


def _evaluate(u, pts):
    vals = np.asarray(u(pts), dtype=float)
    # grid interpolation answers nan outside its sample hull
    return np.where(np.isnan(vals), np.inf, vals)


def boundary_value(u, p, anchor=None, tol=1e-7):
    """``lim_{s -> 0+} u((1-s) p + s x)`` for an interior anchor ``x``.

    The limit is taken along ``s = 2**-k`` and accelerated by first-order
    Richardson extrapolation, exact for functions that are affine near
    ``p`` along the segment.  Returns ``+inf`` when the values blow up.
    """
    p = np.asarray(p, dtype=float)
    x, dom = _anchor_and_domain(u, anchor)
    if not _on_boundary(dom, p, tol):
        raise NotOnBoundary("point is not on the boundary of the domain")
    s = 2.0 ** -np.arange(1, _DEPTH + 1)
    pts = (1 - s)[:, None] * p + s[:, None] * x
    v = _evaluate(u, pts)
    fin = np.isfinite(v)
    if not fin[-2:].all():
        return float("inf")
    est = 2 * v[-1] - v[-2]
    # a convex function along the segment never exceeds the chord limit
    if v[-1] > 1e12:
        return float("inf")
    return float(est)


@dataclass
class SlopeVerdict:
    """Outcome of :func:`slope_classifier`.

    ``kind`` is ``"Finite"``, ``"Infinite"`` or ``"Inconclusive"``.  For a
    finite verdict ``bound`` estimates the limit inner slope (its absolute
    value); for an infinite one ``rate`` is the estimated order of the
    quotient increments (``<= p_crit`` means non-summable).
    """

    kind: str
    bound: float | None = None
    rate: float | None = None
    quotients: list = field(default_factory=list)
    orders: list = field(default_factory=list)
    reason: str = ""

    def to_dict(self):
        return {
            "kind": self.kind,
            "bound": self.bound,
            "rate": self.rate,
            "quotients": self.quotients,
            "orders": self.orders,
            "reason": self.reason,
        }


def _level_quotients(u, p, x, up, scales, reach):
    h = u.grid.h
    L = float(np.linalg.norm(x - p))
    s = reach * h * 2.0 ** np.arange(scales)[::-1] / L
    s = s[s < 1]
    pts = (1 - s)[:, None] * p + s[:, None] * x
    # per unit length along the inner direction
    return s, (_evaluate(u, pts) - up) / (s * L)


def slope_classifier(levels, p, anchor=None, q_max=1e3, p_crit=0.25, rel_tol=0.01,
                     scales=3, reach=2.0):
    """Classify the inner slope of a convex grid function at a boundary point.

    Parameters
    ----------
    levels : GridFunction or sequence of GridFunction
        The same function on successively refined grids, coarsest first.
    p : boundary point
    q_max : float
        Quotients below ``-q_max`` with a decreasing trend over three levels
        count as divergent outright.
    p_crit : float
        On each level the quotient ``Q(s)`` is taken at ``s = reach * h * 2**k``
        (``k < scales``) and the order ``log2`` of the shrink factor of
        successive increments is estimated.  Orders below ``p_crit`` on the
        two finest levels mean the increments are not summable.
    rel_tol : float
        Finite when the finest quotients of the two finest levels agree to
        this relative tolerance.
    """
    if not isinstance(levels, (list, tuple)):
        levels = [levels]
    p = np.asarray(p, dtype=float)
    x, dom = _anchor_and_domain(levels[-1], anchor)
    if not _on_boundary(dom, p, 1e-7):
        raise NotOnBoundary("point is not on the boundary of the domain")
    up = None
    for u in levels[::-1]:
        if getattr(u, "boundary", None) is not None:
            up = float(np.asarray(u.boundary(p[None])).ravel()[0])
            break
    if up is None:
        up = boundary_value(levels[-1], p, x)
    if not np.isfinite(up):
        return SlopeVerdict("Infinite", rate=float("inf"), reason="boundary value is +inf")

    finest, orders = [], []
    for u in levels:
        s, q = _level_quotients(u, p, x, up, scales, reach)
        finest.append(float(q[-1]))
        d = np.diff(q)
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = d[1:] / d[:-1]
        if len(rho) and np.isfinite(rho[-1]) and rho[-1] > 0:
            orders.append(float(-np.log2(rho[-1])))
        elif len(d) and np.all(np.abs(d) <= 1e-14 * (1 + np.abs(q[:-1]))):
            orders.append(float("inf"))
        else:
            orders.append(float("nan"))
    v = SlopeVerdict("Inconclusive", quotients=finest, orders=orders)
    decreasing = len(finest) >= 3 and bool(np.all(np.diff(finest[-3:]) < 0))

    if decreasing and finest[-1] < -q_max:
        v.kind, v.rate, v.reason = "Infinite", orders[-1], "quotient below -q_max"
        return v
    if len(finest) >= 2:
        a, b = finest[-2], finest[-1]
        if abs(b - a) <= rel_tol * max(abs(b), 1e-300) or (a == b):
            v.kind, v.bound, v.reason = "Finite", abs(b), "quotient stabilized"
            return v
    last = [o for o in orders[-2:] if np.isfinite(o) or o == float("inf")]
    if len(last) == 2 and len(orders) >= 2:
        if decreasing and all(o < p_crit for o in last):
            v.kind, v.rate, v.reason = "Infinite", last[-1], "increments not summable"
            return v
        if all(o >= p_crit for o in last):
            o = last[-1]
            rho = 2.0 ** -o
            q = finest[-1]
            s, qs = _level_quotients(levels[-1], p, x, up, scales, reach)
            tail = (qs[-1] - qs[-2]) * rho / (1 - rho) if np.isfinite(o) else 0.0
            v.kind, v.bound, v.reason = "Finite", abs(q + tail), "increments shrink geometrically"
            return v
    v.reason = "no trend criterion met"
    return v
