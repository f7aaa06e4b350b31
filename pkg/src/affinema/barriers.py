"""Closed-form barriers on simplices and balls.

For ``v = -(t_0 ... t_n)^eta`` with ``eta = 2/(n+gamma)`` on a simplex and
``v = -(1-|x|^2)^eta`` with ``eta = (n+1)/(n+gamma)`` on the unit ball the
Hessian determinant is an explicit multiple of ``(-v)^(-gamma)``; both are
implemented here together with their comparison constants and the exact
solutions of ``det D^2 w = (-w)^(-gamma)`` at ``gamma = n + 2``.
"""
from __future__ import annotations

import numpy as np

from .errors import (
    DomainError,
    ExponentNotCritical,
    ExponentOutOfRange,
    OutsideBall,
    OutsideSimplex,
)

_TOL = 1e-12


class SimplexBarrier:
    """Barrier ``-(t_0 ... t_n)^(2/(n+gamma))`` on the simplex with given vertices."""

    def __init__(self, vertices, gamma):
        V = np.asarray(vertices, dtype=float)
        n = V.shape[1]
        if V.shape != (n + 1, n):
            raise DomainError("a simplex in R^n needs n+1 vertices")
        E = (V[1:] - V[0]).T
        det = np.linalg.det(E)
        if abs(det) < 1e-14:
            raise DomainError("simplex vertices are affinely dependent")
        if not gamma > -n:
            raise ExponentOutOfRange("gamma must exceed -n")
        self.vertices = V
        self.n = n
        self.gamma = float(gamma)
        self.eta = 2.0 / (n + gamma)
        # standard coordinates xi = M (x - p0); det D^2_x = det D^2_xi * det(M)^2
        self.M = np.linalg.inv(E)
        self.jac2 = float(np.linalg.det(self.M)) ** 2

    @classmethod
    def standard(cls, n, gamma):
        V = np.vstack([np.zeros(n), np.eye(n)])
        return cls(V, gamma)

    def barycentric(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        xi = (x - self.vertices[0]) @ self.M.T
        return np.column_stack([1.0 - xi.sum(axis=1), xi])

    def _checked(self, x, strict):
        t = self.barycentric(x)
        bad = np.any(t < (_TOL if strict else -_TOL), axis=1)
        if np.any(bad):
            raise OutsideSimplex("point outside the " + ("open" if strict else "closed") + " simplex")
        return np.clip(t, 0.0, None)

    def value(self, x):
        single = np.ndim(x) == 1
        t = self._checked(x, strict=False)
        v = -np.prod(t, axis=1) ** self.eta
        return v[0] if single else v

    def det(self, x):
        """Closed-form Hessian determinant at points of the open simplex."""
        single = np.ndim(x) == 1
        t = self._checked(x, strict=True)
        n, eta = self.n, self.eta
        q = np.sum(t * t, axis=1)
        mv = np.prod(t, axis=1) ** eta
        out = eta ** (n + 1) * (1.0 - (n + 1 - 1.0 / eta) * q) * mv ** (-self.gamma) * self.jac2
        return out[0] if single else out

    def bracket_coefficient(self):
        """``kappa`` in the bracket ``1 - kappa * sum t_i^2``."""
        return self.n + 1 - 1.0 / self.eta


class BallBarrier:
    """Barrier ``-(1 - |y|^2)^((n+1)/(n+gamma))`` with ``y = (x - c)/R``."""

    def __init__(self, center, radius, gamma):
        c = np.atleast_1d(np.asarray(center, dtype=float))
        if not radius > 0:
            raise DomainError("radius must be positive")
        if not gamma >= 1:
            raise ExponentOutOfRange("the ball barrier is convex only for gamma >= 1")
        self.center = c
        self.radius = float(radius)
        self.n = len(c)
        self.gamma = float(gamma)
        self.eta = (self.n + 1.0) / (self.n + gamma)

    def _y(self, x, strict):
        y = (np.atleast_2d(np.asarray(x, dtype=float)) - self.center) / self.radius
        r2 = np.sum(y * y, axis=1)
        if np.any(r2 > 1 + _TOL) or (strict and np.any(r2 >= 1)):
            raise OutsideBall("point outside the ball")
        return y, np.minimum(r2, 1.0)

    def value(self, x):
        single = np.ndim(x) == 1
        _, r2 = self._y(x, strict=False)
        v = -((1.0 - r2) ** self.eta)
        return v[0] if single else v

    def value_and_det(self, x):
        single = np.ndim(x) == 1
        _, r2 = self._y(x, strict=True)
        n, eta = self.n, self.eta
        v = -((1.0 - r2) ** eta)
        det = (2 * eta) ** n * (1.0 + (1.0 - 2 * eta) * r2) * (-v) ** (-self.gamma)
        det = det * self.radius ** (-2 * n)
        if single:
            return v[0], det[0]
        return v, det

    def det(self, x):
        return self.value_and_det(x)[1]


def simplex_value(b: SimplexBarrier, x):
    return b.value(x)


def simplex_det(b: SimplexBarrier, x):
    return b.det(x)


def ball_value_and_det(b: BallBarrier, x):
    return b.value_and_det(x)


def barrier_constants(b):
    """Sharp ``(C1, C2)`` with ``C1 (-v)^-gamma <= det D^2 v <= C2 (-v)^-gamma``."""
    n, eta = b.n, b.eta
    if isinstance(b, SimplexBarrier):
        if not b.gamma > n:
            raise ExponentOutOfRange("simplex constants need gamma > n")
        kappa = b.bracket_coefficient()
        # sum t_i^2 ranges over [1/(n+1), 1) on the open simplex
        ends = np.array([1.0 - kappa / (n + 1), 1.0 - kappa])
        scale = eta ** (n + 1) * b.jac2
    elif isinstance(b, BallBarrier):
        if not b.gamma > 1:
            raise ExponentOutOfRange("ball constants need gamma > 1")
        # |y|^2 ranges over [0, 1)
        ends = np.array([1.0, 1.0 + (1.0 - 2 * eta)])
        scale = (2 * eta) ** n * b.radius ** (-2 * n)
    else:
        raise TypeError("expected a SimplexBarrier or BallBarrier")
    return float(scale * ends.min()), float(scale * ends.max())


def exact_solution(domain, n, gamma=None):
    """Exact solution of ``det D^2 w = (-w)^(-(n+2))`` on a simplex or ball.

    ``domain`` is a :class:`SimplexBarrier`/:class:`BallBarrier`, a vertex
    array of a simplex, or a ``Disk``.  Returns a callable ``w``.
    """
    gamma = n + 2.0 if gamma is None else float(gamma)
    if not np.isclose(gamma, n + 2.0):
        raise ExponentNotCritical("closed forms exist only for gamma = n + 2")
    from .convex.domains import Disk, Polygon

    if isinstance(domain, Disk):
        domain = BallBarrier(domain.center, domain.radius, gamma)
    elif isinstance(domain, Polygon):
        if len(domain.vertices) != 3:
            raise DomainError("polygonal closed form needs a triangle")
        domain = SimplexBarrier(domain.vertices, gamma)
    elif not isinstance(domain, (SimplexBarrier, BallBarrier)):
        domain = SimplexBarrier(domain, gamma)
    b = domain
    if b.n != n:
        raise DomainError("dimension mismatch")
    if isinstance(b, BallBarrier):
        # det(mu v) = mu^(n+gamma) R^(-2n) (-mu v)^(-gamma)
        mu = b.radius ** (2.0 * n / (n + gamma))
    else:
        mu = (b.eta ** (n + 1) * b.jac2) ** (-1.0 / (n + gamma))

    def w(x):
        return mu * b.value(x)

    w.scale = mu
    w.barrier = b
    return w


def finite_difference_det(f, x, step=1e-4):
    """Determinant of the central-difference Hessian of ``f`` at points ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    m, n = x.shape
    H = np.empty((m, n, n))
    f0 = f(x)
    E = np.eye(n) * step
    for i in range(n):
        H[:, i, i] = (f(x + E[i]) - 2 * f0 + f(x - E[i])) / step**2
        for j in range(i + 1, n):
            val = (f(x + E[i] + E[j]) - f(x + E[i] - E[j]) - f(x - E[i] + E[j]) + f(x - E[i] - E[j])) / (
                4 * step**2
            )
            H[:, i, j] = H[:, j, i] = val
    return np.linalg.det(H), H


def barrier_dump(b, points, step=1e-4):
    """Rows ``(x..., value, det_closed_form, det_finite_difference)``."""
    pts = np.atleast_2d(points)
    if isinstance(b, BallBarrier):
        val, det = b.value_and_det(pts)
    else:
        val, det = b.value(pts), b.det(pts)
    fd, _ = finite_difference_det(b.value, pts, step)
    return np.column_stack([pts, val, det, fd])
