"""Monotone wide-stencil discretization of the planar Monge-Ampere operator.

The determinant at a node is the minimum, over lattice superbases
``(e, f, g)`` with ``e + f + g = 0`` drawn from the stencil, of a
closed-form function ``H`` of the three directional second differences.
The scheme is degenerate elliptic, exact on quadratics whose reduced
superbase belongs to the stencil, and ``sqrt(H)`` is concave, which makes
the log-residual concave and Newton's method monotone.

Stencil arms that leave the domain are cut at the boundary and read the
Dirichlet data there (non-uniform second difference).
"""
from __future__ import annotations

from math import gcd

import numpy as np
import scipy.sparse as sp

from ..convex.grid import BOUNDARY, INTERIOR


def _primitive(r):
    out = []
    for a in range(0, r + 1):
        for b in range(-r, r + 1):
            if (a == 0 and b <= 0) or gcd(a, abs(b)) != 1:
                continue
            out.append((a, b))
    out.sort(key=lambda v: (max(abs(v[0]), abs(v[1])), v[0] ** 2 + v[1] ** 2, v))
    return out


# number of directions (up to sign) -> Chebyshev radius of the stencil
WIDTHS = {len(_primitive(r)): r for r in range(1, 13)}


def stencil_directions(width=16):
    """Primitive lattice vectors up to sign, shortest first.

    ``width`` must be one of the keys of ``WIDTHS`` (4, 8, 16, 24, 40, ...).
    """
    if width not in WIDTHS:
        raise ValueError(f"stencil width must be one of {sorted(WIDTHS)}")
    return np.array(_primitive(WIDTHS[width]), dtype=int)


def superbases(dirs):
    """Index triples of stencil directions forming a lattice superbase."""
    lookup = {}
    for k, (a, b) in enumerate(dirs):
        lookup[(a, b)] = k
        lookup[(-a, -b)] = k
    out = set()
    for i in range(len(dirs)):
        for j in range(i + 1, len(dirs)):
            e, f = dirs[i], dirs[j]
            if abs(e[0] * f[1] - e[1] * f[0]) != 1:
                continue
            for g in (e + f, e - f):
                k = lookup.get((int(g[0]), int(g[1])))
                if k is not None:
                    out.add(tuple(sorted((i, j, k))))
    return np.array(sorted(out), dtype=int)


def lbr_h(a, b, c):
    """``H`` and its partial derivatives for nonnegative second differences."""
    val = (2 * (a * b + b * c + c * a) - a * a - b * b - c * c) / 4
    da = (b + c - a) / 2
    db = (a + c - b) / 2
    dc = (a + b - c) / 2
    ca, cb, cc = a >= b + c, b >= a + c, c >= a + b
    val = np.where(ca, b * c, np.where(cb, a * c, np.where(cc, a * b, val)))
    da = np.where(ca, 0.0, np.where(cb, c, np.where(cc, b, da)))
    db = np.where(ca, c, np.where(cb, 0.0, np.where(cc, a, db)))
    dc = np.where(ca, b, np.where(cb, a, np.where(cc, 0.0, dc)))
    return val, da, db, dc


def _fade(t):
    """1 on ``[0, 1/2]``, 0 beyond 1, quintic smoothstep in between."""
    x = np.clip(2.0 * t - 1.0, 0.0, 1.0)
    return 1.0 - x**3 * (10.0 - 15.0 * x + 6.0 * x**2)


class WideStencilMA:
    """Discrete Monge-Ampere operator on the interior nodes of a grid.

    Parameters
    ----------
    grid : Grid
    boundary : callable
        Dirichlet data evaluated at points of the boundary.
    width : int
        Number of stencil directions (up to sign) at ordinary nodes.
    boundary_width : int, optional
        Wider stencil used at nodes closer than ``band * h`` to the
        boundary, where the Hessian of singular solutions is strongly
        anisotropic.  Arms there are short because they are cut.
    profile : float, optional
        Boundary exponent ``beta`` of the expected solution.  Near the
        boundary each directional difference is rescaled by the ratio of
        exact to discrete second derivative of the model ``-dist**beta``
        along that line.  The correction fades out smoothly between
        ``reach * h / 2`` and ``reach * h`` (at most half the inradius).  The
        weights are positive, so the scheme stays monotone.
    """

    def __init__(self, grid, boundary, width=16, boundary_width=None, band=2.0,
                 profile=None, reach=24.0):
        self.grid = grid
        self.width = width
        self.boundary_width = boundary_width or width
        self.dirs = stencil_directions(max(width, self.boundary_width))
        self.sb = superbases(self.dirs)
        g, h = grid, grid.h
        P = g.interior
        X = g.points
        N, D = len(P), len(self.dirs)
        self.N = N
        self.allowed = None
        if self.boundary_width > width:
            # superbases outside the small stencil only near the boundary
            big = np.any(self.sb >= width, axis=1)
            near = g.domain.distance(X) < band * h
            self.allowed = ~(big[None, :] & ~near[:, None])

        nbr = np.full((N, D, 2), -1, dtype=np.int64)
        tt = np.ones((N, D, 2))
        known = np.zeros((N, D, 2))
        bpts, bvals = [], []
        nx, ny = g.shape
        for d, v in enumerate(self.dirs):
            for s, sgn in enumerate((1, -1)):
                q = P + sgn * v
                inb = (q[:, 0] >= 0) & (q[:, 0] < nx) & (q[:, 1] >= 0) & (q[:, 1] < ny)
                m = np.zeros(N, dtype=np.int8)
                m[inb] = g.mask[q[inb, 0], q[inb, 1]]
                isin = m == INTERIOR
                nbr[isin, d, s] = g.index[q[isin, 0], q[isin, 1]]
                onb = m == BOUNDARY
                if np.any(onb):
                    pts = g.X[q[onb, 0], q[onb, 1]]
                    known[onb, d, s] = boundary(pts)
                    bpts.append(pts)
                    bvals.append(known[onb, d, s])
                cut = ~(isin | onb)
                if np.any(cut):
                    step = np.broadcast_to(sgn * v * h, (int(cut.sum()), 2)).astype(float)
                    t = np.asarray(g.domain.ray_exit(X[cut], step), dtype=float)
                    t = np.clip(t, 1e-12, 1.0)
                    tt[cut, d, s] = t
                    pts = X[cut] + t[:, None] * step
                    known[cut, d, s] = boundary(pts)
                    bpts.append(pts)
                    bvals.append(known[cut, d, s])
        self.nbr, self.t, self.known = nbr, tt, known
        tp, tm = tt[..., 0], tt[..., 1]
        # coefficients of the cut second difference, divided by h^2
        self.cp = 2.0 / ((tp + tm) * tp) / h**2
        self.cm = 2.0 / ((tp + tm) * tm) / h**2
        self.profile = profile
        if profile is not None:
            self.weight = self._profile_weights(X, float(profile), reach)
            self.cp = self.cp * self.weight
            self.cm = self.cm * self.weight
        else:
            self.weight = np.ones_like(tp)
        if bpts:
            bp = np.concatenate(bpts)
            bv = np.concatenate(bvals)
            _, keep = np.unique(np.round(bp, 12), axis=0, return_index=True)
            keep.sort()
            self.bpoints, self.bvalues = bp[keep], bv[keep]
        else:
            self.bpoints, self.bvalues = np.zeros((0, 2)), np.zeros(0)
        if np.any(~np.isfinite(known[nbr < 0])):
            raise ValueError("boundary data must be finite where the stencil reads it")

    def _profile_weights(self, X, beta, reach):
        h, N, D = self.grid.h, self.N, len(self.dirs)
        dom = self.grid.domain
        tp, tm = self.t[..., 0], self.t[..., 1]
        W = np.ones((N, D))
        # stay clear of the interior where the distance model has kinks
        width = min(reach * h, 0.5 * float(np.max(self.grid.dist)))
        for d, v in enumerate(self.dirs):
            step = np.broadcast_to(v * h, (N, 2)).astype(float)
            d0, d1, d2, (dp, dm) = dom.distance_along(X, step, (tp[:, d], -tm[:, d]))
            dp, dm = np.maximum(dp, 0.0), np.maximum(dm, 0.0)
            exact = -beta * d0 ** (beta - 1) * d2 - beta * (beta - 1) * d0 ** (beta - 2) * d1**2
            p0 = -(d0**beta)
            discrete = (2.0 / (tp[:, d] + tm[:, d])) * (
                (-(dp**beta) - p0) / tp[:, d] + (-(dm**beta) - p0) / tm[:, d]
            )
            with np.errstate(divide="ignore", invalid="ignore"):
                w = exact / discrete
            ok = np.isfinite(w) & (discrete > 0) & (exact > 0) & (d0 < width)
            w = np.where(ok, np.clip(w, 1e-3, 1e3), 1.0)
            # fade the correction out smoothly; a hard cutoff leaves a jump in
            # the discrete determinant that shows up in its derivatives
            W[:, d] = 1.0 + (w - 1.0) * _fade(d0 / width)
        return W

    def second_differences(self, u):
        """Directional second differences, shape ``(N, D)``."""
        up = np.where(self.nbr[..., 0] >= 0, u[np.maximum(self.nbr[..., 0], 0)], self.known[..., 0])
        um = np.where(self.nbr[..., 1] >= 0, u[np.maximum(self.nbr[..., 1], 0)], self.known[..., 1])
        u0 = u[:, None]
        return self.cp * (up - u0) + self.cm * (um - u0)

    def evaluate(self, u, jacobian=False):
        """Discrete determinant at interior nodes, optionally with its Jacobian.

        Returns ``(ma, J, active)`` where ``active`` is the index of the
        minimizing superbase per node (lowest index on ties).
        """
        d2 = self.second_differences(u)
        pos = np.maximum(d2, 0.0)
        a, b, c = (pos[:, self.sb[:, k]] for k in range(3))
        val, da, db, dc = lbr_h(a, b, c)
        if self.allowed is not None:
            val = np.where(self.allowed, val, np.inf)
        k = np.argmin(val, axis=1)
        rows = np.arange(self.N)
        ma = val[rows, k]
        if not jacobian:
            return ma, None, k
        J = self._jacobian(d2, k, [da[rows, k], db[rows, k], dc[rows, k]])
        return ma, J, k

    def _jacobian(self, d2, k, partials):
        rows = np.arange(self.N)
        R, C, V = [], [], []
        for m in range(3):
            d = self.sb[k, m]
            w = partials[m] * (d2[rows, d] > 0)
            cp, cm = self.cp[rows, d], self.cm[rows, d]
            R.append(rows)
            C.append(rows)
            V.append(-w * (cp + cm))
            for nb, cc in ((self.nbr[rows, d, 0], cp), (self.nbr[rows, d, 1], cm)):
                ok = nb >= 0
                R.append(rows[ok])
                C.append(nb[ok])
                V.append((w * cc)[ok])
        R, C, V = (np.concatenate(z) for z in (R, C, V))
        return sp.csr_matrix((V, (R, C)), shape=(self.N, self.N))
