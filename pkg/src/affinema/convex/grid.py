"""Structured grids clipped to a convex domain and functions sampled on them."""
from __future__ import annotations

import numpy as np

from ..errors import GridMismatch

EXTERIOR, INTERIOR, BOUNDARY = 0, 1, 2


class Grid:
    """Lattice ``h * Z^2`` restricted to the closure of ``domain``.

    The lattice is anchored at the origin, so grids with the same ``h`` on
    nested domains share nodes.  ``mask`` is indexed ``[i, j]`` with ``i``
    along the first coordinate.  Nodes closer than ``btol * h`` to the
    boundary are treated as boundary nodes.
    """

    def __init__(self, domain, h, btol=1e-6):
        if h <= 0:
            raise ValueError("grid spacing must be positive")
        self.domain = domain
        self.h = float(h)
        lo, hi = domain.bounds()
        eps = 1e-9
        self.imin = np.floor(np.asarray(lo) / h + eps).astype(int)
        imax = np.ceil(np.asarray(hi) / h - eps).astype(int)
        self.shape = tuple(int(v) for v in (imax - self.imin + 1))
        ii, jj = np.meshgrid(np.arange(self.shape[0]), np.arange(self.shape[1]), indexing="ij")
        self.X = (np.stack([ii, jj], axis=-1) + self.imin) * self.h
        dist = domain.distance(self.X)
        tol = btol * self.h
        mask = np.full(self.shape, EXTERIOR, dtype=np.int8)
        mask[dist > tol] = INTERIOR
        mask[np.abs(dist) <= tol] = BOUNDARY
        self.mask = mask
        self.dist = dist
        self.interior = np.argwhere(mask == INTERIOR)
        self.n_interior = len(self.interior)
        self.index = np.full(self.shape, -1, dtype=np.int64)
        self.index[tuple(self.interior.T)] = np.arange(self.n_interior)

    @property
    def points(self):
        """Coordinates of interior nodes in row-major order."""
        return self.X[tuple(self.interior.T)]

    def same_lattice(self, other):
        return np.isclose(self.h, other.h, rtol=0, atol=1e-15)

    def node_of(self, x):
        """Lattice indices ``[i, j]`` in this grid for points ``x``."""
        return np.rint(np.asarray(x) / self.h).astype(int) - self.imin

    def __eq__(self, other):
        return (
            isinstance(other, Grid)
            and self.same_lattice(other)
            and self.shape == other.shape
            and np.array_equal(self.imin, other.imin)
            and np.array_equal(self.mask, other.mask)
        )

    __hash__ = object.__hash__


class GridFunction:
    """Values on a :class:`Grid` plus samples on the boundary.

    ``values`` has the grid shape with ``nan`` at exterior nodes; boundary
    nodes may hold ``+inf``.  ``bpoints``/``bvalues`` are extra samples on
    the boundary curve used for interpolation and hull constructions, and
    ``boundary`` (optional) evaluates the Dirichlet data anywhere on it.
    """

    def __init__(self, grid, values, bpoints=None, bvalues=None, boundary=None):
        values = np.array(values, dtype=float)
        if values.shape != grid.shape:
            raise GridMismatch(f"values shape {values.shape} differs from grid {grid.shape}")
        values[grid.mask == EXTERIOR] = np.nan
        if not np.all(np.isfinite(values[grid.mask == INTERIOR])):
            raise ValueError("interior values must be finite")
        self.grid = grid
        self.values = values
        self.bpoints = np.zeros((0, 2)) if bpoints is None else np.asarray(bpoints, dtype=float)
        self.bvalues = np.zeros(0) if bvalues is None else np.asarray(bvalues, dtype=float)
        self.boundary = boundary
        self._interp = None

    @property
    def h(self):
        return self.grid.h

    @property
    def domain(self):
        return self.grid.domain

    def interior_values(self):
        return self.values[tuple(self.grid.interior.T)]

    def sample_cloud(self, finite_only=True):
        """All interior/boundary nodes and boundary samples as ``(points, values)``."""
        m = self.grid.mask != EXTERIOR
        pts = np.concatenate([self.grid.X[m], self.bpoints])
        vals = np.concatenate([self.values[m], self.bvalues])
        if finite_only:
            keep = np.isfinite(vals)
            pts, vals = pts[keep], vals[keep]
        return pts, vals

    def __call__(self, x):
        """Piecewise-linear interpolation; ``nan`` outside the sampled hull."""
        if self._interp is None:
            from scipy.interpolate import LinearNDInterpolator

            pts, vals = self.sample_cloud()
            self._interp = LinearNDInterpolator(pts, vals)
        return self._interp(np.asarray(x, dtype=float))

    def with_values(self, values):
        return GridFunction(self.grid, values, self.bpoints, self.bvalues, self.boundary)

    def convexity_certificate(self, directions=None):
        """Minimum second difference over interior nodes and lattice directions.

        Only full-length stencil arms inside the closed domain are used.
        """
        if directions is None:
            directions = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)]
        v, mask = self.values, self.grid.mask
        best = np.inf
        nx, ny = self.grid.shape
        for a, b in directions:
            ip = self.grid.interior
            fp = ip + np.array([a, b])
            fm = ip - np.array([a, b])
            ok = np.all((fp >= 0) & (fp < [nx, ny]) & (fm >= 0) & (fm < [nx, ny]), axis=1)
            ip, fp, fm = ip[ok], fp[ok], fm[ok]
            ok = (mask[tuple(fp.T)] != EXTERIOR) & (mask[tuple(fm.T)] != EXTERIOR)
            ip, fp, fm = ip[ok], fp[ok], fm[ok]
            if len(ip) == 0:
                continue
            d2 = v[tuple(fp.T)] + v[tuple(fm.T)] - 2 * v[tuple(ip.T)]
            d2 = d2[np.isfinite(d2)] / ((a * a + b * b) * self.h**2)
            if d2.size:
                best = min(best, float(d2.min()))
        return best

    def to_csv(self, path_or_buf=None):
        """CSV text with columns ``i,j,x,y,value,mask``; row-major node order."""
        lines = ["i,j,x,y,value,mask"]
        g = self.grid
        for i in range(g.shape[0]):
            for j in range(g.shape[1]):
                m = int(g.mask[i, j])
                if m == EXTERIOR:
                    continue
                x, y = g.X[i, j]
                lines.append(f"{i},{j},{_fmt(x)},{_fmt(y)},{_fmt(self.values[i, j])},{m}")
        text = "\n".join(lines) + "\n"
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w") as fh:
                fh.write(text)
        return text


def _fmt(v):
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(float(v), ".17g")


def check_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatch("grid functions live on different grids")
