"""Piecewise-linear convex functions with extended real values.

Two representations share one class:

* ``"hull"``: the lower convex hull of finitely many lifted points
  ``(x_i, y_i)``, equal to ``+inf`` outside ``conv{x_i}``;
* ``"max"``: a maximum of finitely many affine functions, finite on all of
  ``R^n``.

The Legendre transform maps each kind onto the other exactly, which makes
``u** = u`` hold to round-off.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..errors import DomainError, RegionOutsideDomain

_CHUNK = 4096
_BLOCK = 2_000_000  # entries per evaluation block


def _rows(k):
    return max(1, min(_CHUNK, _BLOCK // max(k, 1)))


def _max_affine(X, A, b):
    """``max_k (X @ A[k] + b[k])`` row by row, in bounded-memory blocks."""
    out = np.empty(len(X))
    step = _rows(len(A))
    for s in range(0, len(X), step):
        out[s : s + step] = np.max(X[s : s + step] @ A.T + b, axis=1)
    return out


class PLConvexFunction:
    """Extended-real PL convex function in dimension ``n <= 3``.

    Parameters
    ----------
    points : array_like, shape (m, n)
        Support points (hull kind) or slopes (max kind).
    values : array_like, shape (m,)
        Heights (hull kind) or intercepts (max kind).
    kind : {"hull", "max"}
    """

    def __init__(self, points, values, kind="hull"):
        P = np.atleast_2d(np.asarray(points, dtype=float))
        v = np.asarray(values, dtype=float).ravel()
        if P.shape[0] != v.shape[0] or P.shape[0] == 0:
            raise ValueError("need at least one point with a matching value")
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(P)):
            raise ValueError("support points and values must be finite")
        if P.shape[1] > 3:
            raise DomainError("dimension is capped at 3")
        if kind not in ("hull", "max"):
            raise ValueError("kind must be 'hull' or 'max'")
        self.kind = kind
        self.n = P.shape[1]
        if kind == "hull":
            self._build_hull(P, v)
        else:
            self._build_max(P, v)

    # construction -----------------------------------------------------
    def _build_hull(self, P, v):
        facets, grads, offs, verts = _lower_hull(P, v)
        self.source_index = verts
        self.points = P[verts]
        self.values = v[verts]
        remap = -np.ones(len(P), dtype=int)
        remap[verts] = np.arange(len(verts))
        self.facets = remap[facets] if len(facets) else facets
        self.grads = grads
        self.offsets = offs
        self._dom = _Polytope(self.points)

    def _build_max(self, A, c):
        # drop duplicate slopes, keeping the largest intercept
        order = np.lexsort((-c, *A.T[::-1]))
        A, c = A[order], c[order]
        keep = np.ones(len(A), dtype=bool)
        keep[1:] = np.any(np.abs(np.diff(A, axis=0)) > 0, axis=1)
        A, c = A[keep], c[keep]
        # the dual hull tells which pieces are active and where they meet
        dual = PLConvexFunction(A, -c, kind="hull")
        active = dual.source_index
        self.slopes = A[active]
        self.intercepts = c[active]
        # vertices of the piece arrangement are the dual facet gradients
        self.points = dual.grads.copy()
        self.values = self._max_eval(self.points) if len(self.points) else np.zeros(0)
        self._dual = dual

    # evaluation -------------------------------------------------------
    def _max_eval(self, X):
        return _max_affine(X, self.slopes, self.intercepts)

    def __call__(self, x):
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if self.kind == "max":
            out = self._max_eval(X)
        else:
            out = np.full(len(X), np.inf)
            inside = self._dom.contains(X)
            if np.any(inside):
                Xi = X[inside]
                if len(self.grads):
                    out[inside] = _max_affine(Xi, self.grads, self.offsets)
                else:
                    out[inside] = self._low_dim_eval(Xi)
        return out[0] if single else out

    def _low_dim_eval(self, X):
        # support on a point or segment: interpolate along it
        if len(self.points) == 1:
            return np.full(len(X), self.values[0])
        p0, p1 = self.points[0], self.points[-1]
        d = p1 - p0
        t = (X - p0) @ d / (d @ d)
        order = np.argsort((self.points - p0) @ d)
        ts = ((self.points - p0) @ d / (d @ d))[order]
        return np.interp(t, ts, self.values[order])

    def extended(self, x):
        """Maximum of the facet planes, finite everywhere.

        Agrees with the function on its domain and gives the natural convex
        extension just outside it, e.g. between a boundary chord and the arc.
        """
        X = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "max":
            return self._max_eval(X)
        if not len(self.grads):
            return self._low_dim_eval(X)
        return _max_affine(X, self.grads, self.offsets)

    @property
    def domain(self):
        """Closed domain of finiteness (``None`` means all of ``R^n``)."""
        return None if self.kind == "max" else self._dom

    def in_interior(self, X, tol=1e-12):
        if self.kind == "max":
            return np.ones(len(np.atleast_2d(X)), dtype=bool)
        return self._dom.contains(np.atleast_2d(X), tol=-tol)

    # subgradient cells ------------------------------------------------
    def _incidence(self):
        inc = [[] for _ in range(len(self.points))]
        for f, simplex in enumerate(self.facets):
            for i in simplex:
                inc[i].append(f)
        return inc

    def interior_vertices(self):
        if self.kind != "hull" or len(self.grads) == 0:
            return np.zeros(0, dtype=int)
        return np.flatnonzero(~self._dom.on_boundary(self.points))

    def cell_measures(self):
        """Volume of the subgradient cell of every support point.

        Hull-boundary vertices have unbounded cells and get ``inf``.
        """
        if self.kind != "hull":
            raise DomainError("cells are defined for hull-kind functions")
        out = np.full(len(self.points), np.inf)
        if len(self.grads) == 0:
            return out
        inc = self._incidence()
        for i in self.interior_vertices():
            out[i] = _volume(self.grads[inc[i]])
        return out

    def cell_polygon(self, i):
        """Vertices of the (bounded) subgradient cell of support point ``i``."""
        inc = self._incidence()[i]
        G = self.grads[inc]
        if self.n == 2 and len(G) >= 3:
            try:
                hull = ConvexHull(G)
                return G[hull.vertices]
            except QhullError:
                return G
        return G

    # export -----------------------------------------------------------
    def to_csv(self):
        lines = ["x,y,value"] if self.n == 2 else [",".join([f"x{k+1}" for k in range(self.n)] + ["value"])]
        for p, v in zip(self.points, self.values):
            lines.append(",".join(format(float(c), ".17g") for c in (*p, v)))
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"PLConvexFunction(kind={self.kind!r}, n={self.n}, support={len(self.points)})"


class _Polytope:
    """Convex hull of finitely many points with tolerant membership tests."""

    def __init__(self, P):
        self.P = P
        self.n = P.shape[1]
        scale = max(1.0, float(np.max(np.abs(P))))
        self.tol = 1e-11 * scale
        self.full = False
        if len(P) > self.n:
            try:
                hull = ConvexHull(P) if self.n > 1 else None
                if hull is not None:
                    self.eq = hull.equations
                    self.full = True
            except QhullError:
                self.full = False
        if self.n == 1:
            self.lo, self.hi = float(P.min()), float(P.max())
            self.full = self.hi > self.lo

    def contains(self, X, tol=None):
        tol = self.tol if tol is None else tol
        X = np.atleast_2d(X)
        if self.n == 1:
            return (X[:, 0] >= self.lo - tol) & (X[:, 0] <= self.hi + tol)
        if self.full:
            return _max_affine(X, self.eq[:, :-1], self.eq[:, -1]) <= tol
        # lower-dimensional support: point or segment
        p0 = self.P[0]
        if len(self.P) == 1 or np.allclose(self.P, p0):
            return np.linalg.norm(X - p0, axis=1) <= max(tol, self.tol)
        d = self.P[np.argmax(np.linalg.norm(self.P - p0, axis=1))] - p0
        t = (X - p0) @ d / (d @ d)
        ts = (self.P - p0) @ d / (d @ d)
        off = np.linalg.norm(X - p0 - t[:, None] * d, axis=1)
        return (off <= max(tol, self.tol)) & (t >= ts.min() - 1e-12) & (t <= ts.max() + 1e-12)

    def on_boundary(self, X):
        X = np.atleast_2d(X)
        if self.n == 1:
            return (np.abs(X[:, 0] - self.lo) <= self.tol) | (np.abs(X[:, 0] - self.hi) <= self.tol)
        if not self.full:
            return np.ones(len(X), dtype=bool)
        # inside points have all facet values <= 0, so the max is the one nearest zero
        return np.abs(_max_affine(X, self.eq[:, :-1], self.eq[:, -1])) <= self.tol


def _lower_hull(P, v):
    """Lower facets of the lifted point set.

    Returns ``(facets, gradients, offsets, vertex_indices)``; facet ``f`` is
    the graph of ``x -> grads[f] . x + offsets[f]``.
    """
    m, n = P.shape
    if m == 1:
        return np.zeros((0, n + 1), dtype=int), np.zeros((0, n)), np.zeros(0), np.array([0])
    L = np.column_stack([P, v])
    span = np.ptp(P, axis=0)
    if np.linalg.matrix_rank(P - P[0], tol=1e-12 * max(1.0, span.max())) < n:
        return _lower_hull_degenerate(P, v)
    # a far point above the centroid keeps the lifted hull full-dimensional
    top = np.append(P.mean(axis=0), v.max() + 10.0 * (np.ptp(v) + span.max() + 1.0))
    hull = ConvexHull(np.vstack([L, top]), qhull_options="Qt Qc")
    far = m
    eq = hull.equations
    low = (eq[:, n] < -1e-12) & ~np.any(hull.simplices == far, axis=1)
    facets = hull.simplices[low]
    normal = eq[low]
    grads = -normal[:, :n] / normal[:, n : n + 1]
    offs = -normal[:, n + 1] / normal[:, n]
    used = np.unique(facets)
    # drop lifted points strictly above their facet plane (kept by Qt as
    # coplanar vertices only when they touch it)
    vals_at = _max_affine(P[used], grads, offs)
    on = np.abs(v[used] - vals_at) <= 1e-9 * (1.0 + np.abs(v[used]))
    used = used[on]
    return facets, grads, offs, used


def _lower_hull_degenerate(P, v):
    n = P.shape[1]
    p0 = P[0]
    if np.allclose(P, p0):
        k = int(np.argmin(v))
        return np.zeros((0, n + 1), dtype=int), np.zeros((0, n)), np.zeros(0), np.array([k])
    d = P[np.argmax(np.linalg.norm(P - p0, axis=1))] - p0
    t = (P - p0) @ d / (d @ d)
    # 1-D lower hull along the segment (monotone chain)
    order = np.lexsort((v, t))
    chain = []
    for i in order:
        if chain and abs(t[chain[-1]] - t[i]) < 1e-14:
            continue
        while len(chain) >= 2:
            a, b = chain[-2], chain[-1]
            cross = (t[b] - t[a]) * (v[i] - v[a]) - (v[b] - v[a]) * (t[i] - t[a])
            if cross <= 0:
                chain.pop()
            else:
                break
        chain.append(i)
    return np.zeros((0, n + 1), dtype=int), np.zeros((0, n)), np.zeros(0), np.array(chain)


def _volume(G):
    n = G.shape[1]
    if len(G) <= n:
        return 0.0
    try:
        return float(ConvexHull(G).volume)
    except QhullError:
        return 0.0


# -------------------------------------------------------------------------
# operations


def legendre_transform(u: PLConvexFunction) -> PLConvexFunction:
    """Exact convex conjugate ``u*(y) = sup_x (x.y - u(x))``."""
    if u.kind == "hull":
        return PLConvexFunction(u.points, -u.values, kind="max")
    return PLConvexFunction(u.slopes, -u.intercepts, kind="hull")


def legendre_involution_check(u: PLConvexFunction):
    """Max relative deviation of ``u**`` from ``u`` at the support points.

    ``u**`` at a point ``x`` is computed as ``max_g (x.g - u*(g))`` over the
    vertices ``g`` of ``u*`` when ``u*`` has any, which is where the
    supremum of a PL function is attained.
    """
    ustar = legendre_transform(u)
    X = u.points
    if u.kind == "hull":
        if len(ustar.points):
            back = _max_affine(X, ustar.points, -ustar.values)
        else:
            back = legendre_transform(ustar)(X)
        ref = u.values
    else:
        back = legendre_transform(ustar)(X)
        ref = u(X)
    err = np.abs(back - ref) / np.maximum(1.0, np.abs(ref))
    return {"max_abs_error": float(np.max(np.abs(back - ref))), "max_rel_error": float(np.max(err)),
            "n_points": int(len(X))}


def convex_envelope(domain, phi, resolution=None) -> PLConvexFunction:
    """Lower convex hull of the lifted finite boundary samples of ``phi``.

    With linear interpolation (or an exact ``phi.func``) the boundary is
    resampled at ``resolution`` equally spaced parameters in addition to the
    given samples.
    """
    pts, vals = phi.finite_points()
    if resolution is not None and resolution < len(vals):
        raise ValueError("resolution must be at least the number of finite samples")
    if resolution and phi.interpolation == "linear" and domain.dim == 2:
        s = np.arange(resolution) / resolution
        extra = phi.at_param(s) if phi.func is None else phi(domain.boundary_point(s))
        ok = np.isfinite(extra)
        pts = np.vstack([pts, domain.boundary_point(s[ok])])
        vals = np.concatenate([vals, extra[ok]])
        if isinstance(getattr(domain, "vertices", None), np.ndarray):
            vs = domain.vertex_params()
            vv = phi.at_param(vs) if phi.func is None else phi(domain.vertices)
            ok = np.isfinite(vv)
            pts = np.vstack([pts, domain.vertices[ok]])
            vals = np.concatenate([vals, vv[ok]])
    return PLConvexFunction(pts, vals)


def _region_weights(region, X, tol):
    """Share of each point's neighbourhood lying in the closed region."""
    d = region.distance(X)
    w = np.where(d > tol, 1.0, 0.0)
    edge = np.abs(d) <= tol
    if np.any(edge):
        w[edge] = 0.5
        V = getattr(region, "vertices", None)
        if isinstance(V, np.ndarray):
            ang = region.interior_angles()
            for k, v in enumerate(V):
                at = edge & (np.linalg.norm(X - v, axis=1) <= tol)
                w[at] = ang[k] / (2 * np.pi)
    return w


def ma_measure(u: PLConvexFunction, region, tol=1e-9) -> float:
    """Alexandrov Monge-Ampere mass of ``region``.

    Sums subgradient-cell areas of support points in the region.  Points on
    the region's boundary count with the fraction of a small disk around
    them that lies inside (one half on an edge, angle over ``2 pi`` at a
    corner), which keeps the mass additive over regions sharing edges.
    """
    if u.kind != "hull" or u.n != 2:
        raise DomainError("ma_measure needs a planar hull-kind function")
    probe = _region_probe(region)
    if not np.all(u.in_interior(probe, tol=1e-12)):
        raise RegionOutsideDomain("region is not inside the interior of dom u")
    w = _region_weights(region, u.points, tol)
    sel = np.flatnonzero(w > 0)
    if len(sel) == 0:
        return 0.0
    cells = u.cell_measures()
    return float(np.sum(w[sel] * cells[sel]))


def _region_probe(region):
    V = getattr(region, "vertices", None)
    if isinstance(V, np.ndarray):
        return V
    return region.boundary_point(np.arange(64) / 64)


def pl_from_grid(gf) -> PLConvexFunction:
    """Lower hull of a grid function's finite node and boundary samples."""
    pts, vals = gf.sample_cloud()
    return PLConvexFunction(pts, vals)
