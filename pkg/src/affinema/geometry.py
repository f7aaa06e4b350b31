"""Hypersurfaces built from convex solutions through the Legendre map.

A convex ``u`` on a planar domain gives the surface point
``f(x) = (grad u, x . grad u - u)`` on the graph of ``u*``.  With
``w_a = -(det D^2 u)^(-a/(n+2))`` the transversal field is the Legendre map of
``w_a``, the metric is ``-D^2 u / w_a`` and the shape operator is
``(D^2 u)^-1 D^2 w_a``.

Derivatives are fourth-order central differences on the grid.  ``D^2 w_a``
is obtained by differencing ``w_a`` after it has been tabulated on the whole
grid, so a sample needs two rings of valid nodes for ``u`` and two more for
``w_a``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex.grid import EXTERIOR, GridFunction
from .convex.plconvex import PLConvexFunction, legendre_transform, pl_from_grid
from .errors import (
    DegenerateHessian,
    NonNegativeValues,
    SampleTooCloseToBoundary,
)
from .runconfig import atomic_write

_N = 2

# weights of the fourth-order first derivative at offsets -2..2
_D1 = {2: -1.0, 1: 8.0, -1: -8.0, -2: 1.0}
# and of the second derivative
_D2 = {2: -1.0, 1: 16.0, 0: -30.0, -1: 16.0, -2: -1.0}


def _shift(V, a, b):
    """``V[i + a, j + b]`` with nan off the array."""
    out = np.full_like(V, np.nan)
    nx, ny = V.shape
    xs = slice(max(0, -a), min(nx, nx - a))
    ys = slice(max(0, -b), min(ny, ny - b))
    xd = slice(max(0, a), min(nx, nx + a))
    yd = slice(max(0, b), min(ny, ny + b))
    out[xs, ys] = V[xd, yd]
    return out


def grid_gradient(V, h):
    """Fourth-order central gradient, shape ``V.shape + (2,)``; nan where the stencil leaves the data."""
    gx = sum(c * _shift(V, k, 0) for k, c in _D1.items()) / (12 * h)
    gy = sum(c * _shift(V, 0, k) for k, c in _D1.items()) / (12 * h)
    return np.stack([gx, gy], axis=-1)


def grid_hessian(V, h):
    """Fourth-order central Hessian, shape ``V.shape + (2, 2)``.

    The mixed derivative is the tensor product of two first-derivative
    stencils, so every entry reaches two nodes out along each axis.
    """
    xx = sum(c * _shift(V, k, 0) for k, c in _D2.items()) / (12 * h * h)
    yy = sum(c * _shift(V, 0, k) for k, c in _D2.items()) / (12 * h * h)
    xy = sum(ci * cj * _shift(V, i, j) for i, ci in _D1.items() for j, cj in _D1.items()) / (144 * h * h)
    H = np.empty(V.shape + (2, 2))
    H[..., 0, 0], H[..., 1, 1] = xx, yy
    H[..., 0, 1] = H[..., 1, 0] = xy
    return H


def _finite_values(u: GridFunction):
    V = np.array(u.values, dtype=float)
    V[~np.isfinite(V)] = np.nan
    V[u.grid.mask == EXTERIOR] = np.nan
    return V


def interior_region(grid, area_fraction=0.8):
    """Boolean node mask of the deepest ``area_fraction`` of the domain.

    The region is a superlevel set of the distance to the boundary, with the
    level picked so that it holds the requested share of interior nodes.
    """
    inside = grid.mask != EXTERIOR
    d = grid.dist[inside]
    level = np.quantile(d, 1.0 - area_fraction)
    return inside & (grid.dist >= level)


def _sample_nodes(u, samples, margin):
    """Lattice indices of the requested samples.

    ``samples`` may be None (every node at least ``margin`` steps inside),
    a boolean mask over the grid, or an array of lattice points.
    """
    g = u.grid
    if samples is None:
        return np.argwhere((g.mask != EXTERIOR) & (g.dist >= margin * g.h - 1e-12)), False
    S = np.asarray(samples)
    if S.dtype == bool:
        if S.shape != g.shape:
            raise ValueError("sample mask must have the grid shape")
        nodes = np.argwhere(S)
    else:
        X = np.atleast_2d(S.astype(float))
        nodes = g.node_of(X)
        if not np.allclose((nodes + g.imin) * g.h, X, atol=1e-9 * max(1.0, g.h)):
            raise ValueError("samples must be lattice nodes of the grid")
    if len(nodes) and (np.any(nodes < 0) or np.any(nodes >= g.shape)):
        raise SampleTooCloseToBoundary("sample outside the grid")
    if len(nodes) and np.any(g.dist[tuple(nodes.T)] < margin * g.h - 1e-12):
        raise SampleTooCloseToBoundary(f"samples must keep a margin of {margin}h from the boundary")
    return nodes, True


@dataclass
class LegendreCloud:
    """Surface points ``(grad u, x . grad u - u)`` at lattice nodes."""

    x: np.ndarray
    points: np.ndarray
    nodes: np.ndarray
    grid: object


def legendre_map(u: GridFunction, samples=None) -> LegendreCloud:
    """Legendre map of a grid function at interior nodes.

    Samples must stay ``2h`` inside the domain; with ``samples=None`` every
    node whose stencil is complete is used.
    """
    V = _finite_values(u)
    G = grid_gradient(V, u.h)
    nodes, explicit = _sample_nodes(u, samples, 2)
    grad = G[tuple(nodes.T)]
    ok = np.all(np.isfinite(grad), axis=1)
    if explicit and not ok.all():
        raise SampleTooCloseToBoundary("difference stencil leaves the domain at some samples")
    nodes, grad = nodes[ok], grad[ok]
    x = u.grid.X[tuple(nodes.T)]
    height = np.sum(x * grad, axis=1) - V[tuple(nodes.T)]
    return LegendreCloud(x, np.column_stack([grad, height]), nodes, u.grid)


def dictionary_gap(u: GridFunction, cloud: LegendreCloud) -> float:
    """Largest vertical gap between the cloud and the conjugate of the PL hull of ``u``."""
    ustar = legendre_transform(pl_from_grid(u))
    return float(np.max(np.abs(cloud.points[:, 2] - ustar(cloud.points[:, :2]))))


@dataclass
class HypersurfaceSample:
    """Affine-geometric data of ``graph(u*)`` at lattice nodes.

    ``x`` are the primal points, ``f`` the surface points, ``normal`` the
    transversal field, ``metric``/``shape`` the 2x2 matrices and ``kappa``
    the determinant of ``shape``.
    """

    x: np.ndarray
    f: np.ndarray
    normal: np.ndarray
    metric: np.ndarray
    shape: np.ndarray
    kappa: np.ndarray
    alpha: float
    hessian: np.ndarray
    w_alpha: np.ndarray
    nodes: np.ndarray
    grid: object

    def symmetry_defect(self):
        """Relative asymmetry of the metric and of ``D^2 u . shape``."""
        def rel(M):
            num = np.abs(M[:, 0, 1] - M[:, 1, 0])
            den = np.maximum(np.max(np.abs(M), axis=(1, 2)), 1e-300)
            return float(np.max(num / den)) if len(M) else 0.0

        return max(rel(self.metric), rel(self.hessian @ self.shape))


def li_normal_field(u: GridFunction, alpha, samples=None) -> HypersurfaceSample:
    """Transversal field, metric, shape operator and curvature at samples.

    ``w_a`` is tabulated on the whole grid before its Hessian is taken.
    Explicit samples whose nested stencil leaves the domain raise
    :class:`SampleTooCloseToBoundary`; with ``samples=None`` they are skipped.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    h = u.h
    V = _finite_values(u)
    Hu = grid_hessian(V, h)
    det = np.linalg.det(np.nan_to_num(Hu))
    det[np.isnan(Hu[..., 0, 0]) | np.isnan(Hu[..., 0, 1]) | np.isnan(Hu[..., 1, 1])] = np.nan
    with np.errstate(invalid="ignore", divide="ignore"):
        W = np.where(det > 0, -np.power(np.where(det > 0, det, 1.0), -alpha / (_N + 2)), np.nan)
    Gu = grid_gradient(V, h)
    Gw = grid_gradient(W, h)
    Hw = grid_hessian(W, h)

    nodes, explicit = _sample_nodes(u, samples, 2)
    idx = tuple(nodes.T)
    d = det[idx]
    if np.any(np.isfinite(d) & (d <= 0)):
        bad = nodes[np.isfinite(d) & (d <= 0)][0]
        raise DegenerateHessian(f"det D^2 u <= 0 at node {tuple(int(k) for k in bad)}")
    parts = [Hu[idx].reshape(len(nodes), -1), Hw[idx].reshape(len(nodes), -1), Gu[idx], Gw[idx]]
    ok = np.all(np.isfinite(np.concatenate(parts, axis=1)), axis=1)
    if explicit and not ok.all():
        raise SampleTooCloseToBoundary("nested difference stencil leaves the domain at some samples")
    nodes = nodes[ok]
    idx = tuple(nodes.T)
    x = u.grid.X[idx]
    Du, Dw = Hu[idx], Hw[idx]
    wa = W[idx]
    gu, gw = Gu[idx], Gw[idx]
    f = np.column_stack([gu, np.sum(x * gu, axis=1) - V[idx]])
    normal = np.column_stack([gw, np.sum(x * gw, axis=1) - wa])
    metric = -Du / wa[:, None, None]
    shape = np.linalg.solve(Du, Dw)
    kappa = np.linalg.det(Dw) / np.linalg.det(Du)
    return HypersurfaceSample(x, f, normal, metric, shape, kappa, float(alpha), Du, wa, nodes, u.grid)


def gauss_kronecker(sample: HypersurfaceSample, region=None):
    """Per-point curvature with its mean and largest relative deviation.

    ``region`` is an optional boolean grid mask restricting the statistics.
    """
    k = np.asarray(sample.kappa)
    if region is not None:
        keep = np.asarray(region)[tuple(sample.nodes.T)]
        k = k[keep]
    if k.size == 0:
        return k, {"mean": float("nan"), "max_deviation": float("nan"), "n": 0}
    mean = float(np.mean(k))
    scale = abs(mean) if mean != 0 else 1.0
    return k, {
        "mean": mean,
        "max_deviation": float(np.max(np.abs(k - mean)) / scale),
        "min": float(np.min(k)),
        "max": float(np.max(k)),
        "n": int(k.size),
    }


def hypersphere_residuals(u: GridFunction, alpha, c=1.0, samples=None):
    """Nodes and ``log det D^2 u + (n+2)/alpha log(-c u)`` at each sample."""
    V = _finite_values(u)
    inner = V[u.grid.mask == 1]
    if np.any(c * inner >= 0):
        raise NonNegativeValues("u must be negative at every interior node")
    Hu = grid_hessian(V, u.h)
    nodes, explicit = _sample_nodes(u, samples, 2)
    idx = tuple(nodes.T)
    det = np.linalg.det(np.nan_to_num(Hu[idx]))
    ok = np.all(np.isfinite(Hu[idx].reshape(len(nodes), -1)), axis=1)
    if explicit and not ok.all():
        raise SampleTooCloseToBoundary("difference stencil leaves the domain at some samples")
    nodes, det, vals = nodes[ok], det[ok], V[idx][ok]
    if np.any(det <= 0):
        raise DegenerateHessian("det D^2 u <= 0 at a sample")
    res = np.log(det) + (_N + 2) / alpha * np.log(-c * vals)
    return nodes, res


def hypersphere_residual(u: GridFunction, alpha, c=1.0, samples=None) -> float:
    """Sup norm of :func:`hypersphere_residuals`; near zero for affine hyperspheres."""
    _, res = hypersphere_residuals(u, alpha, c, samples)
    return float(np.max(np.abs(res))) if res.size else 0.0


def diagnostics_csv(sample: HypersurfaceSample, residuals=None) -> str:
    """``x1,x2,kappa,residual`` per sample."""
    r = np.full(len(sample.kappa), np.nan) if residuals is None else np.asarray(residuals)
    rows = ["x1,x2,kappa,residual"]
    for (a, b), k, e in zip(sample.x, sample.kappa, r):
        rows.append(f"{a:.17g},{b:.17g},{k:.17g},{e:.17g}")
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# meshes


def _grid_faces(nodes, shape, keep=None):
    """Two triangles per lattice square whose four corners are all samples."""
    pos = -np.ones(shape, dtype=np.int64)
    pos[tuple(nodes.T)] = np.arange(len(nodes))
    if keep is not None:
        pos[tuple(nodes[~keep].T)] = -1
    a, b = pos[:-1, :-1], pos[1:, :-1]
    c, d = pos[1:, 1:], pos[:-1, 1:]
    full = (a >= 0) & (b >= 0) & (c >= 0) & (d >= 0)
    a, b, c, d = a[full], b[full], c[full], d[full]
    return np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, d], 1)])


def _row_major(nodes, *arrays):
    order = np.lexsort((nodes[:, 1], nodes[:, 0]))
    return (nodes[order],) + tuple(a[order] for a in arrays)


def _clip(poly, lo, hi):
    """Sutherland-Hodgman clip of a convex polygon to the box ``[lo, hi]``."""
    for axis in (0, 1):
        for bound, sign in ((lo[axis], 1.0), (hi[axis], -1.0)):
            if len(poly) == 0:
                return poly
            out = []
            for k in range(len(poly)):
                p, q = poly[k], poly[(k + 1) % len(poly)]
                fp, fq = sign * (p[axis] - bound), sign * (q[axis] - bound)
                if fp >= 0:
                    out.append(p)
                if fp * fq < 0:
                    out.append(p + (q - p) * fp / (fp - fq))
            poly = np.array(out)
    return poly


def _max_kind_fans(u: PLConvexFunction, box):
    """Planar pieces of a max of affine functions over a box, as triangle fans."""
    lo, hi = np.asarray(box[0], dtype=float), np.asarray(box[1], dtype=float)
    A, c = u.slopes, u.intercepts
    verts, faces = [], []
    corners = np.array([lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]])
    for k in range(len(A)):
        # piece k is where its plane dominates every other one
        poly = _clip(corners, lo, hi)
        for j in range(len(A)):
            if j == k or len(poly) == 0:
                continue
            # keep (A_k - A_j).x + c_k - c_j >= 0
            a, b = A[k] - A[j], c[k] - c[j]
            out = []
            for t in range(len(poly)):
                p, q = poly[t], poly[(t + 1) % len(poly)]
                fp, fq = p @ a + b, q @ a + b
                if fp >= 0:
                    out.append(p)
                if fp * fq < 0:
                    out.append(p + (q - p) * fp / (fp - fq))
            poly = np.array(out) if out else np.zeros((0, 2))
        if len(poly) < 3:
            continue
        z = poly @ A[k] + c[k]
        base = len(verts)
        verts.extend(np.column_stack([poly, z]))
        faces.extend([base, base + t, base + t + 1] for t in range(1, len(poly) - 1))
    return np.array(verts), np.array(faces, dtype=np.int64)


def _cone_mesh(cone, rings=16, segments=128):
    """Lateral boundary of a cone over its height-one section, up to height one."""
    sec = cone.section
    s = np.arange(segments) / segments
    rim = sec.boundary_point(s)
    if hasattr(sec, "vertices") and isinstance(sec.vertices, np.ndarray):
        rim = np.vstack([rim, sec.vertices])
        par = np.concatenate([s, sec.vertex_params()])
        rim = rim[np.argsort(par, kind="stable")]
    m = len(rim)
    t = np.arange(1, rings + 1) / rings
    verts = [np.zeros(3)]
    for tk in t:
        verts.extend(np.column_stack([tk * rim, np.full(m, tk)]))
    faces = []
    for j in range(m):
        faces.append([0, 1 + j, 1 + (j + 1) % m])
    for r in range(rings - 1):
        o0, o1 = 1 + r * m, 1 + (r + 1) * m
        for j in range(m):
            j1 = (j + 1) % m
            faces.append([o0 + j, o1 + j, o1 + j1])
            faces.append([o0 + j, o1 + j1, o0 + j1])
    return np.array(verts), np.array(faces, dtype=np.int64)


def hypersurface_mesh(obj, box=None, positive_only=True):
    """Vertices and 0-based triangles for a sample, cloud, PL function or cone.

    Grid samples are triangulated over the primal lattice in row-major vertex
    order; with ``positive_only`` squares touching a node where
    ``det D^2 u <= 0`` are dropped.  A PL function of max kind is meshed as
    one planar fan per affine piece over ``box``; a hull-kind one is first
    conjugated.
    """
    from .convex.domains import ConvexCone

    if isinstance(obj, (HypersurfaceSample, LegendreCloud)):
        pts = obj.f if isinstance(obj, HypersurfaceSample) else obj.points
        keep = None
        if isinstance(obj, HypersurfaceSample) and positive_only:
            keep = np.linalg.det(obj.hessian) > 0
        nodes, pts = _row_major(obj.nodes, pts)
        if keep is not None:
            _, keep = _row_major(obj.nodes, keep)
        return pts, _grid_faces(nodes, obj.grid.shape, keep)
    if isinstance(obj, ConvexCone):
        return _cone_mesh(obj)
    if isinstance(obj, PLConvexFunction):
        if obj.kind == "hull":
            obj = legendre_transform(obj)
        if box is None:
            P = obj.points if len(obj.points) else np.zeros((1, 2))
            r = 1.0 + np.max(np.abs(P))
            box = (np.full(2, -r), np.full(2, r))
        return _max_kind_fans(obj, box)
    raise TypeError("cannot mesh an object of type " + type(obj).__name__)


def obj_text(vertices, faces):
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces]
    return "\n".join(lines) + "\n"


def export_hypersurface(obj, path=None, box=None, positive_only=True) -> str:
    """OBJ text of :func:`hypersurface_mesh`, also written to ``path`` when given."""
    text = obj_text(*hypersurface_mesh(obj, box=box, positive_only=positive_only))
    if path is not None:
        atomic_write(path, text)
    return text
