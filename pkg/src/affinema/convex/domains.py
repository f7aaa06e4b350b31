"""Bounded convex domains, proper convex cones and their dual sections."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ApexNotInterior, DomainError

_TOL = 1e-12


class ConvexDomain:
    """Open bounded convex set in R^n.

    Subclasses implement containment, distance to the boundary, ray exits
    and (for n = 2) a boundary parameterization by s in [0, 1).
    """

    dim: int

    def contains(self, x, margin=0.0):
        return self.distance(x) > margin

    def distance(self, x):
        raise NotImplementedError

    def ray_exit(self, x, d):
        """Smallest t > 0 with x + t d on the boundary (x inside)."""
        raise NotImplementedError

    def boundary_point(self, s):
        raise NotImplementedError

    def boundary_param(self, p):
        raise NotImplementedError

    def bounds(self):
        raise NotImplementedError

    def on_boundary(self, p, tol=1e-9):
        return np.abs(self.distance(p)) <= tol

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Disk(ConvexDomain):
    """Euclidean ball; ``dim`` follows the length of ``center``."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise DomainError("radius must be positive")
        if len(c) not in (2, 3):
            raise DomainError("only dimensions 2 and 3 are supported")

    @property
    def dim(self):
        return len(self.center)

    @property
    def kind(self):
        return "disk"

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        return self.radius - np.linalg.norm(x - np.asarray(self.center), axis=-1)

    def ray_exit(self, x, d):
        x = np.asarray(x, dtype=float) - np.asarray(self.center)
        d = np.asarray(d, dtype=float)
        a = np.sum(d * d, axis=-1)
        b = np.sum(x * d, axis=-1)
        c = np.sum(x * x, axis=-1) - self.radius**2
        return (-b + np.sqrt(np.maximum(b * b - a * c, 0.0))) / a

    def distance_along(self, x, step, s):
        """Distance to the boundary at ``x + s*step`` and its first two
        derivatives in ``s`` at ``s = 0``."""
        c = np.asarray(self.center)
        rel = np.asarray(x, dtype=float) - c
        r = np.linalg.norm(rel, axis=-1)
        r = np.where(r == 0, 1e-300, r)
        proj = np.sum(rel * step, axis=-1) / r
        d0 = self.radius - r
        d1 = -proj
        d2 = -(np.sum(step * step, axis=-1) - proj**2) / r
        ds = [self.radius - np.linalg.norm(rel + si[..., None] * step, axis=-1) for si in s]
        return d0, d1, d2, ds

    def boundary_point(self, s):
        if self.dim != 2:
            raise DomainError("boundary parameterization needs dim == 2")
        th = 2.0 * np.pi * np.asarray(s, dtype=float)
        pts = np.stack([np.cos(th), np.sin(th)], axis=-1)
        return np.asarray(self.center) + self.radius * pts

    def boundary_param(self, p):
        p = np.asarray(p, dtype=float) - np.asarray(self.center)
        return np.mod(np.arctan2(p[..., 1], p[..., 0]) / (2 * np.pi), 1.0)

    def bounds(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    @property
    def area(self):
        return np.pi * self.radius**2

    def to_json(self):
        return {"disk": {"center": list(self.center), "r": self.radius}}


@dataclass(frozen=True)
class Polygon(ConvexDomain):
    """Strictly convex polygon given by counterclockwise vertices."""

    vertices: np.ndarray = field(default=None)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DomainError("polygon needs at least three planar vertices")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        scale = np.max(np.linalg.norm(e, axis=1)) ** 2
        if np.all(cross < 0):
            v = v[::-1].copy()
            e = np.roll(v, -1, axis=0) - v
            cross = -cross[::-1]
        if not np.all(cross > 1e-12 * scale):
            raise DomainError("polygon vertices must be strictly convex")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        lengths = np.linalg.norm(e, axis=1)
        normals = np.stack([e[:, 1], -e[:, 0]], axis=1) / lengths[:, None]
        object.__setattr__(self, "_normals", normals)
        object.__setattr__(self, "_offsets", np.sum(normals * v, axis=1))
        object.__setattr__(self, "_lengths", lengths)
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(lengths)]))

    dim = 2

    @property
    def kind(self):
        return "polygon"

    def __eq__(self, other):
        return isinstance(other, Polygon) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash(self.vertices.tobytes())

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        return np.min(self._offsets - x @ self._normals.T, axis=-1)

    def ray_exit(self, x, d):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d = np.atleast_2d(np.asarray(d, dtype=float))
        nd = d @ self._normals.T
        gap = self._offsets - x @ self._normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(nd > _TOL, gap / nd, np.inf)
        out = np.min(t, axis=-1)
        return out if out.size > 1 else out.reshape(np.broadcast(x[..., 0], d[..., 0]).shape)[()]

    def distance_along(self, x, step, s):
        """Distance to the nearest edge line at ``x + s*step``, with its
        derivatives in ``s`` at ``s = 0``; the edge is chosen at ``x``."""
        x = np.asarray(x, dtype=float)
        gaps = self._offsets - x @ self._normals.T
        k = np.argmin(gaps, axis=-1)
        nk = self._normals[k]
        d0 = gaps[np.arange(len(k)), k] if gaps.ndim > 1 else gaps[k]
        d1 = -np.sum(nk * step, axis=-1)
        d2 = np.zeros_like(d0)
        ds = [d0 + si * d1 for si in s]
        return d0, d1, d2, ds

    def boundary_point(self, s):
        s = np.mod(np.asarray(s, dtype=float), 1.0)
        ell = s * self._cum[-1]
        k = np.clip(np.searchsorted(self._cum, ell, side="right") - 1, 0, len(self.vertices) - 1)
        frac = (ell - self._cum[k]) / self._lengths[k]
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        return v[k] + frac[..., None] * (nxt[k] - v[k])

    def boundary_param(self, p):
        p = np.atleast_2d(np.asarray(p, dtype=float))
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        rel = p[:, None, :] - v[None, :, :]
        frac = np.clip(np.sum(rel * e[None], axis=2) / self._lengths**2, 0.0, 1.0)
        proj = v[None] + frac[..., None] * e[None]
        k = np.argmin(np.linalg.norm(p[:, None, :] - proj, axis=2), axis=1)
        s = (self._cum[k] + frac[np.arange(len(p)), k] * self._lengths[k]) / self._cum[-1]
        return np.mod(s, 1.0) if s.size > 1 else float(np.mod(s[0], 1.0))

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @property
    def area(self):
        x, y = self.vertices.T
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def perimeter(self):
        return float(self._cum[-1])

    def vertex_params(self):
        return self._cum[:-1] / self._cum[-1]

    def interior_angles(self):
        v = self.vertices
        a = np.roll(v, 1, axis=0) - v
        b = np.roll(v, -1, axis=0) - v
        cos = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        return np.arccos(np.clip(cos, -1.0, 1.0))

    def to_json(self):
        return {"polygon": {"vertices": self.vertices.tolist()}}


def standard_triangle():
    return Polygon([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True)
class ConvexCone:
    """Cone over a bounded section at height one, apex at the origin.

    The vertical vector is (0, ..., 0, 1); it lies inside the cone exactly
    when the section contains the origin of the height-one hyperplane.
    """

    section: ConvexDomain

    @property
    def dim(self):
        return self.section.dim + 1

    def contains_vertical(self):
        return bool(self.section.contains(np.zeros(self.section.dim), margin=1e-12))


def dual_section(cone: ConvexCone, n_support=256) -> ConvexDomain:
    """Section at height -1 of the dual cone, ``{x : x.y < 1 for y in C_1}``.

    Polygonal sections dualize to the intersection of the half-planes
    ``x.y_j < 1``; centred disks to the disk of reciprocal radius. Off-centre
    disks are dualized through ``n_support`` support lines.
    """
    sec = cone.section
    if not cone.contains_vertical():
        raise ApexNotInterior("section must contain the origin in its interior")
    if isinstance(sec, Disk):
        c = np.asarray(sec.center)
        if np.allclose(c, 0.0):
            return Disk(center=tuple(np.zeros(sec.dim)), radius=1.0 / sec.radius)
        if sec.dim != 2:
            raise DomainError("off-centre ball sections are supported only in the plane")
        ys = sec.boundary_point(np.arange(n_support) / n_support)
        return _polar_polygon(ys)
    return _polar_polygon(sec.vertices)


def _polar_polygon(ys):
    # vertex between consecutive support lines x.y_j = 1 and x.y_{j+1} = 1
    y0 = ys
    y1 = np.roll(ys, -1, axis=0)
    det = y0[:, 0] * y1[:, 1] - y0[:, 1] * y1[:, 0]
    x = np.stack([(y1[:, 1] - y0[:, 1]) / det, (y0[:, 0] - y1[:, 0]) / det], axis=1)
    return Polygon(x)
