"""Extended-real boundary data sampled along the boundary of a planar domain."""
from __future__ import annotations

import numpy as np

from ..errors import AllInfinite, DomainError


class BoundaryData:
    """Samples ``(s, value)`` of a lower semicontinuous function on the boundary.

    ``s`` is the boundary parameter of the owning domain and values may be
    ``+inf``.  With ``interpolation="linear"`` finite values are joined
    piecewise-linearly along arcs whose two end samples are finite;
    ``"pointwise"`` keeps only the samples themselves.  An optional
    ``func`` evaluates the data exactly at boundary points and takes
    precedence over the samples wherever it is given.
    """

    def __init__(self, domain, s, values, interpolation="linear", func=None, check=True):
        s = np.mod(np.asarray(s, dtype=float).ravel(), 1.0)
        values = np.asarray(values, dtype=float).ravel()
        if s.shape != values.shape:
            raise ValueError("s and values must have the same length")
        if np.any(np.isnan(values)) or np.any(values == -np.inf):
            raise ValueError("boundary values must lie in R or be +inf")
        if interpolation not in ("linear", "pointwise"):
            raise ValueError("interpolation must be 'linear' or 'pointwise'")
        if not np.any(np.isfinite(values)):
            raise AllInfinite("boundary data has no finite value")
        order = np.argsort(s, kind="stable")
        self.domain = domain
        self.s = s[order]
        self.values = values[order]
        self.interpolation = interpolation
        self.func = func
        if check:
            self.check_lsc()

    @classmethod
    def constant(cls, domain, c, n=256):
        s = np.arange(n) / n
        return cls(domain, s, np.full(n, float(c)), func=lambda p: np.full(np.shape(p)[:-1], float(c)))

    @classmethod
    def affine(cls, domain, grad, offset, n=256):
        grad = np.asarray(grad, dtype=float)

        def f(p):
            return np.asarray(p, dtype=float) @ grad + offset

        s = np.arange(n) / n
        return cls(domain, s, f(domain.boundary_point(s)), func=f)

    @classmethod
    def from_function(cls, domain, f, n=512):
        s = np.arange(n) / n
        return cls(domain, s, f(domain.boundary_point(s)), func=f)

    @classmethod
    def from_points(cls, domain, pairs, interpolation="pointwise"):
        pairs = [(float(a), float(b)) for a, b in pairs]
        s, v = zip(*pairs) if pairs else ((), ())
        return cls(domain, s, v, interpolation=interpolation)

    @property
    def finite(self):
        return np.isfinite(self.values)

    @property
    def has_infinite(self):
        """True when the data is ``+inf`` somewhere on the boundary.

        Pointwise data is infinite away from its samples.
        """
        return self.interpolation == "pointwise" or not bool(np.all(self.finite))

    def points(self):
        return self.domain.boundary_point(self.s)

    def finite_points(self):
        m = self.finite
        return self.points()[m], self.values[m]

    def check_lsc(self):
        """Lower semicontinuity at sample resolution.

        Finite arcs are interpolated linearly and arcs touching a ``+inf``
        sample stay infinite, so the represented function is lsc as soon as
        each sample carries one value.  Duplicate parameters with different
        values are rejected.
        """
        d = np.diff(self.s)
        dup = np.flatnonzero(d < 1e-14)
        if np.any(self.values[dup] != self.values[dup + 1]):
            raise ValueError("duplicate boundary parameter with conflicting values")
        return True

    def __call__(self, p):
        """Boundary value at points ``p`` on the boundary."""
        p = np.asarray(p, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(p), dtype=float)
        s = np.atleast_1d(self.domain.boundary_param(p))
        out = self.at_param(s)
        return out.reshape(p.shape[:-1]) if p.ndim > 1 else out[0]

    def at_param(self, s):
        s = np.mod(np.atleast_1d(np.asarray(s, dtype=float)), 1.0)
        ss, vv = self.s, self.values
        out = np.full(s.shape, np.inf)
        # exact sample hits
        k = np.searchsorted(ss, s)
        for shift in (0, -1):
            kk = np.mod(k + shift, len(ss))
            d = np.abs(np.mod(s - ss[kk] + 0.5, 1.0) - 0.5)
            hit = d < 1e-12
            out[hit] = np.minimum(out[hit], vv[kk][hit])
        if self.interpolation == "pointwise":
            return out
        lo = np.mod(k - 1, len(ss))
        hi = np.mod(k, len(ss))
        span = np.mod(ss[hi] - ss[lo], 1.0)
        span = np.where(span == 0, 1.0, span)
        frac = np.mod(s - ss[lo], 1.0) / span
        ok = np.isfinite(vv[lo]) & np.isfinite(vv[hi])
        with np.errstate(invalid="ignore"):
            lin = (1 - frac) * vv[lo] + frac * vv[hi]
        return np.where(ok, np.minimum(out, lin), out)

    def dominating_affine_exists(self):
        """Sampled check that some affine function lies above the data.

        Only meaningful when every value is finite; with ``+inf`` values no
        affine majorant exists.
        """
        return not self.has_infinite

    def to_json(self):
        vals = ["inf" if not np.isfinite(v) else float(v) for v in self.values]
        return {"points": [[float(a), b] for a, b in zip(self.s, vals)]}


def three_point_data(domain, params=(0.0, 1.0 / 3.0, 2.0 / 3.0), value=0.0):
    """Data equal to ``value`` at a few boundary parameters and ``+inf`` elsewhere."""
    if domain.dim != 2:
        raise DomainError("three-point data lives on planar domains")
    return BoundaryData(domain, list(params), [value] * len(params), interpolation="pointwise")
