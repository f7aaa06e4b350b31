"""One-parameter families ``u_t`` with ``lambda = exp(-t)`` and their leaves.

Each ``u_t`` solves ``det D^2 u = exp(-t) (-w)^(-gamma)`` with the same
boundary data.  The family increases in ``t``, so the conjugates ``u_t*``
decrease and their graphs (the leaves) stack without touching.  A point
``(y, xi)`` between the extreme leaves is labelled by the ``t`` of the leaf
through it, and ``K = log k = (1 + n/gamma) t``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .convex.plconvex import convex_envelope, legendre_transform, pl_from_grid
from .errors import MonotonicityViolated, OutsideFoliatedRegion
from .solver.config import SolverConfig
from .solver.problems import solve_cheng_yau, solve_ck, solve_ck_singular

_N = 2
DEFAULT_T = tuple(np.linspace(-2.0, 2.0, 9))


def k_exponent(gamma):
    """``K / t``, i.e. ``(alpha n + n + 2)/(n + 2)`` with ``alpha = (n+2)/gamma``."""
    return 1.0 + _N / float(gamma)


def k_of_t(t, gamma):
    return np.exp(k_exponent(gamma) * np.asarray(t, dtype=float))


def exact_family(w, t):
    """Values of ``exp(-t/n) w`` on the grid of ``w``: the family for zero data.

    ``det D^2 (m w) = m^n det D^2 w``, so ``m^n = exp(-t)`` solves the
    ``lambda`` problem whenever ``w`` solves the one with ``lambda = 1``.
    """
    return w.with_values(np.exp(-float(t) / _N) * w.values)


@dataclass
class FoliationSweep:
    """Solved family on a shared grid, ordered by increasing ``t``."""

    t: np.ndarray
    levels: list
    w: object
    gamma: float
    phi: object = None
    reports: list = field(default_factory=list)
    _duals: list | None = None

    @property
    def alpha(self):
        return (_N + 2) / self.gamma

    @property
    def grid(self):
        return self.levels[0].grid

    @property
    def duals(self):
        """Conjugates of the PL hulls of the levels (exact, no differencing)."""
        if self._duals is None:
            self._duals = [legendre_transform(pl_from_grid(u)) for u in self.levels]
        return self._duals

    def dual_values(self, y):
        """``u_t*(y)`` for every level, shape ``(len(t), len(y))``."""
        Y = np.atleast_2d(np.asarray(y, dtype=float))
        return np.stack([d(Y) for d in self.duals])

    def stacked(self):
        """Node values of all levels, shape ``(len(t), n_nodes)``, on nodes finite for every level."""
        V = np.stack([u.values for u in self.levels])
        ok = np.all(np.isfinite(V), axis=0) & (self.grid.mask == 1)
        return V[:, ok], np.argwhere(ok)


def sweep(domain, gamma, phi, t_grid=DEFAULT_T, cfg=None, w=None, workers=1, check=True,
          tol=1e-2):
    """Solve the family over ``t_grid`` and certify it.

    ``w`` defaults to the solution of the ``lambda = 1`` zero-data problem on
    ``domain``.  With ``check`` a failed monotonicity certificate raises
    :class:`MonotonicityViolated`.
    """
    cfg = cfg or SolverConfig()
    t = np.sort(np.asarray(t_grid, dtype=float))
    if len(t) < 2:
        raise ValueError("a sweep needs at least two t values")
    if w is None:
        w, _ = solve_cheng_yau(domain, gamma, cfg)
    solve = solve_ck_singular if getattr(phi, "has_infinite", False) else solve_ck

    def one(tk):
        return solve(domain, gamma, float(np.exp(-tk)), w, phi, cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, t))
    else:
        out = [one(tk) for tk in t]
    sw = FoliationSweep(t, [u for u, _ in out], w, float(gamma), phi, [r for _, r in out])
    if check:
        cert = monotonicity_certificate(sw, tol=tol)
        if not cert["monotone_ok"]:
            raise MonotonicityViolated(f"u_t decreases by {cert['max_decrease']:.3e} at a node")
    return sw


def sweep_from_values(levels, t, w, gamma, phi=None):
    """Wrap precomputed levels (for instance :func:`exact_family`) as a sweep."""
    order = np.argsort(t)
    t = np.asarray(t, dtype=float)[order]
    return FoliationSweep(t, [levels[k] for k in order], w, float(gamma), phi)


def monotonicity_certificate(sw: FoliationSweep, tol=1e-3, delta_min=None):
    """Nodewise increase in ``t``.

    ``monotone_ok`` holds when no node decreases by more than ``tol``.
    Increases smaller than ``delta_min`` (default ``h**3``) are counted, not
    failed: strictness is a continuum property.
    """
    V, _ = sw.stacked()
    d = np.diff(V, axis=0)
    h = sw.grid.h
    dmin = h**3 if delta_min is None else delta_min
    dec = float(max(0.0, -d.min())) if d.size else 0.0
    return {
        "monotone_ok": bool(dec <= tol),
        "max_decrease": dec,
        "min_increase": float(d.min()) if d.size else 0.0,
        "n_below_delta_min": int(np.sum(d < dmin)),
        "delta_min": float(dmin),
    }


def concavity_certificate(sw: FoliationSweep):
    """Largest excess of ``u`` at a level over the chord of its two neighbours in ``t``."""
    V, _ = sw.stacked()
    t = sw.t
    if len(t) < 3:
        return {"max_concavity_violation": 0.0}
    a = (t[2:] - t[1:-1]) / (t[2:] - t[:-2])
    chord = a[:, None] * V[:-2] + (1 - a)[:, None] * V[2:]
    viol = chord - V[1:-1]
    return {"max_concavity_violation": float(max(0.0, viol.max()))}


def leaf_disjointness(sw: FoliationSweep, y):
    """``min_y (u_{t_i}*(y) - u_{t_{i+1}}*(y))`` over consecutive levels."""
    D = sw.dual_values(y)
    return float(np.min(D[:-1] - D[1:]))


def _labels(sw, Y, xi):
    D = sw.dual_values(Y)
    t = sw.t
    out = np.empty(len(Y))
    for j in range(len(Y)):
        col = D[:, j]
        hi, lo = col[0], col[-1]
        if not (lo <= xi[j] <= hi) or not np.all(np.isfinite(col)):
            raise OutsideFoliatedRegion(f"point ({Y[j]}, {xi[j]}) lies outside the swept leaves")
        # u_t*(y) decreases in t; the monotone cubic keeps that on the interpolant
        f = PchipInterpolator(t, -col)
        a, b = t[0], t[-1]
        for _ in range(60):
            m = 0.5 * (a + b)
            if -f(m) > xi[j]:
                a = m
            else:
                b = m
        out[j] = 0.5 * (a + b)
    return out


def leaf_label(sw: FoliationSweep, y, xi):
    """``(t, k)`` of the leaf through ``(y, xi)``.

    The dual values of every level at ``y`` are interpolated monotonically
    in ``t`` and the crossing with ``xi`` is located by bisection.
    """
    Y = np.atleast_2d(np.asarray(y, dtype=float))
    X = np.atleast_1d(np.asarray(xi, dtype=float))
    t = _labels(sw, Y, X)
    k = k_of_t(t, sw.gamma)
    if np.ndim(xi) == 0:
        return float(t[0]), float(k[0])
    return t, k


def leaf_point(sw: FoliationSweep, y, t):
    """A point on the interpolated leaf ``t`` above ``y``."""
    Y = np.atleast_2d(np.asarray(y, dtype=float))
    D = sw.dual_values(Y)
    return np.array([PchipInterpolator(sw.t, D[:, j])(t) for j in range(len(Y))]).ravel()


def k_convexity_certificate(sw: FoliationSweep, n_segments=100, per_segment=5, y_radius=1.0,
                            seed=0, margin=0.1):
    """Largest convexity defect of ``K`` along random segments in the foliated region.

    Endpoints are drawn on random leaves with ``t`` inside the swept range
    (``margin`` away from its ends) and ``|y| <= y_radius``.  Segments with a
    sample outside the region are redrawn.  The defect at an inner sample is
    ``K(p_s) - ((1-s) K(P) + s K(Q))``.
    """
    rng = np.random.default_rng(seed)
    s = np.linspace(0.0, 1.0, per_segment)
    kexp = k_exponent(sw.gamma)
    worst, done, tries = -np.inf, 0, 0
    lo, hi = sw.t[0] + margin, sw.t[-1] - margin
    while done < n_segments:
        tries += 1
        if tries > 50 * n_segments:
            break
        ends = []
        for _ in range(2):
            r = y_radius * np.sqrt(rng.uniform())
            th = rng.uniform(0, 2 * np.pi)
            y = np.array([r * np.cos(th), r * np.sin(th)])
            tt = rng.uniform(lo, hi)
            ends.append(np.append(y, leaf_point(sw, y, tt)[0]))
        P, Q = ends
        pts = (1 - s)[:, None] * P + s[:, None] * Q
        try:
            t = _labels(sw, pts[:, :2], pts[:, 2])
        except OutsideFoliatedRegion:
            continue
        K = kexp * t
        chord = (1 - s) * K[0] + s * K[-1]
        worst = max(worst, float(np.max(K[1:-1] - chord[1:-1])))
        done += 1
    return {
        "max_k_convexity_violation": float(max(worst, 0.0)) if done else float("nan"),
        "raw_max_defect": float(worst),
        "n_segments": done,
        "attempts": tries,
    }


def boundary_gap_curve(sw: FoliationSweep, bins=8):
    """Largest ``env phi - u_t`` per band of distance to the boundary, for every level.

    The leaves approach the boundary of the regular domain as ``t`` grows;
    on a grid that shows up as this gap shrinking towards the boundary.
    Nothing is asserted.
    """
    g = sw.grid
    V, nodes = sw.stacked()
    X = g.X[tuple(nodes.T)]
    if sw.phi is None:
        env = np.zeros(len(X))
    else:
        env = convex_envelope(g.domain, sw.phi)(X)
    gap = env[None, :] - V
    d = g.dist[tuple(nodes.T)]
    edges = np.linspace(0.0, d.max(), bins + 1)
    band = np.clip(np.searchsorted(edges, d, side="right") - 1, 0, bins - 1)
    curve = np.full((len(sw.t), bins), np.nan)
    for b in range(bins):
        sel = band == b
        if sel.any():
            curve[:, b] = np.max(gap[:, sel], axis=1)
    return {"t": [float(v) for v in sw.t], "distance_edges": edges.tolist(), "max_gap": curve.tolist()}


def certificate_report(sw: FoliationSweep, n_segments=100, tol=1e-2):
    """The JSON-ready summary of every family certificate."""
    mono = monotonicity_certificate(sw, tol=tol)
    conc = concavity_certificate(sw)
    kc = k_convexity_certificate(sw, n_segments=n_segments)
    return {
        "monotone_ok": mono["monotone_ok"],
        "max_decrease": mono["max_decrease"],
        "n_below_delta_min": mono["n_below_delta_min"],
        "max_concavity_violation": conc["max_concavity_violation"],
        "max_k_convexity_violation": kc["max_k_convexity_violation"],
        "n_segments": kc["n_segments"],
        "t": [float(v) for v in sw.t],
        "gamma": sw.gamma,
        "alpha": sw.alpha,
    }
