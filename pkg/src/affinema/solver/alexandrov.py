"""Semi-discrete Alexandrov solver: prescribe the Monge-Ampere mass of each site.

The unknowns are the heights of finitely many interior sites; boundary
support points keep their Dirichlet values.  The lifted lower hull defines
a PL convex function whose subgradient cell at a site has area ``A_i``.
Raising a site shrinks its own cell and grows its neighbours' cells, with

    dA_i/dH_j = |dual edge ij| / |x_i - x_j|,   dA_i/dH_i = -sum_j dA_i/dH_j,

so Newton's method on ``A(H) = targets`` converges quadratically from any
start where every site is a hull vertex.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from ..convex.boundary import BoundaryData
from ..convex.plconvex import PLConvexFunction, _lower_hull
from ..errors import Infeasible, NotConverged


@dataclass
class OracleReport:
    iterations: int = 0
    max_rel_error: float = float("inf")
    history: list = field(default_factory=list)


def _cells(P, v, sites):
    """Cell areas and height Jacobian for the lifted configuration."""
    facets, grads, _, used = _lower_hull(P, v)
    m = len(sites)
    if not np.all(np.isin(sites, used)):
        return None, None
    # edge -> the two facets sharing it
    F = len(facets)
    E = np.concatenate([facets[:, [0, 1]], facets[:, [1, 2]], facets[:, [2, 0]]])
    owner = np.tile(np.arange(F), 3)
    E.sort(axis=1)
    order = np.lexsort((E[:, 1], E[:, 0]))
    E, owner = E[order], owner[order]
    same = np.all(E[1:] == E[:-1], axis=1)
    k = np.flatnonzero(same)
    a, b = E[k, 0], E[k, 1]
    dual = np.linalg.norm(grads[owner[k]] - grads[owner[k + 1]], axis=1)
    coef = dual / np.linalg.norm(P[a] - P[b], axis=1)
    pos = -np.ones(len(P), dtype=int)
    pos[sites] = np.arange(m)
    rows, cols, vals = [], [], []
    diag = np.zeros(m)
    for i, j in ((a, b), (b, a)):
        pi, pj = pos[i], pos[j]
        s = pi >= 0
        np.add.at(diag, pi[s], -coef[s])
        t = s & (pj >= 0)
        rows.append(pi[t])
        cols.append(pj[t])
        vals.append(coef[t])
    rows.append(np.arange(m))
    cols.append(np.arange(m))
    vals.append(diag)
    J = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m))
    # incident facet gradients of each site
    inc = [[] for _ in range(m)]
    for f, tri in enumerate(facets):
        for q in tri:
            if pos[q] >= 0:
                inc[pos[q]].append(f)
    A = np.empty(m)
    for i, fs in enumerate(inc):
        G = grads[fs]
        try:
            A[i] = ConvexHull(G).volume if len(G) >= 3 else 0.0
        except QhullError:
            A[i] = 0.0
    return A, J


def solve_ma_alexandrov(sites, targets, g, boundary_points=None, tol=1e-10, max_iter=100):
    """PL convex function with prescribed cell areas at interior sites.

    Parameters
    ----------
    sites : array_like, shape (m, 2)
        Interior support points.
    targets : array_like, shape (m,)
        Monge-Ampere masses, all positive or all zero.
    g : BoundaryData or callable
        Boundary values; evaluated at ``boundary_points`` (default: the
        finite samples of ``g``).
    tol : float
        Relative tolerance on every cell area.

    Returns
    -------
    PLConvexFunction with attributes ``heights`` (site values) and ``report``.
    """
    X = np.atleast_2d(np.asarray(sites, dtype=float))
    T = np.asarray(targets, dtype=float).ravel()
    if len(T) != len(X):
        raise ValueError("one target mass per site")
    if boundary_points is None:
        B, gb = g.finite_points() if isinstance(g, BoundaryData) else (None, None)
        if B is None:
            raise ValueError("boundary_points are required with a callable g")
    else:
        B = np.atleast_2d(np.asarray(boundary_points, dtype=float))
        gb = np.asarray(g(B), dtype=float)
    env = PLConvexFunction(B, gb)
    if not np.all(env.in_interior(X, tol=1e-12)):
        raise Infeasible("sites must lie inside the hull of the boundary points")
    P = np.vstack([B, X])
    idx = np.arange(len(B), len(P))
    base = env(X)
    rep = OracleReport()
    if np.all(T == 0):
        out = PLConvexFunction(P, np.concatenate([gb, base]))
        out.heights, out.report = base, rep
        rep.max_rel_error = 0.0
        return out
    if np.any(T <= 0):
        raise ValueError("target masses must be all positive or all zero")

    # start: envelope plus a strictly convex dip, scaled to the total mass
    c = B.mean(axis=0)
    psi = 0.5 * (np.sum((X - c) ** 2, axis=1) - np.max(np.sum((B - c) ** 2, axis=1)))
    mu = 1.0
    for _ in range(5):
        A, _ = _cells(P, np.concatenate([gb, base + mu * psi]), idx)
        if A is None:
            raise Infeasible("starting configuration has a hidden site")
        mu *= np.sqrt(T.sum() / max(A.sum(), 1e-300))
    H = base + mu * psi
    A, J = _cells(P, np.concatenate([gb, H]), idx)
    floor = 0.5 * min(A.min(), T.min())
    err = np.max(np.abs(A - T) / T)
    rep.history.append(float(err))
    for it in range(max_iter):
        if err <= tol:
            break
        dH = spsolve(J.tocsc(), T - A)
        step = 1.0
        while True:
            Hn = H + step * dH
            An, Jn = _cells(P, np.concatenate([gb, Hn]), idx)
            if An is not None and An.min() >= floor:
                en = np.max(np.abs(An - T) / T)
                if en < err or step < 1e-3:
                    break
            step *= 0.5
            if step < 1e-10:
                raise Infeasible("no admissible Newton step keeps every site a vertex")
        H, A, J, err = Hn, An, Jn, en
        rep.history.append(float(err))
        rep.iterations = it + 1
    rep.max_rel_error = float(err)
    if err > tol:
        raise NotConverged(f"oracle stopped at relative mass error {err:.3e}", rep)
    out = PLConvexFunction(P, np.concatenate([gb, H]))
    out.heights, out.report = H, rep
    return out
