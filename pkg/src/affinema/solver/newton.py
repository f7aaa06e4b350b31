"""Damped Newton iteration on the log form of the discrete equation.

The residual is ``F(u) = log MA_h(u) - log f(u)`` at interior nodes.  Both
terms are concave in ``u`` for the right-hand sides used here and the
Jacobian is minus an M-matrix, so once an iterate is a discrete
supersolution (``F <= 0``) full Newton steps decrease monotonically to the
solution.  The report records whether that happened.
"""
from __future__ import annotations

import time

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from ..errors import NotConverged
from .config import SolveReport

_TINY = 1e-300


def newton_log_ma(op, u0, log_rhs, cfg, admissible=None):
    """Solve ``log MA_h(u) = log_rhs(u)`` starting from ``u0``.

    Parameters
    ----------
    op : WideStencilMA
    u0 : ndarray
        Initial interior values.
    log_rhs : callable
        ``u -> (value, derivative)`` of the log right-hand side; the
        derivative is the diagonal of its Jacobian.
    cfg : SolverConfig
    admissible : callable, optional
        Predicate on trial iterates (e.g. strict negativity).

    Returns
    -------
    u, report
    """
    t0 = time.perf_counter()
    rep = SolveReport()
    u = np.array(u0, dtype=float)

    def residual(v):
        ma, _, _ = op.evaluate(v)
        lr, _ = log_rhs(v)
        return np.log(np.maximum(ma, _TINY)) - lr

    F = residual(u)
    r = float(np.max(np.abs(F))) if F.size else 0.0
    rep.history.append(r)
    monotone = True
    supersolution_seen = False
    for it in range(cfg.max_iter):
        if r <= cfg.tol:
            rep.converged = True
            break
        ma, J, _ = op.evaluate(u, jacobian=True)
        lr, dlr = log_rhs(u)
        A = sp.diags(1.0 / np.maximum(ma, _TINY)) @ J - sp.diags(dlr)
        du = spsolve(A.tocsc(), -F)
        if not np.all(np.isfinite(du)):
            break
        a = cfg.damping
        while True:
            trial = u + a * du
            if admissible is None or admissible(trial):
                Ft = residual(trial)
                rt = float(np.max(np.abs(Ft)))
                if rt < r or a < 1e-4:
                    break
            a *= 0.5
            if a < 1e-12:
                trial, Ft, rt = u, F, r
                break
        if supersolution_seen and np.any(trial > u + 1e-12 * (1 + np.abs(u))):
            monotone = False
        if np.all(Ft <= cfg.tol):
            supersolution_seen = True
        u, F, r = trial, Ft, rt
        rep.history.append(r)
        rep.iterations = it + 1
    else:
        rep.converged = r <= cfg.tol
    rep.residual = r
    rep.monotone_certificate = bool(monotone and supersolution_seen)
    rep.runtime_ms = 1e3 * (time.perf_counter() - t0)
    if not rep.converged:
        k = int(np.argmax(np.abs(F)))
        rep.violating_node = [float(v) for v in op.grid.points[k]]
        raise NotConverged(f"Newton stopped with residual {r:.3e} after {rep.iterations} steps", rep)
    return u, rep
