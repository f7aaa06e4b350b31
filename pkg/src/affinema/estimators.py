"""Estimator-style wrappers around the solvers.

``fit`` runs a solve and stores the grid function; ``predict`` interpolates
it at query points.  The PDE solves take no training data, so ``X`` in
``fit`` is accepted for pipeline compatibility and ignored.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .convex.boundary import BoundaryData
from .convex.domains import Disk
from .convex.plconvex import PLConvexFunction, legendre_transform
from .solver.config import SolverConfig
from .solver.problems import solve_cheng_yau, solve_ck, solve_ck_singular


def _points(X):
    X = check_array(X, dtype=float, ensure_all_finite=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected points with 2 coordinates, got {X.shape[1]}")
    return X


class _GridPredictor(RegressorMixin, BaseEstimator):
    def predict(self, X):
        """Interpolated solution values; ``nan`` outside the sampled domain."""
        check_is_fitted(self, "solution_")
        return np.asarray(self.solution_(_points(X)), dtype=float)

    def _cfg(self):
        return SolverConfig(h=self.h, gamma=self.gamma, tol=self.tol, max_iter=self.max_iter)

    def _domain(self):
        return self.domain if self.domain is not None else Disk((0.0, 0.0), 1.0)


class ChengYauSolver(_GridPredictor):
    """Zero-data solution of ``det D^2 w = (-w)^(-gamma)`` on a planar domain.

    >>> est = ChengYauSolver(h=1/16).fit()
    >>> float(est.predict([[0.0, 0.0]])[0]) < 0
    True
    """

    def __init__(self, domain=None, gamma=4.0, h=1 / 32, tol=1e-8, max_iter=60):
        self.domain = domain
        self.gamma = gamma
        self.h = h
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X=None, y=None):
        self.solution_, self.report_ = solve_cheng_yau(self._domain(), self.gamma, self._cfg())
        self.n_features_in_ = 2
        return self


class CKSolver(_GridPredictor):
    """``det D^2 u = lam (-w)^(-gamma)`` with boundary data ``phi``.

    ``phi`` is a :class:`BoundaryData` (``+inf`` values allowed) or a
    number for constant data.  The companion ``w`` is solved during ``fit``
    and kept as ``w_``.
    """

    def __init__(self, domain=None, gamma=4.0, lam=1.0, phi=0.0, h=1 / 32, tol=1e-8, max_iter=60):
        self.domain = domain
        self.gamma = gamma
        self.lam = lam
        self.phi = phi
        self.h = h
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X=None, y=None):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        dom, cfg = self._domain(), self._cfg()
        phi = self.phi if isinstance(self.phi, BoundaryData) else BoundaryData.constant(dom, float(self.phi))
        self.w_, _ = solve_cheng_yau(dom, self.gamma, cfg)
        solve = solve_ck_singular if phi.has_infinite else solve_ck
        self.solution_, self.report_ = solve(dom, self.gamma, self.lam, self.w_, phi, cfg)
        self.n_features_in_ = 2
        return self


class LegendreTransformer(TransformerMixin, BaseEstimator):
    """Exact conjugate of the PL convex hull of scattered samples.

    ``fit(X, y)`` takes points ``X`` and values ``y``; ``transform(Y)``
    returns ``u*(Y)``.
    """

    def fit(self, X, y):
        X = check_array(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        if len(y) != len(X):
            raise ValueError("X and y have different lengths")
        self.hull_ = PLConvexFunction(X, y)
        self.conjugate_ = legendre_transform(self.hull_)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "conjugate_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return self.conjugate_(X).reshape(-1, 1)
