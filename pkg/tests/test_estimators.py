import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from affinema.convex.domains import Disk
from affinema.estimators import ChengYauSolver, CKSolver, LegendreTransformer


def test_params_round_trip():
    est = CKSolver(gamma=3.0, lam=2.0, h=1 / 8)
    assert est.get_params()["lam"] == 2.0
    c = clone(est).set_params(lam=0.5)
    assert c.lam == 0.5 and est.lam == 2.0


def test_unfitted_predict_raises():
    with pytest.raises(NotFittedError):
        ChengYauSolver().predict([[0.0, 0.0]])


def test_cheng_yau_predicts_the_hemisphere():
    est = ChengYauSolver(domain=Disk((0.0, 0.0), 1.0), h=1 / 16).fit()
    X = np.array([[0.0, 0.0], [0.3, -0.2]])
    assert np.allclose(est.predict(X), -np.sqrt(1 - np.sum(X**2, axis=1)), atol=5e-3)
    assert est.report_.converged
    with pytest.raises(ValueError):
        est.predict([[np.nan, 0.0]])
    with pytest.raises(ValueError):
        est.predict([[0.0, 0.0, 0.0]])


def test_ck_scales_the_companion():
    est = CKSolver(lam=4.0, h=1 / 16).fit()
    x = np.array([[0.1, 0.1]])
    assert est.predict(x)[0] == pytest.approx(2.0 * est.w_(x)[0], rel=1e-6)
    with pytest.raises(ValueError):
        CKSolver(lam=0.0).fit()


def test_legendre_transformer():
    t = np.linspace(-1, 1, 9)
    X = np.stack(np.meshgrid(t, t), -1).reshape(-1, 2)
    y = 0.5 * np.sum(X**2, axis=1)
    Y = np.array([[0.0, 0.0], [0.5, 0.25]])
    out = LegendreTransformer().fit(X, y).transform(Y)
    assert out.shape == (2, 1)
    # the conjugate of |x|^2/2 is itself, up to the grid spacing
    assert np.allclose(out[:, 0], 0.5 * np.sum(Y**2, axis=1), atol=0.25**2 / 2)
    with pytest.raises(ValueError):
        LegendreTransformer().fit(X, y[:-1])
