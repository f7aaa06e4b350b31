import numpy as np
import pytest

from affinema.convex.domains import Disk
from affinema.convex.grid import Grid, GridFunction
from affinema.convex.plconvex import PLConvexFunction
from affinema.convex.slopes import boundary_value, slope_classifier
from affinema.errors import NotOnBoundary

DISK = Disk((0.0, 0.0), 1.0)
EAST = np.array([1.0, 0.0])


def _radial(h, power):
    """-(1 - |x|^2)^power sampled on the unit disk, zero on the circle."""
    g = Grid(DISK, h)
    r2 = np.sum(g.X**2, axis=-1)
    vals = -np.clip(1 - r2, 0, None) ** power
    s = np.linspace(0, 1, 2048, endpoint=False)
    bp = np.array([DISK.boundary_point(v) for v in s]).reshape(-1, 2)
    return GridFunction(g, vals, bp, np.zeros(len(bp)), boundary=lambda P: np.zeros(len(np.atleast_2d(P))))


def _levels(power):
    return [_radial(h, power) for h in (1 / 32, 1 / 64, 1 / 128)]


def test_boundary_value_of_a_pl_function():
    P = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], float)
    u = PLConvexFunction(P, [0.0, 1.0, 2.0, 3.0])
    assert boundary_value(u, [0.5, 0.0]) == pytest.approx(0.5, abs=1e-9)
    assert boundary_value(u, [1.0, 0.5]) == pytest.approx(2.0, abs=1e-9)


def test_boundary_value_rejects_interior_points():
    P = np.array([[0, 0], [1, 0], [0, 1]], float)
    u = PLConvexFunction(P, [0.0, 0.0, 0.0])
    with pytest.raises(NotOnBoundary):
        boundary_value(u, [0.2, 0.2])


def test_finite_slope_is_recognised():
    # r^2 - 1 leaves the circle with inner slope 2
    v = slope_classifier(_levels(1.0), EAST, anchor=np.zeros(2))
    assert v.kind == "Finite"
    assert v.bound == pytest.approx(2.0, rel=0.05)


def test_square_root_blow_up_is_infinite():
    v = slope_classifier(_levels(0.5), EAST, anchor=np.zeros(2))
    assert v.kind == "Infinite"


def test_single_level_never_claims_finite():
    v = slope_classifier(_radial(1 / 32, 0.5), EAST, anchor=np.zeros(2))
    assert v.kind in ("Inconclusive", "Infinite")
    assert set(v.to_dict()) == {"kind", "bound", "rate", "quotients", "orders", "reason"}


def test_classifier_requires_a_boundary_point():
    with pytest.raises(NotOnBoundary):
        slope_classifier(_levels(1.0)[:1], [0.5, 0.0])
