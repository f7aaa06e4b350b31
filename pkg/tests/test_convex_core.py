import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from affinema.convex.boundary import BoundaryData, three_point_data
from affinema.convex.domains import ConvexCone, Disk, Polygon, dual_section, standard_triangle
from affinema.convex.grid import BOUNDARY, EXTERIOR, INTERIOR, Grid, GridFunction
from affinema.convex.plconvex import (
    PLConvexFunction,
    convex_envelope,
    legendre_involution_check,
    legendre_transform,
    ma_measure,
    pl_from_grid,
)
from affinema.errors import AllInfinite, ApexNotInterior, DomainError, GridMismatch, RegionOutsideDomain

coords = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
heights = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)


@st.composite
def lifted_points(draw, min_size=4, max_size=25):
    m = draw(st.integers(min_size, max_size))
    P = draw(arrays(float, (m, 2), elements=coords))
    v = draw(arrays(float, (m,), elements=heights))
    # general position keeps the hull full-dimensional
    P = P + 1e-3 * np.arange(m)[:, None] * np.array([1.0, np.sqrt(2.0)])
    return P, v


@settings(max_examples=100, deadline=None)
@given(lifted_points())
def test_involution_property(data):
    P, v = data
    u = PLConvexFunction(P, v)
    assert legendre_involution_check(u)["max_rel_error"] <= 1e-9


@settings(max_examples=100, deadline=None)
@given(lifted_points(), st.lists(st.floats(0.0, 1.0), min_size=4, max_size=25))
def test_order_reversal_property(data, bumps):
    P, v = data
    bump = np.resize(np.asarray(bumps), len(v))
    lo, hi = PLConvexFunction(P, v), PLConvexFunction(P, v + bump)
    Y = np.random.default_rng(0).normal(scale=3.0, size=(40, 2))
    assert np.all(legendre_transform(hi)(Y) <= legendre_transform(lo)(Y) + 1e-9)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.integers(0, 999), min_size=3, max_size=12, unique=True),
    st.lists(heights, min_size=12, max_size=12),
    st.tuples(heights, heights),
)
def test_envelope_maximality_property(params, vals, slope):
    vals = np.asarray(vals[: len(params)])
    phi = BoundaryData(Disk(), np.asarray(params) / 1000.0, vals, interpolation="pointwise")
    env = convex_envelope(Disk(), phi)
    P, v = phi.finite_points()
    # below the data ...
    assert np.all(env(P) <= v + 1e-9)
    # ... and above every affine minorant of it
    a = np.asarray(slope)
    b = np.min(v - P @ a)
    Y = env.points.mean(axis=0) + 0.2 * (env.points - env.points.mean(axis=0))
    assert np.all(Y @ a + b <= env(Y) + 1e-9)


def test_hull_evaluation_and_domain():
    P = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    u = PLConvexFunction(P, np.sum(P**2, axis=1))
    assert u(np.array([0.5, 0.5])) == pytest.approx(1.0)
    assert u(np.array([2.0, 2.0])) == np.inf
    assert u.domain is not None


def test_max_kind_is_finite_everywhere():
    u = PLConvexFunction([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]], [0.0, 0.0, -1.0], kind="max")
    assert u.domain is None
    assert u(np.array([3.0, 0.0])) == pytest.approx(3.0)


def test_single_point_conjugate_is_affine():
    u = PLConvexFunction([[0.2, -0.3]], [1.5])
    star = legendre_transform(u)
    y = np.array([[1.0, 2.0], [-3.0, 0.5]])
    assert np.allclose(star(y), y @ [0.2, -0.3] - 1.5)


def test_quadratic_conjugate_converges():
    t = np.linspace(-2, 2, 41)
    P = np.stack(np.meshgrid(t, t), -1).reshape(-1, 2)
    u = PLConvexFunction(P, 0.5 * np.sum(P**2, axis=1))
    y = np.array([[0.3, -0.4], [0.0, 0.0]])
    assert np.allclose(legendre_transform(u)(y), 0.5 * np.sum(y**2, axis=1), atol=(4 / 40) ** 2)


def test_cell_measures_of_a_cone():
    P = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    v = np.array([0.0, 1.0, 1.0, 1.0, 1.0])
    u = PLConvexFunction(P, v)
    cells = u.cell_measures()
    # facet gradients at the apex are (+-1, +-1): the square [-1, 1]^2
    assert cells[np.argmin(np.linalg.norm(u.points, axis=1))] == pytest.approx(4.0)
    assert ma_measure(u, Disk((0.0, 0.0), 0.5)) == pytest.approx(4.0)
    with pytest.raises(RegionOutsideDomain):
        ma_measure(u, Disk((0.0, 0.0), 2.0))


def test_three_point_envelope_is_flat():
    D = Disk()
    env = convex_envelope(D, three_point_data(D))
    assert np.allclose(env(np.array([[0.0, 0.0], [0.1, 0.1]])), 0.0)
    assert env(np.array([-0.9, 0.0])) == np.inf


def test_boundary_data_rules():
    D = Disk()
    with pytest.raises(AllInfinite):
        BoundaryData(D, [0.0, 0.5], [np.inf, np.inf])
    with pytest.raises(ValueError):
        BoundaryData(D, [0.0], [-np.inf])
    with pytest.raises(ValueError):
        BoundaryData(D, [0.0, 0.0], [1.0, 2.0])
    phi = BoundaryData(D, [0.0, 0.25, 0.5], [0.0, 1.0, np.inf])
    assert phi.has_infinite
    assert phi.at_param(0.125)[0] == pytest.approx(0.5)
    assert phi.at_param(0.75)[0] == np.inf
    assert three_point_data(D).has_infinite
    assert not BoundaryData.constant(D, 1.0).has_infinite


def test_domains():
    P = Polygon([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]])  # clockwise input is reoriented
    assert P.area == pytest.approx(0.5)
    with pytest.raises(DomainError):
        Polygon([[0, 0], [1, 0], [1, 1], [0.5, 0.2]])
    with pytest.raises(DomainError):
        Disk((0.0, 0.0), -1.0)
    T = standard_triangle()
    s = np.linspace(0, 1, 7, endpoint=False)
    assert np.allclose(T.boundary_param(T.boundary_point(s)), s)
    assert np.allclose(T.distance(T.boundary_point(s)), 0.0, atol=1e-12)


def test_dual_section():
    sq = Polygon([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
    dual = dual_section(ConvexCone(sq))
    assert dual.area == pytest.approx(2.0)
    assert dual_section(ConvexCone(Disk((0.0, 0.0), 2.0))).radius == pytest.approx(0.5)
    with pytest.raises(ApexNotInterior):
        dual_section(ConvexCone(Disk((3.0, 0.0), 1.0)))


def test_grid_masks_and_lattice():
    g = Grid(Disk(), 0.25)
    assert g.mask[tuple(g.node_of([[0.0, 0.0]])[0])] == INTERIOR
    assert g.mask[tuple(g.node_of([[1.0, 0.0]])[0])] == BOUNDARY
    assert g.mask[tuple(g.node_of([[1.0, 1.0]])[0])] == EXTERIOR
    small = Grid(Disk((0.0, 0.0), 0.5), 0.25)
    assert g.same_lattice(small) and g != small


def test_grid_function_rules(disk_w16):
    g = disk_w16.grid
    with pytest.raises(GridMismatch):
        GridFunction(g, np.zeros((3, 3)))
    bad = np.zeros(g.shape)
    bad[tuple(g.interior[0])] = np.inf
    with pytest.raises(ValueError):
        GridFunction(g, bad)
    text = disk_w16.to_csv()
    assert text.splitlines()[0] == "i,j,x,y,value,mask"
    assert disk_w16.convexity_certificate() > -1e-10
    pl = pl_from_grid(disk_w16)
    assert pl(np.zeros(2)) == pytest.approx(float(disk_w16(np.zeros((1, 2)))[0]), abs=1e-12)
