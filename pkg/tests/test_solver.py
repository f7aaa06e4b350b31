import numpy as np
import pytest

from affinema.convex.boundary import BoundaryData, three_point_data
from affinema.convex.domains import Disk, Polygon, standard_triangle
from affinema.convex.grid import Grid
from affinema.errors import (
    EmptyInterior,
    ExponentOutOfRange,
    GridMismatch,
    Infeasible,
    NotConverged,
)
from affinema.solver.alexandrov import solve_ma_alexandrov
from affinema.solver.config import SolverConfig
from affinema.solver.problems import (
    comparison_check,
    singular_domain,
    solve_cheng_yau,
    solve_ck,
    solve_ck_singular,
    solve_dirichlet_ma,
)
from affinema.solver.scheme import WideStencilMA, lbr_h, stencil_directions, superbases


def test_stencil_sizes():
    assert len(stencil_directions(16)) == 16
    assert len(stencil_directions(88)) == 88
    with pytest.raises(ValueError):
        stencil_directions(10)
    sb = superbases(stencil_directions(8))
    d = stencil_directions(8)
    for i, j, k in sb:
        e, f = d[i], d[j]
        assert abs(e[0] * f[1] - e[1] * f[0]) == 1


def test_lbr_h_is_the_determinant_for_an_obtuse_superbase():
    # second differences of a quadratic form along e, f, -(e+f)
    M = np.array([[2.0, -0.5], [-0.5, 1.0]])
    e, f = np.array([1, 0]), np.array([0, 1])
    g = -(e + f)
    a, b, c = e @ M @ e, f @ M @ f, g @ M @ g
    val, *_ = lbr_h(np.array([a]), np.array([b]), np.array([c]))
    assert val[0] == pytest.approx(np.linalg.det(M))


def test_scheme_is_exact_on_quadratics():
    g = Grid(Disk(), 1 / 8)
    M = np.array([[1.5, 0.4], [0.4, 0.8]])

    def q(X):
        X = np.atleast_2d(X)
        return 0.5 * np.einsum("ij,jk,ik->i", X, M, X)

    op = WideStencilMA(g, q, width=16)
    ma, _, _ = op.evaluate(q(g.points))
    assert np.allclose(ma, np.linalg.det(M), rtol=1e-9)


def test_scheme_is_monotone(rng):
    g = Grid(Disk(), 1 / 8)
    op = WideStencilMA(g, lambda p: np.zeros(len(np.atleast_2d(p))), width=16)
    u = -np.sqrt(np.clip(1 - np.sum(g.points**2, axis=1), 0, None))
    ma0, J, _ = op.evaluate(u, jacobian=True)
    # raising a node lowers its own value and raises its neighbours'
    assert np.all(J.diagonal() <= 0)
    off = J - np.diag(J.diagonal())
    assert np.all(np.asarray(off[off != 0]) >= 0)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(h=0)
    with pytest.raises(ValueError):
        SolverConfig(stencil=4)
    with pytest.raises(ValueError):
        SolverConfig(gamma=1.0)
    assert SolverConfig().with_(h=0.1).h == 0.1


def test_cheng_yau_disk_coarse(disk_w16):
    X = disk_w16.grid.points
    err = np.max(np.abs(disk_w16.interior_values() + np.sqrt(1 - np.sum(X**2, axis=1))))
    assert err < 2e-3
    assert disk_w16.report.converged and disk_w16.report.residual <= 1e-8
    assert np.all(disk_w16.interior_values() < 0)


def test_cheng_yau_exponent_rules():
    with pytest.raises(ExponentOutOfRange):
        solve_cheng_yau(Disk(), 1.0, SolverConfig(h=0.25))
    with pytest.raises(ExponentOutOfRange):
        solve_cheng_yau(standard_triangle(), 2.0, SolverConfig(h=0.25))


def test_cheng_yau_ball_with_low_gamma():
    # gamma in (1, 2] is admissible on balls
    w, rep = solve_cheng_yau(Disk(), 1.5, SolverConfig(h=1 / 16))
    assert rep.converged and np.all(w.interior_values() < 0)


def test_triangle_coarse():
    w, _ = solve_cheng_yau(standard_triangle(), 4.0, SolverConfig(h=1 / 16))
    X = w.grid.points
    t = np.column_stack([1 - X.sum(axis=1), X])
    ref = -np.sqrt(3.0) * np.cbrt(np.prod(t, axis=1))
    assert np.max(np.abs(w.interior_values() - ref)) < 2e-2


def test_ck_affine_identity(disk_w16, unit_disk):
    phi = BoundaryData.affine(unit_disk, [1.0, -0.5], 0.3)
    for lam in (0.5, 2.0):
        u, rep = solve_ck(unit_disk, 4.0, lam, disk_w16, phi, SolverConfig(h=1 / 16))
        X = u.grid.points
        ref = X @ [1.0, -0.5] + 0.3 + np.sqrt(lam) * disk_w16.interior_values()
        assert np.max(np.abs(u.interior_values() - ref)) < 1e-8
        assert rep.sandwich["ok"]


def test_ck_needs_the_same_grid(disk_w16, unit_disk):
    with pytest.raises(GridMismatch):
        solve_ck(unit_disk, 4.0, 1.0, disk_w16, BoundaryData.constant(unit_disk, 0.0), SolverConfig(h=1 / 8))


def test_ck_rejects_bad_lambda(disk_w16, unit_disk):
    with pytest.raises(ValueError):
        solve_ck(unit_disk, 4.0, 0.0, disk_w16, BoundaryData.constant(unit_disk, 0.0), SolverConfig(h=1 / 16))


def test_singular_three_point(disk_w16, unit_disk):
    phi = three_point_data(unit_disk)
    U = singular_domain(unit_disk, phi)
    assert isinstance(U, Polygon) and len(U.vertices) == 3
    u, rep = solve_ck_singular(unit_disk, 4.0, 1.0, disk_w16, phi, SolverConfig(h=1 / 16))
    assert rep.converged
    assert np.all(u.interior_values() < 0)
    assert u.sandwich["ok"]
    assert u.convexity_certificate() > -1e-8


def test_singular_needs_three_finite_values(unit_disk):
    phi = BoundaryData(unit_disk, [0.0, 0.5], [0.0, 0.0], interpolation="pointwise")
    with pytest.raises(EmptyInterior):
        singular_domain(unit_disk, phi)


def test_nested_comparison(disk_w16):
    small, _ = solve_cheng_yau(Disk((0.0, 0.0), 0.5), 4.0, SolverConfig(h=1 / 16))
    rep = comparison_check(disk_w16, small)
    assert rep["max_excess"] <= 2 / 16**2
    assert rep["n_shared"] > 0


def test_comparison_needs_a_shared_lattice(disk_w16, disk_w32):
    with pytest.raises(GridMismatch):
        comparison_check(disk_w16, disk_w32)


def test_dirichlet_quadratic_is_reproduced():
    sq = Polygon([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])

    def g(P):
        P = np.atleast_2d(P)
        return 0.5 * np.sum(P**2, axis=1)

    u = solve_dirichlet_ma(sq, 1.0, g, SolverConfig(h=1 / 8))
    X = u.grid.points
    assert np.max(np.abs(u.interior_values() - g(X))) < 1e-8


def test_not_converged_is_reported():
    with pytest.raises(NotConverged) as exc:
        solve_cheng_yau(Disk(), 4.0, SolverConfig(h=1 / 16, max_iter=1, tol=1e-14))
    assert exc.value.args


def test_oracle_reproduces_a_cone():
    # unit mass at the centre of a square with zero boundary data
    B = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    u = solve_ma_alexandrov([[0.0, 0.0]], [1.0], lambda P: np.zeros(len(P)), B)
    # the cell is the diamond |p1| + |p2| <= depth of area 2 depth^2
    assert u.heights[0] == pytest.approx(-np.sqrt(0.5), rel=1e-8)


def test_oracle_on_quadratic_data():
    t = np.linspace(-1, 1, 5)
    G = np.stack(np.meshgrid(t, t, indexing="ij"), -1).reshape(-1, 2)
    edge = np.any(np.abs(G) == 1, axis=1)

    def q(P):
        return 0.5 * np.sum(np.atleast_2d(P) ** 2, axis=1)

    h = 0.5
    u = solve_ma_alexandrov(G[~edge], np.full((~edge).sum(), h * h), q, G[edge])
    assert np.allclose(u.heights, q(G[~edge]), atol=1e-10)


def test_oracle_zero_masses_give_the_envelope():
    B = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    u = solve_ma_alexandrov([[0.2, 0.1]], [0.0], lambda P: P[:, 0], B)
    assert u.heights[0] == pytest.approx(0.2)


def test_oracle_infeasible_sites():
    B = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    with pytest.raises(Infeasible):
        solve_ma_alexandrov([[2.0, 0.0]], [1.0], lambda P: np.zeros(len(P)), B)
