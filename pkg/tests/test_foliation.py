import numpy as np
import pytest

from affinema import foliation as fol
from affinema.convex.boundary import BoundaryData
from affinema.convex.plconvex import legendre_transform, pl_from_grid
from affinema.errors import OutsideFoliatedRegion
from affinema.solver.config import SolverConfig


def _exact_sweep(w, t):
    return fol.sweep_from_values([fol.exact_family(w, tk) for tk in t], t, w, 4.0)


@pytest.fixture(scope="module")
def fine_sweep(disk_w32):
    return _exact_sweep(disk_w32, np.linspace(-2, 2, 17))


def test_k_exponent():
    assert fol.k_exponent(4.0) == pytest.approx(1.5)
    assert fol.k_of_t(0.0, 4.0) == 1.0
    assert fol.k_of_t(2.0, 2.0) == pytest.approx(np.exp(4.0))


def test_exact_family_solves_the_scaled_problem(disk_w16):
    u = fol.exact_family(disk_w16, 1.3)
    ratio = u.interior_values() / disk_w16.interior_values()
    # det scales by ratio^2 = exp(-t)
    assert np.allclose(ratio**2, np.exp(-1.3))


def test_exact_family_certificates(disk_w16):
    sw = _exact_sweep(disk_w16, fol.DEFAULT_T)
    mono = fol.monotonicity_certificate(sw)
    assert mono["monotone_ok"] and mono["max_decrease"] == 0.0
    assert mono["delta_min"] == pytest.approx(disk_w16.h**3)
    assert fol.concavity_certificate(sw)["max_concavity_violation"] == 0.0


def test_leaves_are_disjoint(disk_w16):
    sw = _exact_sweep(disk_w16, fol.DEFAULT_T)
    Y = np.random.default_rng(1).uniform(-1, 1, size=(50, 2))
    assert fol.leaf_disjointness(sw, Y) > 0


def test_leaf_label_recovers_an_intermediate_leaf(fine_sweep, disk_w32):
    rng = np.random.default_rng(7)
    worst = 0.0
    for t_true in (-1.3, 0.37, 1.71):
        leaf = legendre_transform(pl_from_grid(fol.exact_family(disk_w32, t_true)))
        Y = rng.uniform(-0.8, 0.8, size=(5, 2))
        t, k = fol.leaf_label(fine_sweep, Y, leaf(Y))
        worst = max(worst, float(np.max(np.abs(t - t_true))))
        assert np.allclose(k, np.exp(1.5 * t))
    assert worst <= 1e-3


def test_leaf_at_zero_has_unit_curvature(fine_sweep):
    y = np.array([0.2, -0.1])
    xi = fine_sweep.dual_values(y)[8, 0]
    t, k = fol.leaf_label(fine_sweep, y, xi)
    assert abs(t) <= 1e-9 and k == pytest.approx(1.0, abs=1e-8)


def test_points_outside_the_swept_leaves(fine_sweep):
    y = np.zeros(2)
    top = fine_sweep.dual_values(y)[0, 0]
    with pytest.raises(OutsideFoliatedRegion):
        fol.leaf_label(fine_sweep, y, top + 1.0)


def test_leaves_separate_as_t_grows(disk_w16):
    # u_t* at the origin is -min u_t = exp(-t/2); the leaves pile up towards zero
    sw = _exact_sweep(disk_w16, [0.0, 4.0])
    D = sw.dual_values(np.zeros(2))[:, 0]
    assert D[1] / D[0] == pytest.approx(np.exp(-2.0), rel=1e-12)


def test_k_convexity_on_the_exact_family(fine_sweep):
    rep = fol.k_convexity_certificate(fine_sweep, n_segments=20)
    assert rep["n_segments"] == 20
    assert rep["max_k_convexity_violation"] <= 1e-2


def test_solved_sweep_is_monotone(unit_disk, disk_w16):
    cfg = SolverConfig(h=1 / 16)
    phi = BoundaryData.constant(unit_disk, 0.0)
    sw = fol.sweep(unit_disk, 4.0, phi, [-1.0, 0.0, 1.0], cfg, w=disk_w16, workers=2)
    assert len(sw.reports) == 3
    exact = [fol.exact_family(disk_w16, t) for t in sw.t]
    for u, e in zip(sw.levels, exact):
        assert np.max(np.abs(u.interior_values() - e.interior_values())) < 1e-8
    rep = fol.certificate_report(sw, n_segments=10)
    assert rep["monotone_ok"] and rep["alpha"] == 1.0


def test_sweep_needs_two_levels(unit_disk, disk_w16):
    with pytest.raises(ValueError):
        fol.sweep(unit_disk, 4.0, BoundaryData.constant(unit_disk, 0.0), [0.0], w=disk_w16)


def test_boundary_gap_grows_inward(disk_w16):
    sw = _exact_sweep(disk_w16, [-1.0, 0.0, 1.0])
    curve = np.array(fol.boundary_gap_curve(sw, bins=4)["max_gap"])
    # zero data: the gap is -u_t, smallest near the circle and shrinking in t
    assert np.all(np.diff(curve, axis=1) > 0)
    assert np.all(np.diff(curve, axis=0) < 0)
