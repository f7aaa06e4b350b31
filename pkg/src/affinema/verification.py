"""Acceptance checks, one function per criterion.

Every check returns a :class:`CheckResult` whose ``metrics`` hold the
measured numbers next to the thresholds they were compared with.  Reference
values come from closed forms or from independent computations (finite
differences, the semi-discrete oracle, exact conjugates), never from the
solver under test.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import foliation as fol
from . import geometry as geo
from .barriers import BallBarrier, SimplexBarrier, exact_solution, finite_difference_det
from .convex.boundary import BoundaryData, three_point_data
from .convex.domains import Disk, Polygon, standard_triangle
from .convex.grid import Grid, GridFunction
from .convex.plconvex import PLConvexFunction, convex_envelope, legendre_involution_check, legendre_transform
from .convex.slopes import slope_classifier
from .solver.alexandrov import solve_ma_alexandrov
from .solver.config import SolverConfig
from .solver.problems import (
    comparison_check,
    solve_cheng_yau,
    solve_ck,
    solve_ck_singular,
    solve_dirichlet_ma,
)

UNIT_DISK = Disk((0.0, 0.0), 1.0)


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        return f"criterion {self.criterion:2d} [{'PASS' if self.passed else 'FAIL'}] {self.name}"

    def to_dict(self):
        return {"criterion": self.criterion, "name": self.name, "passed": self.passed,
                "metrics": self.metrics, "seconds": self.seconds}


def _timed(fn):
    def run(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


def hemisphere(X):
    """``-sqrt(1 - |x|^2)``, clipped to zero outside the unit disk."""
    return -np.sqrt(np.clip(1.0 - np.sum(np.asarray(X) ** 2, axis=-1), 0.0, None))


def triangle_reference(X):
    """``-sqrt(3) (t0 t1 t2)^(1/3)`` in barycentric coordinates of the standard triangle."""
    X = np.atleast_2d(X)
    t = np.column_stack([1.0 - X[:, 0] - X[:, 1], X[:, 0], X[:, 1]])
    return -np.sqrt(3.0) * np.cbrt(np.prod(np.clip(t, 0.0, None), axis=1))


def _grid_error(u, ref):
    X = u.grid.points
    return float(np.max(np.abs(u.interior_values() - ref(X))))


_CY_CACHE = {}


def disk_solution(h, gamma=4.0):
    """Cached zero-data solution on the unit disk."""
    key = (float(h), float(gamma))
    if key not in _CY_CACHE:
        _CY_CACHE[key] = solve_cheng_yau(UNIT_DISK, gamma, SolverConfig(h=h))
    return _CY_CACHE[key]


@_timed
def check_disk(h_coarse=1 / 16, h_fine=1 / 64):
    """Criterion 1: disk closed form, error size and decay, runtime."""
    t0 = time.perf_counter()
    w, rep = solve_cheng_yau(UNIT_DISK, 4.0, SolverConfig(h=h_fine))
    runtime = time.perf_counter() - t0
    _CY_CACHE[(float(h_fine), 4.0)] = (w, rep)
    coarse, _ = solve_cheng_yau(UNIT_DISK, 4.0, SolverConfig(h=h_coarse))
    e_fine, e_coarse = _grid_error(w, hemisphere), _grid_error(coarse, hemisphere)
    m = {"sup_error": e_fine, "sup_error_coarse": e_coarse, "ratio": e_coarse / e_fine,
         "runtime_s": runtime, "tol": 1e-2, "min_ratio": 3.0, "max_runtime_s": 60.0}
    ok = e_fine <= 1e-2 and e_coarse / e_fine >= 3.0 and runtime <= 60.0
    return CheckResult(1, "disk closed form", ok, m)


@_timed
def check_triangle(h=1 / 64, n_points=1000, seed=0):
    """Criterion 2: the triangle closed form, after checking its identity at random points."""
    rng = np.random.default_rng(seed)
    b = SimplexBarrier.standard(2, 4.0)
    t = rng.dirichlet(np.ones(3), size=n_points)
    X = t[:, 1:]
    ref = triangle_reference(X)
    det = 3.0 * b.det(X)  # det D^2 (sqrt(3) v) = 3 det D^2 v
    ident = float(np.max(np.abs(det - (-ref) ** -4.0) / (-ref) ** -4.0))
    w, _ = solve_cheng_yau(standard_triangle(), 4.0, SolverConfig(h=h))
    err = _grid_error(w, triangle_reference)
    m = {"identity_rel_error": ident, "identity_tol": 1e-10, "sup_error": err, "tol": 2e-2}
    return CheckResult(2, "triangle closed form", ident <= 1e-10 and err <= 2e-2, m)


def _simplex_band(n, rng, count, margin):
    t = rng.dirichlet(np.ones(n + 1), size=8 * count)
    # distance to the facet t_i = 0 of the standard simplex
    dist = np.min(t[:, 1:], axis=1)
    dist = np.minimum(dist, t[:, 0] / np.sqrt(n))
    return t[dist >= margin][:count, 1:]


def _ball_band(n, rng, count, margin):
    X = rng.normal(size=(count, n))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    r = (1.0 - margin) * rng.uniform(size=count) ** (1.0 / n)
    return X * r[:, None]


@_timed
def check_barriers(count=200, margin=0.05, step=1e-4, seed=0):
    """Criterion 3: closed-form determinants against central differences."""
    rng = np.random.default_rng(seed)
    worst = {}
    for n, gamma in ((2, 3.0), (2, 4.0), (3, 5.0)):
        for name, b, X in (
            ("simplex", SimplexBarrier.standard(n, gamma), _simplex_band(n, rng, count, margin)),
            ("ball", BallBarrier(np.zeros(n), 1.0, gamma), _ball_band(n, rng, count, margin)),
        ):
            fd, _ = finite_difference_det(b.value, X, step)
            exact = b.det(X)
            worst[f"{name}_n{n}_gamma{gamma:g}"] = float(np.max(np.abs(fd - exact) / np.abs(exact)))
    m = dict(worst, tol=1e-3, max_runtime_s=5.0)
    return CheckResult(3, "barrier determinants", max(worst.values()) <= 1e-3, m)


@_timed
def check_comparison_and_sandwich(h=1 / 32):
    """Criterion 4: nested-domain comparison and the sandwich bounds."""
    cfg = SolverConfig(h=h)
    small, _ = solve_cheng_yau(Disk((0.0, 0.0), 0.75), 4.0, cfg)
    big, _ = disk_solution(h)
    cmp_ = comparison_check(big, small)
    m = {"nested_max_excess": cmp_["max_excess"], "nested_tol": 2 * h * h}
    ok = cmp_["max_excess"] <= 2 * h * h
    w = big
    cases = {
        "affine": BoundaryData.affine(UNIT_DISK, [0.3, -0.2], 0.1),
        "three_point": three_point_data(UNIT_DISK),
    }
    for label, phi in cases.items():
        for lam in (np.exp(-1.0), 1.0, np.e):
            u, _ = solve_ck_singular(UNIT_DISK, 4.0, lam, w, phi, cfg)
            ex = u.sandwich["max_excess"]
            m[f"{label}_lambda{lam:.3f}_excess"] = ex
            ok = ok and ex <= 2 * h
    m["sandwich_tol"] = 2 * h
    return CheckResult(4, "comparison and sandwich", bool(ok), m)


@_timed
def check_affine_identity(h=1 / 32):
    """Criterion 5: affine data gives ``a + lambda^(1/2) w`` on the grid."""
    w, _ = disk_solution(h)
    grad, off = np.array([0.4, -0.7]), 0.25
    phi = BoundaryData.affine(UNIT_DISK, grad, off)
    worst = 0.0
    for lam in (np.exp(-1.0), 1.0, np.e):
        u, _ = solve_ck(UNIT_DISK, 4.0, lam, w, phi, SolverConfig(h=h))
        X = u.grid.points
        ref = X @ grad + off + np.sqrt(lam) * w.interior_values()
        worst = max(worst, float(np.max(np.abs(u.interior_values() - ref))))
    return CheckResult(5, "affine-solution identity", worst <= 1e-6, {"max_error": worst, "tol": 1e-6})


@_timed
def check_curvature_law(h=1 / 64):
    """Criterion 6: mean curvature ``lambda^(-3/2)`` and its flatness on the inner 80%."""
    w, _ = disk_solution(h)
    phi = BoundaryData.constant(UNIT_DISK, 0.0)
    region = geo.interior_region(w.grid, 0.8)
    m, ok = {}, True
    for lam in (np.exp(-1.0), 1.0, np.e):
        u, _ = solve_ck(UNIT_DISK, 4.0, lam, w, phi, SolverConfig(h=h))
        sample = geo.li_normal_field(u, 1.0)
        _, st = geo.gauss_kronecker(sample, region)
        target = lam ** -1.5
        rel = abs(st["mean"] / target - 1.0)
        m[f"lambda{lam:.3f}_mean_rel_error"] = rel
        m[f"lambda{lam:.3f}_max_deviation"] = st["max_deviation"]
        ok = ok and rel <= 0.05 and st["max_deviation"] <= 0.05
    m["tol"] = 0.05
    return CheckResult(6, "curvature law", bool(ok), m)


@_timed
def check_hypersphere(h=1 / 64, margin=3):
    """Criterion 7: hypersphere residual and the hyperboloid mesh."""
    w, _ = disk_solution(h)
    g = w.grid
    samples = (g.mask == 1) & (g.dist >= margin * g.h)
    res = geo.hypersphere_residual(w, 1.0, 1.0, samples=samples)
    text = geo.export_hypersurface(geo.legendre_map(w))
    V = np.array([[float(v) for v in ln.split()[1:]] for ln in text.splitlines() if ln.startswith("v ")])
    mesh = float(np.max(np.abs(V[:, 2] ** 2 - V[:, 0] ** 2 - V[:, 1] ** 2 - 1.0)))
    m = {"residual": res, "residual_tol": 5e-2, "sample_margin_h": margin,
         "mesh_max_deviation": mesh, "mesh_tol": 1e-2, "mesh_vertices": len(V)}
    return CheckResult(7, "hypersphere residual and mesh", res <= 5e-2 and mesh <= 1e-2, m)


@_timed
def check_foliation(h=1 / 64, n_segments=100):
    """Criterion 8: certificates on the exact family and the solved sweep."""
    w, _ = disk_solution(h)
    exact = w.with_values(hemisphere(w.grid.X))
    T = np.asarray(fol.DEFAULT_T)
    fam = fol.sweep_from_values([fol.exact_family(exact, t) for t in T], T, exact, 4.0)
    mono = fol.monotonicity_certificate(fam, tol=1e-3)
    conc = fol.concavity_certificate(fam)
    t0 = time.perf_counter()
    sw = fol.sweep(UNIT_DISK, 4.0, BoundaryData.constant(UNIT_DISK, 0.0), T, SolverConfig(h=h), w=w)
    kc = fol.k_convexity_certificate(sw, n_segments=n_segments)
    runtime = time.perf_counter() - t0
    m = {"exact_max_decrease": mono["max_decrease"], "exact_max_concavity_violation":
         conc["max_concavity_violation"], "tol": 1e-3,
         "max_k_convexity_violation": kc["max_k_convexity_violation"], "k_tol": 1e-2,
         "segments": kc["n_segments"], "sweep_runtime_s": runtime, "max_runtime_s": 600.0}
    ok = (mono["monotone_ok"] and conc["max_concavity_violation"] <= 1e-3
          and kc["n_segments"] == n_segments and kc["max_k_convexity_violation"] <= 1e-2
          and runtime <= 600.0)
    return CheckResult(8, "foliation certificates", bool(ok), m)


def slope_levels(gamma, hs=(1 / 32, 1 / 64, 1 / 128)):
    """Three-point solutions on the unit disk at several resolutions."""
    phi = three_point_data(UNIT_DISK)
    out = []
    for h in hs:
        cfg = SolverConfig(h=h)
        w, _ = solve_cheng_yau(UNIT_DISK, gamma, cfg)
        u, _ = solve_ck_singular(UNIT_DISK, gamma, 1.0, w, phi, cfg)
        out.append(u)
    return out


@_timed
def check_slope_dichotomy(hs=(1 / 32, 1 / 64, 1 / 128)):
    """Criterion 9: infinite inner slope at a data point for gamma = 4, finite for gamma = 3."""
    p = UNIT_DISK.boundary_point(0.0)
    m, kinds = {}, {}
    for gamma in (4.0, 3.0):
        v = slope_classifier(slope_levels(gamma, hs), p, anchor=np.zeros(2))
        kinds[gamma] = v.kind
        m[f"gamma{gamma:g}"] = v.to_dict()
    ok = kinds[4.0] == "Infinite" and kinds[3.0] == "Finite"
    return CheckResult(9, "slope dichotomy", ok, m)


def oracle_instance(n=15):
    """Square ``[-1,1] x [1,3]`` with ``u = x^2/(2y) + y^3/6``, whose Hessian determinant is one."""
    sq = Polygon([[-1.0, 1.0], [1.0, 1.0], [1.0, 3.0], [-1.0, 3.0]])

    def exact(P):
        P = np.atleast_2d(P)
        return P[:, 0] ** 2 / (2 * P[:, 1]) + P[:, 1] ** 3 / 6

    return sq, exact, 2.0 / (n - 1)


@_timed
def check_oracle(n=15):
    """Criterion 10: wide-stencil solution against the semi-discrete oracle."""
    sq, exact, h = oracle_instance(n)
    t = np.linspace(-1.0, 1.0, n)
    G = np.stack(np.meshgrid(t, t + 2.0, indexing="ij"), -1).reshape(-1, 2)
    edge = np.any(np.isclose(np.abs(G - [0.0, 2.0]), 1.0), axis=1)
    sites = G[~edge]
    oracle = solve_ma_alexandrov(sites, np.full(len(sites), h * h), exact, G[edge])
    u = solve_dirichlet_ma(sq, 1.0, exact, SolverConfig(h=h))
    X = u.grid.points
    pos = {tuple(np.round(s / h).astype(int)): k for k, s in enumerate(sites)}
    order = [pos[tuple(np.round(x / h).astype(int))] for x in X]
    sup = float(np.max(np.abs(u.interior_values() - oracle.heights[order])))
    m_ = u.grid.mask != 0
    pl = PLConvexFunction(u.grid.X[m_], u.values[m_])
    cells = pl.cell_measures()
    where = {tuple(np.round(p / h).astype(int)): k for k, p in enumerate(pl.points)}
    masses = np.array([cells[where[key]] if (key := tuple(np.round(x / h).astype(int))) in where else 0.0
                       for x in X])
    dev = float(np.max(np.abs(masses / (h * h) - 1.0)))
    m = {"sup_difference": sup, "tol": 2e-2, "max_mass_deviation": dev, "mass_tol": 0.05,
         "oracle_iterations": oracle.report.iterations}
    return CheckResult(10, "oracle equivalence", sup <= 2e-2 and dev <= 0.05, m)


def random_hull(rng, m=None):
    m = int(rng.integers(4, 30)) if m is None else m
    P = rng.uniform(-1.0, 1.0, size=(m, 2))
    v = rng.normal(size=m) + 0.5 * np.sum(P**2, axis=1)
    return PLConvexFunction(P, v)


@_timed
def check_convex_core(count=100, seed=0):
    """Criterion 11: involution, envelope maximality and order reversal on random instances."""
    rng = np.random.default_rng(seed)
    inv = 0.0
    for _ in range(count):
        inv = max(inv, legendre_involution_check(random_hull(rng))["max_rel_error"])
    # envelope: below the data, above every affine minorant of it
    env_gap, env_below = -np.inf, -np.inf
    for _ in range(count):
        k = int(rng.integers(3, 12))
        s = np.sort(rng.uniform(0, 1, k))
        vals = rng.normal(size=k)
        phi = BoundaryData(UNIT_DISK, s, vals, interpolation="pointwise")
        env = convex_envelope(UNIT_DISK, phi)
        P, v = phi.finite_points()
        env_below = max(env_below, float(np.max(env(P) - v)))
        a = rng.normal(size=2)
        b = float(np.min(v - P @ a))  # largest shift keeping x.a + b below the data
        Y = env.points.mean(axis=0) + 0.3 * rng.uniform(-1, 1, size=(20, 2)) * np.ptp(env.points, axis=0)
        inside = env.in_interior(Y)
        if np.any(inside):
            env_gap = max(env_gap, float(np.max(Y[inside] @ a + b - env(Y[inside]))))
    # order reversal: raising values lowers the conjugate
    rev = -np.inf
    for _ in range(count):
        P = rng.uniform(-1, 1, size=(int(rng.integers(4, 25)), 2))
        v = rng.normal(size=len(P))
        lo, hi = PLConvexFunction(P, v), PLConvexFunction(P, v + rng.uniform(0, 1, len(P)))
        Y = rng.normal(scale=2.0, size=(50, 2))
        rev = max(rev, float(np.max(legendre_transform(hi)(Y) - legendre_transform(lo)(Y))))
    tol = 1e-9
    m = {"involution_max_rel_error": inv, "involution_tol": tol, "envelope_above_data": env_below,
         "minorant_above_envelope": env_gap, "order_reversal_excess": rev, "instances": count}
    ok = inv <= tol and env_below <= tol and env_gap <= tol and rev <= tol
    return CheckResult(11, "convex-core properties", bool(ok), m)


CHECKS = {
    1: check_disk,
    2: check_triangle,
    3: check_barriers,
    4: check_comparison_and_sandwich,
    5: check_affine_identity,
    6: check_curvature_law,
    7: check_hypersphere,
    8: check_foliation,
    9: check_slope_dichotomy,
    10: check_oracle,
    11: check_convex_core,
}


def run_all(criteria=None, echo=print):
    """Run the selected checks (all by default), echoing one line each."""
    out = []
    for k in sorted(criteria or CHECKS):
        res = CHECKS[k]()
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
