"""One test per acceptance criterion; each prints a PASS/FAIL line.

Thresholds are pinned here, independently of the values the checks carry,
and each check's metrics are compared against them.
"""
import numpy as np
import pytest

from affinema import verification as V

from conftest import ACCEPTANCE_LINES

TOL = {
    1: {"sup_error": 1e-2, "ratio": 3.0, "runtime_s": 60.0},
    2: {"identity_rel_error": 1e-10, "sup_error": 2e-2},
    3: {"rel_error": 1e-3, "runtime_s": 5.0},
    4: {"nested": lambda h: 2 * h * h, "sandwich": lambda h: 2 * h},
    5: {"max_error": 1e-6},
    6: {"mean": 0.05, "deviation": 0.05},
    7: {"residual": 5e-2, "mesh": 1e-2},
    8: {"family": 1e-3, "k_convexity": 1e-2, "runtime_s": 600.0},
    10: {"sup": 2e-2, "mass": 0.05},
    11: {"involution": 1e-9},
}


def _report(res, ok):
    line = f"criterion {res.criterion:2d} [{'PASS' if ok else 'FAIL'}] {res.name}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def test_criterion_01_disk_closed_form():
    res = V.check_disk()
    m, t = res.metrics, TOL[1]
    ok = m["sup_error"] <= t["sup_error"] and m["ratio"] >= t["ratio"] and m["runtime_s"] <= t["runtime_s"]
    _report(res, ok and res.passed)
    assert ok and res.passed, m


def test_criterion_02_triangle_closed_form():
    res = V.check_triangle()
    m, t = res.metrics, TOL[2]
    ok = m["identity_rel_error"] <= t["identity_rel_error"] and m["sup_error"] <= t["sup_error"]
    _report(res, ok and res.passed)
    assert ok and res.passed, m


def test_criterion_03_barrier_determinants():
    res = V.check_barriers()
    errs = [v for k, v in res.metrics.items() if k.startswith(("simplex", "ball"))]
    ok = len(errs) == 6 and max(errs) <= TOL[3]["rel_error"] and res.seconds <= TOL[3]["runtime_s"]
    _report(res, ok and res.passed)
    assert ok and res.passed, res.metrics


def test_criterion_04_comparison_and_sandwich():
    h = 1 / 32
    res = V.check_comparison_and_sandwich(h=h)
    m = res.metrics
    excess = [v for k, v in m.items() if k.endswith("_excess") and k != "nested_max_excess"]
    ok = (m["nested_max_excess"] <= TOL[4]["nested"](h) and len(excess) == 6
          and max(excess) <= TOL[4]["sandwich"](h))
    _report(res, ok and res.passed)
    assert ok and res.passed, m


def test_criterion_05_affine_identity():
    res = V.check_affine_identity()
    ok = res.metrics["max_error"] <= TOL[5]["max_error"]
    _report(res, ok and res.passed)
    assert ok and res.passed, res.metrics


def test_criterion_06_curvature_law():
    res = V.check_curvature_law()
    m = res.metrics
    means = [v for k, v in m.items() if k.endswith("mean_rel_error")]
    devs = [v for k, v in m.items() if k.endswith("max_deviation")]
    ok = len(means) == 3 and max(means) <= TOL[6]["mean"] and max(devs) <= TOL[6]["deviation"]
    _report(res, ok and res.passed)
    assert ok and res.passed, m


def test_criterion_07_hypersphere():
    res = V.check_hypersphere()
    m = res.metrics
    ok = m["residual"] <= TOL[7]["residual"] and m["mesh_max_deviation"] <= TOL[7]["mesh"]
    _report(res, ok and res.passed)
    assert ok and res.passed, m


def test_criterion_08_foliation():
    res = V.check_foliation()
    m, t = res.metrics, TOL[8]
    ok = (m["exact_max_decrease"] <= t["family"] and m["exact_max_concavity_violation"] <= t["family"]
          and m["segments"] == 100 and m["max_k_convexity_violation"] <= t["k_convexity"]
          and m["sweep_runtime_s"] <= t["runtime_s"])
    _report(res, ok and res.passed)
    assert ok and res.passed, m


def test_criterion_09_slope_dichotomy():
    res = V.check_slope_dichotomy()
    m = res.metrics
    ok = m["gamma4"]["kind"] == "Infinite" and m["gamma3"]["kind"] == "Finite"
    _report(res, ok and res.passed)
    assert ok and res.passed, m


def test_criterion_10_oracle_equivalence():
    res = V.check_oracle()
    m = res.metrics
    ok = m["sup_difference"] <= TOL[10]["sup"] and m["max_mass_deviation"] <= TOL[10]["mass"]
    _report(res, ok and res.passed)
    assert ok and res.passed, m


def test_criterion_11_convex_core_properties():
    res = V.check_convex_core()
    m = res.metrics
    ok = (m["instances"] == 100 and m["involution_max_rel_error"] <= TOL[11]["involution"]
          and m["envelope_above_data"] <= 1e-9 and m["minorant_above_envelope"] <= 1e-9
          and m["order_reversal_excess"] <= 1e-9)
    _report(res, ok and res.passed)
    assert ok and res.passed, m


def test_disk_reference_is_independent():
    # the reference used by criterion 1 against a direct evaluation
    X = np.array([[0.0, 0.0], [0.6, 0.0], [0.3, -0.4]])
    assert np.allclose(V.hemisphere(X), [-1.0, -0.8, -np.sqrt(0.75)])
