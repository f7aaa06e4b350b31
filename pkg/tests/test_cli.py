import json

import pytest

from affinema.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, run


def _config(tmp_path, **raw):
    p = tmp_path / "run.json"
    p.write_text(json.dumps(raw))
    return str(p)


def _manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_cheng_yau_run_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    cfg = _config(tmp_path, h=0.0625)
    assert run(["cheng-yau", "--config", cfg, "--out-dir", str(out)]) == EXIT_OK
    man = _manifest(out)
    assert man["status"] == "ok" and man["artifacts"] == ["grid.csv", "report.json"]
    rep = json.loads((out / "report.json").read_text())
    assert rep["sup_error_vs_closed_form"] < 2e-3


def test_runs_are_deterministic(tmp_path):
    cfg = _config(tmp_path, h=0.125, alpha=1.0)
    a, b = tmp_path / "a", tmp_path / "b"
    run(["cheng-yau", "--config", cfg, "--out-dir", str(a)])
    run(["cheng-yau", "--config", cfg, "--out-dir", str(b)])
    for name in ("grid.csv", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_errors_exit_2(tmp_path, capsys):
    assert run(["cheng-yau", "--config", _config(tmp_path, gamma=4, alpha=1)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
    assert run(["ck", "--config", _config(tmp_path, command="foliate")]) == EXIT_CONFIG
    assert run(["legendre", "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    with pytest.raises(SystemExit):
        run(["no-such-command"])


def test_solver_failure_exits_3(tmp_path):
    out = tmp_path / "out"
    cfg = _config(tmp_path, h=0.0625, solver={"max_iter": 1, "tol": 1e-14})
    assert run(["cheng-yau", "--config", cfg, "--out-dir", str(out)]) == EXIT_SOLVER
    man = _manifest(out)
    assert man["status"] == "error" and "NotConverged" in man["error"]


def test_unwritable_output_exits_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(["cheng-yau", "--config", _config(tmp_path, h=0.125), "--out-dir", str(blocker / "x")]) == EXIT_SOLVER


def test_legendre_reads_a_grid(tmp_path):
    src = tmp_path / "w"
    run(["cheng-yau", "--config", _config(tmp_path, h=0.125), "--out-dir", str(src)])
    out = tmp_path / "star"
    cfg = _config(tmp_path, input=str(src / "grid.csv"))
    assert run(["legendre", "--config", cfg, "--out-dir", str(out)]) == EXIT_OK
    rep = json.loads((out / "report.json").read_text())
    assert (out / "conjugate.csv").exists() and rep


def test_singular_and_geometry(tmp_path):
    pts = [[0.0, 0.0], [1 / 3, 0.0], [2 / 3, 0.0]]
    out = tmp_path / "s"
    cfg = _config(tmp_path, h=0.0625, boundary={"points": pts})
    assert run(["ck-singular", "--config", cfg, "--out-dir", str(out)]) == EXIT_OK
    assert json.loads((out / "sandwich.json").read_text())["ok"]
    geo_out = tmp_path / "g"
    assert run(["geometry", "--config", cfg, "--out-dir", str(geo_out)]) == EXIT_OK
    names = set(_manifest(geo_out)["artifacts"])
    assert {"diagnostics.csv", "surface.obj", "envelope_dual.obj", "report.json"} <= names


def test_geometry_of_the_zero_data_solution(tmp_path):
    out = tmp_path / "g"
    assert run(["geometry", "--config", _config(tmp_path, h=0.0625), "--out-dir", str(out)]) == EXIT_OK
    rep = json.loads((out / "report.json").read_text())
    assert rep["kappa_target"] == 1.0 and abs(rep["kappa"]["mean"] - 1.0) < 0.05


def test_barrier_check(tmp_path):
    out = tmp_path / "b"
    cfg = _config(tmp_path, domain={"triangle": {}}, gamma=4)
    assert run(["barrier-check", "--config", cfg, "--out-dir", str(out)]) == EXIT_OK
    assert (out / "barrier.csv").read_text().startswith("x1,x2,value,det,det_fd")


def test_foliate(tmp_path):
    out = tmp_path / "f"
    cfg = _config(tmp_path, h=0.125, t_grid=[-1, 0, 1])
    assert run(["foliate", "--config", cfg, "--out-dir", str(out)]) == EXIT_OK
    cert = json.loads((out / "certificates.json").read_text())
    assert cert["monotone_ok"] and cert["t"] == [-1.0, 0.0, 1.0]
    assert (out / "level_02.csv").exists() and (out / "boundary_gap.json").exists()


def test_verify_subset(tmp_path, capsys):
    out = tmp_path / "v"
    assert run(["verify", "--criteria", "3", "--out-dir", str(out)]) == EXIT_OK
    assert "criterion  3 [PASS]" in capsys.readouterr().out
    body = json.loads((out / "verify.json").read_text())
    assert body["all_passed"] and [r["criterion"] for r in body["results"]] == [3]
