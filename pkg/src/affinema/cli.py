"""Command-line driver.

    affinema <command> [--config run.json] [--out-dir DIR]

Exit codes: 0 success, 2 configuration error, 3 solver or I/O error,
4 failed certificate.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import __version__
from . import foliation as fol
from . import geometry as geo
from .barriers import BallBarrier, SimplexBarrier, barrier_dump, exact_solution
from .convex.domains import Disk, Polygon
from .convex.plconvex import PLConvexFunction, convex_envelope, legendre_involution_check, legendre_transform
from .errors import AffineMAError, ConfigError
from .runconfig import COMMANDS, RunConfig, atomic_write, dump_json, load_config
from .solver.problems import solve_cheng_yau, solve_ck, solve_ck_singular

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CERTIFICATE = 0, 2, 3, 4


class _Run:
    """Collects artifacts of one command and writes the manifest."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = cfg.out_dir
        self.artifacts = []

    def write(self, name, text):
        atomic_write(os.path.join(self.out, name), text)
        self.artifacts.append(name)

    def manifest(self, status, extra=None):
        body = {
            "command": self.cfg.command,
            "version": __version__,
            "gamma": self.cfg.gamma,
            "alpha": self.cfg.alpha,
            "status": status,
            "artifacts": sorted(self.artifacts),
            "config": self.cfg.raw,
        }
        body.update(extra or {})
        atomic_write(os.path.join(self.out, "manifest.json"), dump_json(body))


def _closed_form(domain, gamma):
    if not np.isclose(gamma, 4.0):
        return None
    if isinstance(domain, Disk) or (isinstance(domain, Polygon) and len(domain.vertices) == 3):
        return exact_solution(domain, 2, gamma)
    return None


def _solve_w(cfg):
    return solve_cheng_yau(cfg.domain, cfg.gamma, cfg.solver)


def _solve_lambda(cfg, singular):
    w, _ = _solve_w(cfg)
    phi = cfg.boundary_data()
    lam = 1.0 if cfg.lam is None else float(cfg.lam)
    solve = solve_ck_singular if singular else solve_ck
    u, rep = solve(cfg.domain, cfg.gamma, lam, w, phi, cfg.solver)
    return u, rep, w, lam


def cmd_cheng_yau(run):
    cfg = run.cfg
    w, rep = _solve_w(cfg)
    run.write("grid.csv", w.to_csv())
    info = {"report": rep.to_dict()}
    exact = _closed_form(cfg.domain, cfg.gamma)
    if exact is not None:
        X = w.grid.points
        info["sup_error_vs_closed_form"] = float(np.max(np.abs(w.interior_values() - exact(X))))
    run.write("report.json", dump_json(info))
    return EXIT_OK, info


def cmd_ck(run, singular=False):
    u, rep, _, lam = _solve_lambda(run.cfg, singular)
    run.write("grid.csv", u.to_csv())
    info = {"report": rep.to_dict(), "lambda": lam, "sandwich": u.sandwich}
    run.write("sandwich.json", dump_json(u.sandwich))
    run.write("report.json", dump_json(info))
    return EXIT_OK, info


def _barrier_points(b, count=400, margin=0.05, seed=0):
    rng = np.random.default_rng(seed)
    if isinstance(b, BallBarrier):
        X = rng.uniform(-1, 1, size=(8 * count, b.n))
        X = X[np.linalg.norm(X, axis=1) <= 1 - margin][:count]
        return b.center + b.radius * X
    t = rng.dirichlet(np.ones(b.n + 1), size=8 * count)
    X = t[:, 1:] @ (b.vertices[1:] - b.vertices[0]) + b.vertices[0]
    E = b.vertices
    # distance to each facet through the barycentric height
    heights = []
    for i in range(b.n + 1):
        rest = np.delete(E, i, axis=0)
        B = (rest[1:] - rest[0]).T
        normal = np.linalg.svd(B.T)[2][-1]
        heights.append(abs((E[i] - rest[0]) @ normal))
    dist = np.min(t * np.array(heights), axis=1)
    return X[dist >= margin][:count]


def cmd_barrier_check(run):
    cfg = run.cfg
    dom = cfg.domain
    if isinstance(dom, Disk):
        b = BallBarrier(dom.center, dom.radius, cfg.gamma)
    else:
        b = SimplexBarrier(dom.vertices, cfg.gamma)
    rows = barrier_dump(b, _barrier_points(b))
    n = b.n
    header = ",".join([f"x{k + 1}" for k in range(n)] + ["value", "det", "det_fd"])
    lines = [header] + [",".join(format(float(v), ".17g") for v in r) for r in rows]
    run.write("barrier.csv", "\n".join(lines) + "\n")
    rel = float(np.max(np.abs(rows[:, -1] - rows[:, -2]) / np.abs(rows[:, -2])))
    info = {"max_rel_error": rel, "tol": 1e-3, "points": int(len(rows))}
    run.write("report.json", dump_json(info))
    return (EXIT_OK if rel <= 1e-3 else EXIT_CERTIFICATE), info


def _read_grid_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"x", "y", "value"} <= set(rows[0]):
        raise ConfigError(f"{path} is not a grid CSV with x,y,value columns")
    P = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    v = np.array([float(r["value"]) for r in rows])
    keep = np.isfinite(v)
    return P[keep], v[keep]


def cmd_legendre(run):
    src = run.cfg.raw.get("input")
    if not src:
        raise ConfigError("legendre needs an 'input' grid CSV")
    P, v = _read_grid_csv(src)
    u = PLConvexFunction(P, v)
    star = legendre_transform(u)
    run.write("conjugate.csv", star.to_csv())
    info = legendre_involution_check(u)
    run.write("report.json", dump_json(info))
    return EXIT_OK, info


def cmd_geometry(run):
    cfg = run.cfg
    if cfg.lam is None and cfg.boundary is None:
        u, rep = _solve_w(cfg)
        lam = 1.0
    else:
        u, rep, _, lam = _solve_lambda(cfg, cfg.boundary_data().has_infinite)
    sample = geo.li_normal_field(u, cfg.alpha)
    region = geo.interior_region(u.grid, 0.8)
    _, stats = geo.gauss_kronecker(sample, region)
    nodes, res = geo.hypersphere_residuals(u, cfg.alpha, 1.0)
    by_node = {tuple(k): r for k, r in zip(nodes.tolist(), res)}
    resid = np.array([by_node.get(tuple(k), np.nan) for k in sample.nodes.tolist()])
    run.write("diagnostics.csv", geo.diagnostics_csv(sample, resid))
    run.write("surface.obj", geo.export_hypersurface(geo.legendre_map(u)))
    if cfg.boundary is not None:
        phi = cfg.boundary_data()
        env = convex_envelope(cfg.domain, phi, resolution=None if phi.has_infinite else 512)
        run.write("envelope_dual.obj", geo.export_hypersurface(env))
    target = lam ** -fol.k_exponent(cfg.gamma)
    info = {"kappa": stats, "kappa_target": target, "lambda": lam,
            "symmetry_defect": sample.symmetry_defect(), "report": rep.to_dict()}
    info["hypersphere_residual"] = float(np.max(np.abs(res))) if res.size else 0.0
    run.write("report.json", dump_json(info))
    return EXIT_OK, info


def cmd_foliate(run):
    cfg = run.cfg
    t = cfg.t_grid if cfg.t_grid is not None else fol.DEFAULT_T
    sw = fol.sweep(cfg.domain, cfg.gamma, cfg.boundary_data(), t, cfg.solver, check=False)
    for k, u in enumerate(sw.levels):
        run.write(f"level_{k:02d}.csv", u.to_csv())
    cert = fol.certificate_report(sw)
    run.write("certificates.json", dump_json(cert))
    run.write("boundary_gap.json", dump_json(fol.boundary_gap_curve(sw)))
    ok = cert["monotone_ok"] and cert["max_k_convexity_violation"] <= 1e-2
    return (EXIT_OK if ok else EXIT_CERTIFICATE), cert


def cmd_verify(run, criteria=None):
    from .verification import run_all

    results = run_all(criteria, echo=lambda line: print(line, flush=True))
    info = {"results": [r.to_dict() for r in results], "all_passed": all(r.passed for r in results)}
    run.write("verify.json", dump_json(info))
    return (EXIT_OK if info["all_passed"] else EXIT_CERTIFICATE), info


HANDLERS = {
    "cheng-yau": cmd_cheng_yau,
    "ck": cmd_ck,
    "ck-singular": lambda run: cmd_ck(run, singular=True),
    "barrier-check": cmd_barrier_check,
    "legendre": cmd_legendre,
    "geometry": cmd_geometry,
    "foliate": cmd_foliate,
}


def build_parser():
    p = argparse.ArgumentParser(prog="affinema", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out-dir", help="output directory (overrides the config)")
        if name == "verify":
            sp.add_argument("--criteria", type=int, nargs="+", help="subset of criteria to run")
    return p


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        raw = {"command": args.command}
        if args.config:
            cfg = load_config(args.config)
            if cfg.command and cfg.command != args.command:
                raise ConfigError(f"config is for {cfg.command!r}, not {args.command!r}")
        else:
            cfg = load_config(raw)
        cfg.command = args.command
        if args.out_dir:
            cfg.out_dir = args.out_dir
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    r = _Run(cfg)
    try:
        if args.command == "verify":
            code, info = cmd_verify(r, args.criteria)
        else:
            code, info = HANDLERS[args.command](r)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AffineMAError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        try:
            r.manifest("error", {"error": f"{type(exc).__name__}: {exc}"})
        except OSError:
            pass
        return EXIT_SOLVER
    r.manifest("ok" if code == EXIT_OK else "certificate_failed")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
