"""Command-line runner: kinetic-relation, contact-surface, flow, sweep, verify.

Exit codes: 0 success, 1 a hard invariant failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .contact import (M_density, M_lagrange, M_zero, WFunction, contact_residual,
                      multiplier_surface)
from .flow import FlowError, integrate_effective, integrate_wiggly
from .harness import SweepSetup, eps_sweep, primal_dual_split
from .kinetics import KineticRelation, bounds_report

__all__ = ["main", "cmd_kinetic_relation", "cmd_contact_surface", "cmd_flow", "cmd_sweep",
           "cmd_verify"]


def _write_csv(path: Path, header, rows) -> int:
    """Write finite rows; return the number of rows dropped for non-finite entries."""
    dropped = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            vals = [float(x) for x in row]
            if not all(math.isfinite(x) for x in vals):
                dropped += 1
                continue
            w.writerow([repr(x) for x in vals])
    return dropped


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=float)


def _relation(cfg: ExperimentConfig) -> KineticRelation:
    return KineticRelation(cfg.potential, cfg.profile)


def cmd_kinetic_relation(cfg: ExperimentConfig, out: Path) -> list:
    rel = _relation(cfg)
    s = rel.sample(cfg.xi_grid.values(), cfg.v_grid.values())
    f1, f2, f3 = out / "kinetic_relation.csv", out / "effective_dissipation.csv", \
        out / "kinetic_relation.json"
    d1 = _write_csv(f1, ["xi", "K", "R_eff_star"], zip(s["xi"], s["K"], s["R_eff_star"]))
    d2 = _write_csv(f2, ["v", "R_eff", "dR_eff"], zip(s["v"], s["R_eff"], s["dR_eff"]))
    prof = cfg.profile
    _write_json(f3, {"sticking_interval": [prof.p_min, prof.p_max],
                     "potential": cfg.potential.to_dict(), "profile": prof.to_dict(),
                     "omitted_rows": {"kinetic_relation.csv": d1,
                                      "effective_dissipation.csv": d2}})
    return [f1, f2, f3]


def _surface_rows(cfg: ExperimentConfig):
    rel = _relation(cfg)
    pot, prof = cfg.potential, cfg.profile
    tol = cfg.tolerances.contact
    if cfg.surface == "xi-h":
        for r in multiplier_surface(rel, cfg.xi_grid.values(), cfg.h_grid.values()):
            yield (r["h"], r["V"], r["xi"], r["M"], r["M"] + r["diff"], r["gap"], r["diff"],
                   float(abs(r["gap"]) <= tol * (1 + abs(r["V"] * r["xi"]))))
        return
    wf = WFunction(pot, prof)
    for v in cfg.v_grid.values():
        reff = float(rel.R_eff(v))
        for xi in cfg.xi_grid.values():
            m = M_lagrange(pot, prof, v, xi, wf=wf).M
            meff = reff + float(rel.R_eff_star(xi))
            yield (v, xi, m, meff, m - v * xi, meff - m,
                   float(abs(m - v * xi) <= tol * (1 + abs(v * xi))))


def cmd_contact_surface(cfg: ExperimentConfig, out: Path) -> list:
    header = ["v", "xi", "M", "M_eff", "M_minus_vxi", "Meff_minus_M", "contact"]
    if cfg.surface == "xi-h":
        header = ["h"] + header
    rows = list(_surface_rows(cfg))
    f1, f2 = out / "contact_surface.csv", out / "contact_surface.json"
    dropped = _write_csv(f1, header, rows)
    arr = np.array(rows, dtype=float) if rows else np.zeros((0, len(header)))
    k = 1 if cfg.surface == "xi-h" else 0
    _write_json(f2, {"surface": cfg.surface, "rows": len(rows), "omitted_rows": dropped,
                     "min_M_minus_vxi": float(np.nanmin(arr[:, 4 + k])) if len(arr) else None,
                     "min_Meff_minus_M": float(np.nanmin(arr[:, 5 + k])) if len(arr) else None,
                     "contact_rows": int(np.sum(arr[:, 6 + k])) if len(arr) else 0})
    return [f1, f2]


def cmd_flow(cfg: ExperimentConfig, out: Path) -> list:
    land = cfg.landscape()
    f3 = out / "flow_report.json"
    files = []
    report = {"eps": cfg.eps}
    if cfg.profile.is_zero or not cfg.profile.is_discrete:
        tr = integrate_wiggly(land, cfg.potential, cfg.u0, cfg.T, cfg.controls)
        f1 = out / "trajectory_wiggly.csv"
        tr.to_csv(f1)
        files.append(f1)
        report.update(edb_relative_wiggly=tr.edb_relative(), steps=len(tr.t) - 1)
    else:
        report["note"] = "discrete profile: only the effective flow is integrated"
    if land.wiggle_is_uniform:
        te = integrate_effective(_relation(cfg), land, cfg.u0, cfg.T, cfg.controls)
        f2 = out / "trajectory_effective.csv"
        te.to_csv(f2)
        files.append(f2)
        report["edb_relative_effective"] = te.edb_relative()
    _write_json(f3, report)
    return files + [f3]


def cmd_sweep(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> list:
    setup = SweepSetup(cfg.potential, cfg.profile, cfg.phi, cfg.load, cfg.u0, cfg.T,
                       cfg.controls, cfg.amplitude)
    rep = eps_sweep(setup, cfg.eps_list, jobs=jobs)
    f1, f2, f3 = out / "sweep_report.json", out / "sweep.csv", out / "primal_dual_split.json"
    rep.to_json(f1)
    rep.to_csv(f2)
    _write_json(f3, primal_dual_split(rep))
    return [f1, f2, f3]


# verification suites ------------------------------------------------------------------------
def _subsample(values, k):
    values = np.asarray(values, dtype=float)
    if len(values) <= k:
        return values
    return values[np.linspace(0, len(values) - 1, k).round().astype(int)]


def _suite(name, checks, hard=True):
    failures = [c for c in checks if not c[1]]
    return {"suite": name, "hard": hard, "passed": len(checks) - len(failures),
            "total": len(checks),
            "failures": [{"check": c[0], "value": c[2]} for c in failures[:20]]}


def _verify_suites(cfg: ExperimentConfig):
    pot, prof = cfg.potential, cfg.profile
    tol = cfg.tolerances
    rel = _relation(cfg)
    wf = WFunction(pot, prof)
    xs = _subsample(cfg.xi_grid.values(), 13)
    vs = _subsample(cfg.v_grid.values(), 9)

    inside = np.linspace(prof.p_min, prof.p_max, 11)
    k_in = np.asarray(rel.K(inside))
    k_grid = np.asarray(rel.K(cfg.xi_grid.values()))
    br = bounds_report(rel, vs, xs, tol=tol.lower_bound)
    checks = [("K vanishes on the sticking interval", bool(np.all(k_in == 0)),
               float(np.max(np.abs(k_in)))),
              ("K nondecreasing", bool(np.all(np.diff(k_grid) >= -tol.lower_bound)),
               float(np.min(np.diff(k_grid), initial=0.0))),
              ("two-sided bounds on R_eff, R_eff*, K", br["ok"], br["worst"])]
    yield _suite("kinetics", checks)

    checks = []
    for v in np.concatenate((-vs[::-1], vs)):
        for xi in xs:
            m = M_lagrange(pot, prof, v, xi, wf=wf).M
            checks.append((f"M >= v xi at ({v:.4g}, {xi:.4g})", m - v * xi >= -tol.lower_bound,
                           m - v * xi))
            m0 = float(M_zero(pot, prof, xi))
            checks.append((f"M >= M0 at ({v:.4g}, {xi:.4g})", m - m0 >= -tol.lower_bound, m - m0))
    yield _suite("lower-bounds", checks)

    checks = []
    for v in vs[vs > 0]:
        r = contact_residual(rel, v, wf=wf)
        xi = float(rel.dR_eff(v))
        checks.append((f"contact at v={v:.4g}", abs(r) <= tol.contact * (1 + abs(v * xi)), r))
    yield _suite("contact-set", checks)

    checks = []
    for v in (0.5, 1.0, 2.0):
        for xi in (prof.p_min - 0.5, 0.5 * (prof.p_min + prof.p_max), prof.p_max + 0.5):
            a = M_lagrange(pot, prof, v, xi, wf=wf).M
            b = M_density(pot, prof, v, xi, n=512).M
            checks.append((f"lagrange vs density at ({v}, {xi:.4g})",
                           abs(a - b) <= tol.route * (1 + abs(a)), a - b))
    yield _suite("routes", checks)

    checks = []
    land = cfg.landscape()
    try:
        if prof.is_zero or not prof.is_discrete:
            tr = integrate_wiggly(land, pot, cfg.u0, cfg.T, cfg.controls)
            checks.append((f"EDB of the eps={cfg.eps} flow", tr.edb_relative() <= tol.edb,
                           tr.edb_relative()))
            checks.append(("cumulative dissipation nondecreasing",
                           bool(np.all(np.diff(tr.D_cum) >= -tol.lower_bound)),
                           float(np.min(np.diff(tr.D_cum), initial=0.0))))
        if land.wiggle_is_uniform:
            te = integrate_effective(rel, land, cfg.u0, cfg.T, cfg.controls)
            checks.append(("EDB of the effective flow", te.edb_relative() <= tol.edb,
                           te.edb_relative()))
    except FlowError as exc:
        checks.append((f"integration: {exc}", False, math.nan))
    yield _suite("edb", checks)

    checks = []
    for v in vs:
        reff = float(rel.R_eff(v))
        for xi in xs:
            m = M_lagrange(pot, prof, v, xi, wf=wf).M
            d = reff + float(rel.R_eff_star(xi)) - m
            checks.append((f"M_eff >= M at ({v:.4g}, {xi:.4g})", d >= -tol.meff, d))
    yield _suite("meff-conjecture", checks, hard=False)


def cmd_verify(cfg: ExperimentConfig, out: Path) -> tuple:
    suites = list(_verify_suites(cfg))
    ok = all(s["passed"] == s["total"] for s in suites if s["hard"])
    report = {"ok": ok, "suites": suites}
    f = out / "verify_report.json"
    _write_json(f, report)
    for s in suites:
        if s["passed"] == s["total"]:
            status = "PASS"
        else:
            status = "FAIL" if s["hard"] else "WARN"
        print(f"{s['suite']:16s} {s['passed']:4d}/{s['total']:<4d} {status}")
    return ok, [f]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wiggly", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("kinetic-relation", "contact-surface", "flow", "sweep", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON experiment document")
        p.add_argument("--out", type=Path, help="output directory (overrides the config)")
        p.add_argument("--jobs", type=int, default=1, help="parallel eps runs in a sweep")
        p.add_argument("--tol-scale", type=float, default=1.0,
                       help="multiply every verification tolerance")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.tol_scale <= 0:
            raise ConfigError("--tol-scale must be positive")
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    cfg = replace(cfg, tolerances=cfg.tolerances.scaled(args.tol_scale))
    out = args.out or Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    if args.command == "kinetic-relation":
        files = cmd_kinetic_relation(cfg, out)
    elif args.command == "contact-surface":
        files = cmd_contact_surface(cfg, out)
    elif args.command == "flow":
        files = cmd_flow(cfg, out)
    elif args.command == "sweep":
        files = cmd_sweep(cfg, out, jobs=args.jobs)
    else:
        ok, files = cmd_verify(cfg, out)
        for f in files:
            print(f)
        return 0 if ok else 1
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
