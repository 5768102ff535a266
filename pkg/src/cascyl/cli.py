"""Command-line front end: single points, figure sweeps and the validation suite.

Lengths are unitless; outputs are the dimensionless combinations E L/(hbar c)
and E/E0 with E0 = hbar c/(2 pi R1).  Exit codes: 0 ok, 1 validation failure,
2 usage error, 3 geometry error, 4 convergence error.
"""

import argparse
import concurrent.futures
import json
import math
import sys

from . import __version__
from .asymptotics import Family, de_beta, de_energy, far_energy, far_integral_constants, pfa_energy
from .energy import Geometry, casimir_energy, casimir_force
from .errors import ConvergenceError, GeometryError
from .kernel import QuadratureSpec
from .scattering import BoundaryCondition

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_GEOMETRY = 3
EXIT_CONVERGENCE = 4

SWEEP_HEADER = "d_over_R,E_over_E0,E_asympt_over_E0,ratio,status"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cascyl",
        description="Casimir interaction of a sphere and a cylinder")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, geometry=True):
        p.add_argument("--bc", default="dirichlet",
                       choices=["dirichlet", "neumann", "pec"])
        if geometry:
            p.add_argument("--r1", type=float, default=1.0, help="sphere radius")
            p.add_argument("--r2", type=float, default=1.0, help="cylinder radius")
            group = p.add_mutually_exclusive_group()
            group.add_argument("--d", type=float, help="surface gap")
            group.add_argument("--d-over-r", type=float, dest="d_over_r",
                               help="gap in units of r1")
        p.add_argument("--lmax", type=int, default=None,
                       help="starting sphere truncation (default: R/d heuristic)")
        p.add_argument("--nmax", type=int, default=256,
                       help="hard cap on the cylinder order sum")
        p.add_argument("--rel-tol", type=float, default=1e-4, dest="rel_tol")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    add_common(sub.add_parser("energy", help="single-point energy"))
    add_common(sub.add_parser("force", help="single-point force"))

    sweep = sub.add_parser("sweep", help="d/R sweep against the far-field formula")
    add_common(sweep)
    sweep.add_argument("--points", type=int, default=15)
    sweep.add_argument("--d-over-r-min", type=float, default=1.0)
    sweep.add_argument("--d-over-r-max", type=float, default=100.0)
    sweep.add_argument("--jobs", type=int, default=1)

    asympt = sub.add_parser("asympt", help="closed-form asymptotics at one point")
    add_common(asympt)

    validate = sub.add_parser("validate", help="desk-scale validation suite")
    add_common(validate, geometry=False)
    return parser


def _resolve_gap(args, parser):
    if args.d is not None and args.d_over_r is not None:
        parser.error("give exactly one of --d and --d-over-r")
    if args.d is None and args.d_over_r is None:
        parser.error("give exactly one of --d and --d-over-r")
    return args.d if args.d is not None else args.d_over_r * args.r1


def _check_tolerance(args, parser):
    if not (1e-12 < args.rel_tol < 1e-1):
        parser.error("--rel-tol must lie in (1e-12, 1e-1)")


def _quad(args):
    return QuadratureSpec(n_cap=args.nmax)


def _config_dict(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "out"}
    return cfg


def _emit(args, payload_rows, diagnostics, csv_header, csv_line):
    """Write rows as CSV or a four-key JSON document."""
    if args.format == "json":
        doc = {"config": _config_dict(args), "rows": payload_rows,
               "diagnostics": diagnostics, "version": __version__}
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    else:
        lines = [csv_header]
        lines.extend(csv_line(row) for row in payload_rows)
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_energy(args, parser):
    d = _resolve_gap(args, parser)
    geom = Geometry(args.r1, args.r2, d)
    res = casimir_energy(geom, args.bc, l_max=args.lmax, rel_tol=args.rel_tol,
                         quad=_quad(args))
    row = {"bc": args.bc, "r1": args.r1, "r2": args.r2, "d": d,
           "E_L_over_hbar_c": res.e_dimensionless, "E_over_E0": res.e_over_e0,
           "error_estimate": res.error_estimate,
           "l_max": res.diagnostics["l_max"], "status": "ok"}
    diags = {k: v for k, v in res.diagnostics.items() if k != "settings"}
    header = "bc,r1,r2,d,E_L_over_hbar_c,E_over_E0,error_estimate,l_max,status"
    _emit(args, [row], diags, header, lambda r: "%s,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%d,%s" % (
        r["bc"], r["r1"], r["r2"], r["d"], r["E_L_over_hbar_c"], r["E_over_E0"],
        r["error_estimate"], r["l_max"], r["status"]))
    return EXIT_OK


def _run_force(args, parser):
    d = _resolve_gap(args, parser)
    geom = Geometry(args.r1, args.r2, d)
    res = casimir_force(geom, args.bc, l_max=args.lmax, rel_tol=args.rel_tol,
                        quad=_quad(args))
    row = {"bc": args.bc, "r1": args.r1, "r2": args.r2, "d": d,
           "F_L2_over_hbar_c": res.f_dimensionless,
           "richardson_error": res.richardson_error,
           "fd_consistency": res.fd_consistency,
           "l_max": res.diagnostics["l_max"], "status": "ok"}
    header = "bc,r1,r2,d,F_L2_over_hbar_c,richardson_error,fd_consistency,l_max,status"
    _emit(args, [row], dict(res.diagnostics), header,
          lambda r: "%s,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%d,%s" % (
              r["bc"], r["r1"], r["r2"], r["d"], r["F_L2_over_hbar_c"],
              r["richardson_error"], r["fd_consistency"], r["l_max"], r["status"]))
    return EXIT_OK


def _sweep_point(payload):
    """One sweep row; top level so a process pool can pickle it."""
    (bc, r1, r2, d_over_r, lmax, nmax, rel_tol) = payload
    d = d_over_r * r1
    geom = Geometry(r1, r2, d)
    L = geom.center_distance
    e0_far = far_energy(bc, Family.SPHERE_CYLINDER, r1, r2, L) * 2.0 * math.pi * r1
    try:
        res = casimir_energy(geom, bc, l_max=lmax, rel_tol=rel_tol,
                             quad=QuadratureSpec(n_cap=nmax))
        e_over_e0 = res.e_over_e0
        status = "ok"
    except (ConvergenceError, GeometryError) as err:
        return {"d_over_R": d_over_r, "E_over_E0": float("nan"),
                "E_asympt_over_E0": e0_far, "ratio": float("nan"),
                "status": "error:%s" % type(err).__name__}
    return {"d_over_R": d_over_r, "E_over_E0": e_over_e0,
            "E_asympt_over_E0": e0_far, "ratio": e_over_e0 / e0_far,
            "status": status}


def _run_sweep(args, parser):
    if args.points < 1:
        parser.error("--points must be positive")
    ratios = [args.d_over_r_min * (args.d_over_r_max / args.d_over_r_min) ** (i / max(args.points - 1, 1))
              for i in range(args.points)]
    payloads = [(args.bc, args.r1, args.r2, r, args.lmax, args.nmax, args.rel_tol)
                for r in ratios]
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]
    diags = {"points": args.points, "jobs": args.jobs}
    _emit(args, rows, diags, SWEEP_HEADER,
          lambda r: "%.12e,%.12e,%.12e,%.12e,%s" % (
              r["d_over_R"], r["E_over_E0"], r["E_asympt_over_E0"], r["ratio"], r["status"]))
    if any(r["status"] != "ok" for r in rows):
        return EXIT_CONVERGENCE
    return EXIT_OK


def _run_asympt(args, parser):
    d = _resolve_gap(args, parser)
    geom = Geometry(args.r1, args.r2, d)
    L = geom.center_distance
    rows = [
        {"model": "far_leading", "value": far_energy(args.bc, Family.SPHERE_CYLINDER,
                                                     args.r1, args.r2, L)},
        {"model": "pfa", "value": pfa_energy(args.bc, args.r1, args.r2, d)},
        {"model": "derivative_expansion", "value": de_energy(args.bc, args.r1, args.r2, d)},
        {"model": "de_beta", "value": de_beta(args.bc)},
    ]
    _emit(args, rows, {"L": L}, "model,value",
          lambda r: "%s,%.12e" % (r["model"], r["value"]))
    return EXIT_OK


def _validation_checks(rel_tol):
    """Desk-scale checks: (name, observed, expected, tolerance) tuples."""
    checks = []
    for const in far_integral_constants():
        checks.append(("far_integral_%s" % const.name, const.value,
                       const.expected, 1e-6))
    checks.append(("far_neumann_coefficient",
                   -far_energy("neumann", Family.SPHERE_CYLINDER, 1.0, 1.0, 10.0)
                   * 10.0**6 / (1.0**3 * 1.0**2), 71.0 / (45.0 * math.pi), 1e-12))
    checks.append(("pfa_conductor_over_dirichlet",
                   pfa_energy("pec", 1.0, 2.0, 0.1) / pfa_energy("dirichlet", 1.0, 2.0, 0.1),
                   2.0, 1e-15))
    checks.append(("pfa_sphere_plane_limit",
                   pfa_energy("dirichlet", 1.0, 1e6, 0.05),
                   -math.pi**3 / (1440.0 * 0.05**2), 1e-3))
    checks.append(("de_beta_dirichlet", de_beta("dirichlet"), 2.0 / 3.0, 1e-15))
    checks.append(("de_beta_neumann", de_beta("neumann"),
                   (2.0 / 3.0) * (1.0 - 30.0 / math.pi**2), 1e-15))

    from .special import bessel_ik_scaled
    worst = 0.0
    for nu in (0, 1, 5, 0.5, 7.5):
        for z in (1e-3, 0.1, 1.0, 10.0, 100.0):
            pair = bessel_ik_scaled(nu, z)
            worst = max(worst, abs(pair.wronskian() + 1.0 / z) * z)
    checks.append(("bessel_wronskian_residual", worst, 0.0, 1e-12))

    from .energy import omega_integral
    q = 0.1
    dilog = sum(q**s / s**2 for s in range(1, 40))
    toy, _, _ = omega_integral(lambda om: math.log1p(-q * math.exp(-2.0 * om)), 2.0)
    checks.append(("toy_dilogarithm_energy", toy, -0.5 * dilog, 1e-8))

    geom = Geometry(1.0, 1.0, 2.0)
    for bc in ("dirichlet", "neumann"):
        res = casimir_energy(geom, bc, l_max=6, rel_tol=1e-3)
        checks.append(("energy_negative_%s" % bc,
                       1.0 if res.e_dimensionless < 0.0 else 0.0, 1.0, 0.5))
    res = casimir_energy(geom, "pec", l_max=4, rel_tol=1e-3)
    checks.append(("energy_negative_pec",
                   1.0 if res.e_dimensionless < 0.0 else 0.0, 1.0, 0.5))
    force = casimir_force(geom, "dirichlet", l_max=6, rel_tol=1e-3)
    checks.append(("force_attractive_dirichlet",
                   1.0 if force.f_dimensionless < 0.0 else 0.0, 1.0, 0.5))
    return checks


def _run_validate(args, parser):
    checks = _validation_checks(args.rel_tol)
    failed = 0
    for name, observed, expected, tol in checks:
        scale = max(abs(expected), 1e-300)
        ok = abs(observed - expected) <= tol * scale
        if not ok:
            failed += 1
        print("%s %-34s observed=%.12g expected=%.12g tol=%g" % (
            "PASS" if ok else "FAIL", name, observed, expected, tol))
    print("%d/%d checks passed" % (len(checks) - failed, len(checks)))
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_tolerance(args, parser)
    runner = {"energy": _run_energy, "force": _run_force, "sweep": _run_sweep,
              "asympt": _run_asympt, "validate": _run_validate}[args.command]
    try:
        return runner(args, parser)
    except GeometryError as err:
        print("geometry error: %s" % err, file=sys.stderr)
        return EXIT_GEOMETRY
    except ConvergenceError as err:
        print("convergence error: %s" % err, file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
