"""Command-line interface.

Subcommands: run (full sweep from a JSON config), models (model-operator
spectra as CSV), effective (1D effective operators), strip (one strip
solve), geometry (shape inspection).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import effective_operators, model_operators, strip2d
from .geometry import RobinArc, arclength_resample, max_curvature_on_arc
from .harness import ProblemSpec, geometry_from_config, run_sweep
from .report import write_report


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _build_geometry(args):
    cfg = {"shape": args.shape, "phase_origin": args.phase}
    curve = geometry_from_config(cfg)
    return arclength_resample(curve, args.n_geom)


def cmd_run(args) -> int:
    cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    spec = ProblemSpec.from_config(cfg)
    report = run_sweep(spec, workers=args.workers)
    paths = write_report(report, args.out, plots=not args.no_plots)
    print(f"wrote {paths['csv']}")
    print(f"wrote {paths['metadata']}")
    for p in paths.get("figures", []):
        print(f"wrote {p}")
    n_failed = sum(1 for r in report.rows if r.regime == "failed")
    if n_failed:
        print(f"{n_failed} alpha value(s) failed; see metadata errors", file=sys.stderr)
    return 0


def cmd_models(args) -> int:
    if args.op == "slab":
        gs = model_operators.slab_ground(args.alpha, args.r)
        print("kappa,E1,psi0_sq")
        print(",".join([_fmt(gs.kappa), _fmt(gs.E1), _fmt(gs.psi0_sq)]))
    elif args.op == "airy":
        print("n,a_n")
        for i, z in enumerate(model_operators.airy_zeros(args.n), start=1):
            print(f"{i},{_fmt(z)}")
    elif args.op in ("power", "line"):
        halfline = args.op == "power"
        well = model_operators.power_well_spectrum(args.m, args.beta, halfline, args.n)
        print("n,eigenvalue")
        for i, e in enumerate(well.eigenvalues, start=1):
            print(f"{i},{_fmt(e)}")
    return 0


def cmd_effective(args) -> int:
    geom = _build_geometry(args)
    arc = RobinArc(ell=args.ell)
    lam_p = effective_operators.lambda_prime_eigs(geom, arc, args.alpha, args.n, args.n_grid)
    lam_r = effective_operators.lambda_rho_eigs(
        geom, arc, args.alpha, args.rho, args.n, args.n_grid
    )
    print("n,E_lambda_prime,E_lambda_rho")
    for i in range(args.n):
        print(f"{i + 1},{_fmt(lam_p.eigenvalues[i])},{_fmt(lam_r.eigenvalues[i])}")
    return 0


def cmd_strip(args) -> int:
    geom = _build_geometry(args)
    arc = RobinArc(ell=args.ell)
    spec = strip2d.strip_eigs(
        geom, arc, args.alpha, args.sigma, args.variant, args.n, args.n_s, args.n_t
    )
    print("n,eigenvalue")
    for i, e in enumerate(spec.eigenvalues, start=1):
        print(f"{i},{_fmt(e)}")
    return 0


def cmd_geometry(args) -> int:
    geom = _build_geometry(args)
    print(f"L,{_fmt(geom.L)}")
    print(f"max_abs_curvature,{_fmt(geom.k_max_abs)}")
    if args.ell is not None:
        arc = RobinArc(ell=args.ell)
        info = max_curvature_on_arc(geom, arc)
        print(f"k_star,{_fmt(info.k_star)}")
        print(f"s_star,{_fmt(info.s_star)}")
        print(f"location_class,{info.location_class}")
        print(f"m,{info.m}")
        print(f"dm,{_fmt(info.dm)}")
    if args.inspect:
        print("s,x,y,k,k1,k2")
        for i in range(len(geom.s_grid)):
            print(
                ",".join(
                    [
                        _fmt(geom.s_grid[i]),
                        _fmt(geom.gamma[i, 0]),
                        _fmt(geom.gamma[i, 1]),
                        _fmt(geom.k[i]),
                        _fmt(geom.k1[i]),
                        _fmt(geom.k2[i]),
                    ]
                )
            )
    return 0


def _add_geometry_args(p, need_ell=True):
    p.add_argument("--shape", required=True, help="circle:R or ellipse:a,b")
    p.add_argument("--phase", type=float, default=0.0, help="phase origin of gamma(0)")
    p.add_argument("--n-geom", type=int, default=256, help="geometry sample count")
    if need_ell:
        p.add_argument("--ell", type=float, required=True, help="Robin arc length")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robin-spectra")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("models", help="model-operator spectra as CSV")
    p.add_argument("--op", choices=["slab", "power", "airy", "line"], required=True)
    p.add_argument("--alpha", type=float, default=10.0)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--n", type=int, default=5)
    p.set_defaults(func=cmd_models)

    p = sub.add_parser("effective", help="effective 1D operator spectra")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--rho", type=float, default=0.25)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--n-grid", type=int, default=1024)
    _add_geometry_args(p)
    p.set_defaults(func=cmd_effective)

    p = sub.add_parser("strip", help="strip operator eigenvalues")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--variant", choices=["p", "p+", "p-"], default="p")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--n-s", type=int, default=128)
    p.add_argument("--n-t", type=int, default=64)
    _add_geometry_args(p)
    p.set_defaults(func=cmd_strip)

    p = sub.add_parser("geometry", help="inspect a named shape")
    p.add_argument("--inspect", action="store_true", help="dump sampled rows")
    p.add_argument("--ell", type=float, default=None)
    p.add_argument("--shape", required=True)
    p.add_argument("--phase", type=float, default=0.0)
    p.add_argument("--n-geom", type=int, default=256)
    p.set_defaults(func=cmd_geometry)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
