"""Command-line front end: ``imexflow <subcommand> [options]``."""
from __future__ import annotations

import argparse
import math
import os
import sys

from . import harness, stability
from .tableaux import builtin_tableau, tableau_csv


def _write(text: str, out: str | None, filename: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, filename)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(path, file=sys.stderr)


def _config(args) -> harness.RunConfig:
    if args.config:
        return harness.load_config(args.config)
    return harness.RunConfig().resolved()


def _dt_list(args, cfg) -> list[float]:
    if args.dts:
        return [harness._eval_pow2(x) for x in harness.split_methods(args.dts)]
    if args.dt_exp:
        lo, hi = args.dt_exp
        return [2.0 ** -k for k in range(min(lo, hi), max(lo, hi) + 1)]
    return [cfg.dt / 2**k for k in range(args.halvings + 1)]


def cmd_converge(args) -> int:
    cfg = _config(args)
    methods = harness.split_methods(args.methods) if args.methods else harness.split_methods(cfg.method)
    records = harness.converge(cfg, methods, _dt_list(args, cfg), jobs=args.jobs, outdir=args.out)
    _write(harness.convergence_csv(records), args.out, "convergence.csv")
    return 0


def cmd_critical_cfl(args) -> int:
    cfg = _config(args)
    method = args.method or cfg.method
    res = harness.critical_cfl(cfg, method, tuple(args.bracket), rtol=args.rtol)
    text = "method,dt_star,dt_unstable,cfl_star\n"
    text += f"{res.method},{harness.fmt(res.dt_star)},{harness.fmt(res.dt_unstable)},{harness.fmt(res.cfl)}\n"
    _write(text, args.out, "critical_cfl.csv")
    print(f"# evaluations={res.evaluations}; CFL uses |lambda_c|max = pi*max(N/L)", file=sys.stderr)
    return 0


def _scan(args):
    stability.SplitMode.parse(args.mode)
    return stability.scan_domain(args.method, args.mode, (args.re_min, args.re_max),
                                 (args.im_min, args.im_max), args.nx, args.ny, scaled=args.scaled)


def _metadata_stderr(meta: dict) -> None:
    for k, v in meta.items():
        print(f"# {k}: {v}", file=sys.stderr)


def cmd_stability_domain(args) -> int:
    scan = _scan(args)
    _write(scan.to_csv(), args.out, "stability_domain.csv")
    meta = scan.metadata()
    meta["threshold"] = "|R| <= 1"
    meta["stable_points"] = int((scan.absR <= 1.0).sum())
    _metadata_stderr(meta)
    return 0


def cmd_accuracy_domain(args) -> int:
    scan = _scan(args)
    _write(scan.to_csv(), args.out, "accuracy_domain.csv")
    meta = scan.metadata()
    meta["threshold"] = f"|eps| <= {args.threshold:g}"
    meta["accurate_points"] = int((scan.absErr <= args.threshold).sum())
    _metadata_stderr(meta)
    return 0


def cmd_critical_imag(args) -> int:
    y = stability.critical_imag(args.method, args.mode, args.re_part, scaled=args.scaled)
    label = stability.method_label(args.method)
    text = f"method,re_part,y_star\n{label},{harness.fmt(args.re_part)},{harness.fmt(y)}\n"
    _write(text, args.out, "critical_imag.csv")
    interp = "scaled z_s" if args.scaled else "raw z"
    print(f"# mode={stability.SplitMode.parse(args.mode).value} argument={interp} "
          f"unbounded={math.isinf(y)}", file=sys.stderr)
    return 0


def cmd_dump_tableau(args) -> int:
    _write(tableau_csv(builtin_tableau(args.name)), args.out, f"{args.name}.csv")
    return 0


_MODE_HELP = "implicit, explicit or semi-implicit (default)"


def build_parser() -> argparse.ArgumentParser:
    def global_flags(parser, suppress):
        default = argparse.SUPPRESS if suppress else None
        parser.add_argument("--config", default=default, help="key = value run configuration file")
        parser.add_argument("--out", default=default, help="output directory (default: stdout)")
        parser.add_argument("--jobs", type=int, default=argparse.SUPPRESS if suppress else 1,
                            help="parallel runs")

    # flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    global_flags(common, suppress=True)
    p = argparse.ArgumentParser(prog="imexflow", description="IMEX time integration experiments")
    global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("converge", parents=[common], help="convergence sweep with EOC")
    c.add_argument("--methods", help="methods, e.g. 'BDF2,RK-CB3e,SDC-Eu(3,5)'")
    c.add_argument("--dts", help="step sizes, e.g. '2^-5,2^-6'")
    c.add_argument("--dt-exp", type=int, nargs=2, metavar=("FIRST", "LAST"),
                   help="use 2^-FIRST ... 2^-LAST")
    c.add_argument("--halvings", type=int, default=4, help="halvings of the config dt")
    c.set_defaults(func=cmd_converge)

    c = sub.add_parser("critical-cfl", parents=[common], help="bisect the critical step size")
    c.add_argument("--method")
    c.add_argument("--bracket", type=float, nargs=2, required=True, metavar=("STABLE", "UNSTABLE"))
    c.add_argument("--rtol", type=float, default=0.02)
    c.set_defaults(func=cmd_critical_cfl)

    def domain_flags(sp):
        sp.add_argument("--method", required=True)
        sp.add_argument("--mode", default="semi-implicit", help=_MODE_HELP)
        sp.add_argument("--re-min", type=float, default=-5.0)
        sp.add_argument("--re-max", type=float, default=1.0)
        sp.add_argument("--im-min", type=float, default=-5.0)
        sp.add_argument("--im-max", type=float, default=5.0)
        sp.add_argument("--nx", type=int, default=121)
        sp.add_argument("--ny", type=int, default=201)
        sp.add_argument("--scaled", action="store_true", help="report z_s = z / substeps")
        sp.add_argument("--threshold", type=float, default=1e-3)

    c = sub.add_parser("stability-domain", parents=[common], help="|R(z)| on a lattice")
    domain_flags(c)
    c.set_defaults(func=cmd_stability_domain)
    c = sub.add_parser("accuracy-domain", parents=[common], help="|R(z) - e^z| on a lattice")
    domain_flags(c)
    c.set_defaults(func=cmd_accuracy_domain)

    c = sub.add_parser("critical-imag", parents=[common], help="critical imaginary part")
    c.add_argument("--method", required=True)
    c.add_argument("--mode", default="semi-implicit", help=_MODE_HELP)
    c.add_argument("--re-part", type=float, default=-0.1)
    c.add_argument("--scaled", action="store_true")
    c.set_defaults(func=cmd_critical_imag)

    c = sub.add_parser("dump-tableau", parents=[common], help="print a tableau as CSV")
    c.add_argument("name")
    c.set_defaults(func=cmd_dump_tableau)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (harness.ConfigError, ValueError, KeyError) as exc:
        print(f"imexflow: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
