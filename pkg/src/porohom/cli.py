"""Command-line entry point.

Subcommands: mesh, cell, micro, macro, verify, converge.  Each takes a
required ``--config`` path plus a handful of numeric overrides; failures
print one categorized error line and exit nonzero.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import pipeline
from .config import load_config
from .errors import ToolkitError


def _add_common(p):
    p.add_argument("--config", required=True, help="path to the config file")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--epsilon", type=float, help="override geometry.epsilon")
    p.add_argument("--dt", type=float, help="override run.dt")
    p.add_argument("--T", type=float, help="override run.T")
    p.add_argument("--h-micro", type=float, help="override geometry.h_micro")
    p.add_argument("--h-macro", type=float, help="override geometry.h_macro")
    p.add_argument("--h-cell", type=float, help="override geometry.h_cell")
    p.add_argument("--n-gamma", type=int, help="override geometry.n_gamma")
    p.add_argument("--radius", type=float, help="override geometry.radius")


def _triple(text):
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected 'a11,a12,a22'")
    return tuple(parts)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="porohom",
        description="Pore-scale reactive transport, homogenized model and "
                    "corrector verification on periodically perforated domains.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="generate and export the meshes")
    _add_common(p)

    p = sub.add_parser("cell", help="solve the periodic cell problems")
    _add_common(p)

    p = sub.add_parser("micro", help="run the pore-scale simulation")
    _add_common(p)

    p = sub.add_parser("macro", help="run the homogenized simulation")
    _add_common(p)
    p.add_argument("--cell-report", help="reuse tensors from a cell report JSON")
    p.add_argument("--tensor-a", type=_triple, help="inline A as 'a11,a12,a22'")
    p.add_argument("--tensor-b", type=_triple, help="inline B as 'b11,b12,b22'")
    p.add_argument("--porosity", type=float, help="inline pore fraction")
    p.add_argument("--interface-measure", type=float,
                   help="inline cell interface length")

    p = sub.add_parser("verify", help="single-epsilon corrector verification")
    _add_common(p)

    p = sub.add_parser("converge", help="epsilon sweep of the corrector norms")
    _add_common(p)
    p.add_argument("--eps", help="comma-separated epsilon list, e.g. 0.2,0.1")

    return parser


def _apply_overrides(cfg, args):
    geo = cfg.geometry
    for attr, key in (("epsilon", "epsilon"), ("h_micro", "h_micro"),
                      ("h_macro", "h_macro"), ("h_cell", "h_cell"),
                      ("n_gamma", "n_gamma"), ("radius", "radius")):
        val = getattr(args, key, None)
        if val is not None:
            geo = replace(geo, **{attr: val})
    run = cfg.run
    if args.dt is not None:
        run = replace(run, dt=args.dt)
    if args.T is not None:
        run = replace(run, T=args.T)
    output = cfg.output
    if args.out is not None:
        output = replace(output, dir=args.out)
    return replace(cfg, geometry=geo, run=run, output=output).validate()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        outdir = cfg.output.dir
        if args.command == "mesh":
            pipeline.cmd_mesh(cfg, outdir)
        elif args.command == "cell":
            report = pipeline.cmd_cell(cfg, outdir)
            a = report["A"]
            print(f"A = [[{a[0][0]:.6g}, {a[0][1]:.3g}], "
                  f"[{a[1][0]:.3g}, {a[1][1]:.6g}]], "
                  f"porosity = {report['porosity']:.6g}")
        elif args.command == "micro":
            summary = pipeline.cmd_micro(cfg, outdir)
            print(f"micro run finished in {summary['wall_time']:.2f} s "
                  f"({summary['n_vertices']} vertices)")
        elif args.command == "macro":
            summary = pipeline.cmd_macro(
                cfg, outdir, cell_report=args.cell_report,
                tensor_a=args.tensor_a, tensor_b=args.tensor_b,
                porosity=args.porosity,
                interface_measure=args.interface_measure)
            print(f"macro run finished in {summary['wall_time']:.2f} s "
                  f"({summary['n_vertices']} vertices)")
        elif args.command == "verify":
            report = pipeline.cmd_verify(cfg, outdir)
            print(f"wall time ratio macro/micro = "
                  f"{report['wall_time_ratio']:.3f}")
        elif args.command == "converge":
            eps_list = None
            if args.eps:
                eps_list = [float(x) for x in args.eps.split(",") if x.strip()]
            report = pipeline.cmd_converge(cfg, outdir, eps_list)
            print(f"{len(report['rows'])} epsilon rows written")
        print(f"outputs in {outdir}")
    except ToolkitError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
