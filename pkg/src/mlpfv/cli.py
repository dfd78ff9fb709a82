"""Command-line interface.

``solver run``     execute a case preset and write its artifact directory
``solver verify``  property-check reports (scalar max/min principle, invariants)
``solver mesh``    mesh generation to the text format
"""

from __future__ import annotations

import argparse
import sys

from .errors import SolverError

LIMITER_CHOICES = ("none", "bj", "venkat", "mlp", "mlp-pw")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solver",
        description="Unstructured finite-volume Euler solver with MLP-family limiters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a case preset")
    run.add_argument("--case", required=True,
                     choices=("sod", "expansion", "wedge", "step"))
    run.add_argument("--limiter", choices=LIMITER_CHOICES)
    run.add_argument("--smooth-fn", dest="smooth_fn", choices=("f_bj", "f_v"))
    run.add_argument("--K", type=float)
    run.add_argument("--cfl", type=float)
    run.add_argument("--flux", choices=("hllc", "rusanov"))
    run.add_argument("--gamma", type=float)
    run.add_argument("--t-end", dest="t_end", type=float)
    run.add_argument("--max-iters", dest="max_iters", type=int)
    run.add_argument("--residual-drop", dest="residual_drop", type=float)
    run.add_argument("--nx", type=int)
    run.add_argument("--ny", type=int)
    run.add_argument("--jitter", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--mesh", help="mesh text file overriding the preset geometry")
    run.add_argument("--out", help="artifact directory (default: out)")
    run.add_argument("--snapshot-times", dest="snapshot_times", type=float,
                     nargs="+", help="extra unsteady snapshot instants")
    run.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    run.add_argument("--config", help="flat key=value configuration file")
    run.add_argument("--log-every", type=int, default=0,
                     help="print steady-residual progress every N iterations")

    verify = sub.add_parser("verify", help="property-check reports")
    verify.add_argument("target", choices=("scalar", "properties"))

    mesh = sub.add_parser("mesh", help="mesh utilities")
    mesh_sub = mesh.add_subparsers(dest="mesh_command", required=True)
    gen = mesh_sub.add_parser("gen", help="generate a mesh text file")
    gen.add_argument("kind", choices=("rect", "step", "wedge"))
    gen.add_argument("--out", required=True)
    gen.add_argument("--nx", type=int, default=21)
    gen.add_argument("--ny", type=int, default=11)
    gen.add_argument("--bounds", type=float, nargs=4, default=(0.0, 0.0, 1.0, 1.0),
                     metavar=("X0", "Y0", "X1", "Y1"))
    gen.add_argument("--pattern", choices=("alternating", "uniform"),
                     default="alternating")
    gen.add_argument("--jitter", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_run(args) -> int:
    from .cases import resolve_run, run_case
    from .config import parse_config_file

    file_values = parse_config_file(args.config) if args.config else None
    cli_values = {
        key: getattr(args, key)
        for key in (
            "limiter", "smooth_fn", "K", "cfl", "flux", "gamma", "t_end",
            "max_iters", "residual_drop", "nx", "ny", "jitter", "seed",
            "mesh", "out",
        )
        if getattr(args, key) is not None
    }
    if args.snapshot_times:
        cli_values["snapshot_times"] = tuple(args.snapshot_times)
    if args.no_plots:
        cli_values["plots"] = False
    case = args.case or (file_values or {}).get("case")
    run = resolve_run(case, file_values, cli_values)
    result = run_case(run, log_every=args.log_every)
    print(f"case '{run.case}' with limiter '{run.limiter}' finished; "
          f"artifacts in {result.outdir}")
    if result.history is not None:
        print(f"  {result.history.iterations} iterations, final normalized "
              f"residual {result.history.residuals[-1]:.3e}")
    return 0


def _cmd_verify(args) -> int:
    from .verify import verify_properties, verify_scalar

    if args.target == "scalar":
        ok = verify_scalar()
    else:
        ok = verify_properties()
    print("all checks passed" if ok else "CHECKS FAILED")
    return 0 if ok else 1


def _cmd_mesh(args) -> int:
    from .mesh import (
        generate_rect_tri_mesh,
        generate_step_mesh,
        generate_wedge_mesh,
        save_mesh,
    )

    if args.kind == "rect":
        mesh = generate_rect_tri_mesh(
            args.nx, args.ny, tuple(args.bounds), args.pattern,
            jitter=args.jitter, seed=args.seed,
        )
    elif args.kind == "step":
        mesh = generate_step_mesh(ny=args.ny)
    else:
        mesh = generate_wedge_mesh(nx=args.nx, ny=args.ny)
    save_mesh(mesh, args.out)
    print(f"wrote {mesh.num_cells} cells, {mesh.num_vertices} vertices, "
          f"{mesh.num_faces} faces to {args.out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_mesh(args)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
