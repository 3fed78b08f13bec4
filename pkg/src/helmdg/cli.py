"""Command-line entry point: `helmdg <experiment> [options]`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (
    ExperimentConfig,
    run_convergence,
    run_critical_mesh_search,
    run_dof_table,
    run_pollution_comparison,
    run_sensitivity,
    run_stability_sweep,
    run_trace_dump,
)
from .mesh import build_hexagon_mesh, build_square_with_hole_mesh, write_mesh_dump

_RUNNERS = {
    "stability": run_stability_sweep,
    "convergence": run_convergence,
    "critical": run_critical_mesh_search,
    "sensitivity": run_sensitivity,
    "pollution": run_pollution_comparison,
    "dof-table": run_dof_table,
    "trace": run_trace_dump,
}


def parse_complex(text: str) -> complex:
    """Parse 'a+bi' (or plain real) penalty values."""
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse complex value {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helmdg",
        description="Desk-scale Helmholtz DG/FEM experiment runner",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _add_common(p)
    dump = sub.add_parser("mesh-dump", help="write a mesh to a text dump")
    dump.add_argument("--m", type=int, nargs="+", required=True)
    dump.add_argument("--domain", choices=["hexagon", "square-hole"], default="hexagon")
    dump.add_argument("--out", type=Path, default=Path("results"))
    return parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=float, nargs="+", default=None, help="wave numbers")
    p.add_argument("--m", type=int, nargs="+", default=None, help="mesh subdivisions")
    p.add_argument("--preset", choices=["A", "B"], default="A")
    p.add_argument("--gamma0", type=parse_complex, default=None)
    p.add_argument("--gamma1", type=parse_complex, default=None,
                   help="complex values as a+bi")
    p.add_argument("--beta1", type=parse_complex, default=None)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--solver", choices=["auto", "band", "dense", "sparse", "gmres"],
                   default="auto")
    p.add_argument("--quad-degree", type=int, default=5)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--deterministic", action="store_true", default=True)
    p.add_argument("--force", action="store_true")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.experiment == "mesh-dump":
        args.out.mkdir(parents=True, exist_ok=True)
        for m in args.m:
            mesh = (build_hexagon_mesh(m) if args.domain == "hexagon"
                    else build_square_with_hole_mesh(m))
            target = args.out / f"mesh_{args.domain}_m{m}.txt"
            write_mesh_dump(mesh, target)
            print(f"wrote {target}")
        return 0
    cfg = ExperimentConfig(
        k_values=tuple(args.k) if args.k else (),
        m_values=tuple(args.m) if args.m else (),
        preset=args.preset,
        gamma0=args.gamma0,
        gamma1=args.gamma1,
        beta1=args.beta1,
        sigma=args.sigma,
        solver=args.solver,
        quad_degree=args.quad_degree,
        out_dir=args.out,
        deterministic=args.deterministic,
        force=args.force,
    )
    path, rows = _RUNNERS[args.experiment](cfg)
    failures = sum(1 for r in rows if str(r.get("status", "ok")).startswith(("failed", "unresolved")))
    print(f"wrote {path} ({len(rows)} rows, {failures} failed)")
    if failures and not args.force:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
