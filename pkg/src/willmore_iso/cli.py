"""Command line front end: energy reports, constrained flows, mesh
generation, isoperimetric sweeps, and inequality checks.

Exit codes: 0 success, 1 numerical failure (a flow or check that ran
but did not meet its guarantee), 2 input error (unreadable files, bad
arguments, invalid meshes where a valid one is required).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import meshio
from .bounds import SchygullaCurve
from .config import flow_config_from, load_config
from .flow import run_flow
from .functionals import (
    EnergyReport,
    energy_report,
    minkowski_residual,
    simon_check,
    willmore_energy,
)
from .generators import TorusSpec, clifford_torus, icosphere, perturb, torus
from .intersect import self_intersects
from .mesh import validate
from .sweep import CLEAN_STATUSES, energy_trace_svg, run_sweep

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2

FOUR_PI = 4.0 * math.pi
EIGHT_PI = 8.0 * math.pi
ISO_FLOOR = 36.0 * math.pi


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_mesh(path: str):
    try:
        return meshio.load(path)
    except (OSError, ValueError) as exc:
        raise SystemExit(_fail(f"cannot read mesh {path!r}: {exc}"))


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT


def cmd_energy(args) -> int:
    mesh = _load_mesh(args.mesh)
    try:
        report = energy_report(mesh, check_embedded=False)
    except ValueError as exc:
        return _fail(f"cannot evaluate {args.mesh!r}: {exc}")
    print(report.to_kv())
    if args.csv:
        path = Path(args.csv)
        new = not path.exists()
        with open(path, "a", encoding="ascii") as fh:
            if new:
                fh.write(EnergyReport.csv_header() + "\n")
            fh.write(report.to_csv_row() + "\n")
    return EXIT_OK


def cmd_flow(args) -> int:
    mesh = _load_mesh(args.mesh)
    overrides = load_config(args.config) if args.config else {}
    try:
        cfg = flow_config_from(overrides)
    except ValueError as exc:
        return _fail(str(exc))

    final, trace = run_flow(mesh, cfg)
    stem = Path(args.mesh).stem
    out = args.out or f"{stem}_final.obj"
    trace_path = args.trace or f"{stem}_trace.csv"
    meshio.save(final, out)
    with open(trace_path, "w", encoding="ascii") as fh:
        fh.write(trace.to_csv())
    if args.svg:
        if trace.iterations == 0:
            print("note: empty trace, no SVG written", file=sys.stderr)
        else:
            with open(args.svg, "w", encoding="ascii") as fh:
                fh.write(energy_trace_svg(trace))

    w = willmore_energy(final)
    if trace.iterations > 0:
        drift = max(
            abs(trace.final("area") - trace.area_target) / trace.area_target,
            abs(trace.final("volume") - trace.volume_target) / abs(trace.volume_target),
        )
    else:
        drift = 0.0
    print(
        f"final W = {_fmt(w)}  constraint drift = {drift:.3e}  "
        f"status = {trace.status}  iterations = {trace.iterations}"
    )
    print(f"wrote {out} and {trace_path}")
    return EXIT_OK if trace.status in CLEAN_STATUSES else EXIT_NUMERICAL


def cmd_gen(args) -> int:
    try:
        if args.shape == "icosphere":
            mesh = icosphere(args.subdivisions)
        elif args.shape == "torus":
            mesh = torus(TorusSpec(args.tube, args.ring, args.nu, args.nv))
        else:
            mesh = clifford_torus(args.nu, args.nv)
        if args.perturb > 0.0:
            mesh = perturb(mesh, args.perturb, args.seed)
    except ValueError as exc:
        return _fail(str(exc))
    out = args.out or f"{args.shape}.obj"
    meshio.save(mesh, out)
    print(f"wrote {out} ({mesh.n_vertices} vertices, {mesh.n_faces} faces)")
    return EXIT_OK


def _parse_grid(spec: str) -> list[float]:
    path = Path(spec)
    if path.exists():
        tokens = [
            line.split("#", 1)[0].strip()
            for line in path.read_text(encoding="ascii").splitlines()
        ]
        tokens = [t for t in tokens if t]
    else:
        tokens = [t.strip() for t in spec.split(",") if t.strip()]
    if not tokens:
        raise ValueError(f"empty ratio grid {spec!r}")
    return [float(t) for t in tokens]


def cmd_sweep(args) -> int:
    try:
        grid = _parse_grid(args.grid)
        overrides = load_config(args.config) if args.config else {}
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    curve = None
    if args.mode == "ig_probe":
        curve_path = Path(args.curve)
        if not curve_path.exists():
            return _fail(
                f"no energy curve at {curve_path}; run "
                f"'willmore-iso sweep --mode schygulla' first and point "
                f"--curve at its output"
            )
        try:
            curve = SchygullaCurve.load(curve_path)
        except ValueError as exc:
            return _fail(f"cannot load curve {curve_path}: {exc}")

    try:
        result = run_sweep(args.mode, grid, overrides, curve=curve)
    except ValueError as exc:
        return _fail(str(exc))

    out = args.out or f"sweep_{args.mode}.csv"
    result.write(out)
    print(f"wrote {out}")
    for row in result.rows:
        verdict = "" if row.admissible is None else f"  admissible = {str(row.admissible).lower()}"
        print(
            f"R = {_fmt(row.r_target)}  W_min = {_fmt(row.w_min)}"
            f"{verdict}  status = {row.status}"
        )

    if args.mode == "schygulla":
        try:
            curve_out = result.curve()
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        curve_out.save(args.curve)
        print(f"wrote {args.curve}")

    if any(row.status not in CLEAN_STATUSES for row in result.rows):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_check(args) -> int:
    mesh = _load_mesh(args.mesh)
    checks: list[tuple[str, bool, str]] = []

    report = validate(mesh)
    checks.append(("closed_oriented_manifold", report.is_valid, report.summary()))
    if not report.is_valid:
        _print_checks(checks)
        return EXIT_NUMERICAL

    er = energy_report(mesh, check_embedded=False)
    checks.append(
        ("gauss_bonnet", er.gauss_bonnet_residual <= 1e-9,
         f"residual {er.gauss_bonnet_residual:.3e}")
    )
    checks.append(
        ("energy_forms_agree", er.form_spread <= 1e-9, f"spread {er.form_spread:.3e}")
    )
    checks.append(
        ("energy_floor", er.willmore_H2 >= FOUR_PI * 0.98,
         f"W = {_fmt(er.willmore_H2)} vs 4pi = {_fmt(FOUR_PI)}")
    )
    if er.volume > 0.0:
        checks.append(
            ("iso_floor", er.iso >= ISO_FLOOR * 0.98,
             f"iso = {_fmt(er.iso)} vs 36pi = {_fmt(ISO_FLOOR)}")
        )
    else:
        checks.append(("iso_floor", False, f"nonpositive volume {_fmt(er.volume)}"))
    checks.append(("simon_area_diameter", simon_check(mesh), "Area/W <= diam^2"))
    mink = minkowski_residual(mesh)
    checks.append(("minkowski_identity", abs(mink) < 0.05, f"residual {mink:.3e}"))
    if er.willmore_H2 < EIGHT_PI * 0.98:
        hit = self_intersects(mesh)
        checks.append(
            ("li_yau_embedded", not bool(hit),
             "W below 8pi and no self-intersection" if not hit
             else f"W below 8pi but faces {hit.witness} intersect")
        )
    else:
        checks.append(
            ("li_yau_embedded", True, "not applicable: W is not below 8pi * 0.98")
        )

    _print_checks(checks)
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_NUMERICAL


def _print_checks(checks) -> None:
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name} ({detail})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="willmore-iso",
        description="Willmore energy minimization at fixed isoperimetric ratio",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energy", help="print the energy report of a mesh")
    p.add_argument("mesh")
    p.add_argument("--csv", help="append the report as a CSV row to this file")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("flow", help="run the constrained descent on a mesh")
    p.add_argument("mesh")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", help="output mesh path (default <stem>_final.obj)")
    p.add_argument("--trace", help="trace CSV path (default <stem>_trace.csv)")
    p.add_argument("--svg", help="also write an energy-trace SVG plot here")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("gen", help="generate a mesh")
    shape = p.add_subparsers(dest="shape", required=True)
    s = shape.add_parser("icosphere")
    s.add_argument("--subdivisions", type=int, default=4)
    _add_gen_common(s)
    s = shape.add_parser("torus")
    s.add_argument("--tube", type=float, default=1.0)
    s.add_argument("--ring", type=float, default=2.0)
    s.add_argument("--nu", type=int, default=64)
    s.add_argument("--nv", type=int, default=64)
    _add_gen_common(s)
    s = shape.add_parser("clifford")
    s.add_argument("--nu", type=int, default=96)
    s.add_argument("--nv", type=int, default=96)
    _add_gen_common(s)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sweep", help="run an isoperimetric ratio sweep")
    p.add_argument("--mode", choices=("schygulla", "ig_probe"), required=True)
    p.add_argument(
        "--grid", required=True,
        help="comma-separated ratios, or a file with one ratio per line",
    )
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", help="rows CSV path (default sweep_<mode>.csv)")
    p.add_argument(
        "--curve", default="curve.csv",
        help="curve CSV: written by schygulla mode, read by ig_probe",
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="run the inequality checks on a mesh")
    p.add_argument("mesh")
    p.set_defaults(func=cmd_check)

    return parser


def _add_gen_common(p) -> None:
    p.add_argument("--perturb", type=float, default=0.0,
                   help="normal perturbation amplitude relative to bbox diagonal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default <shape>.obj)")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:  # _load_mesh signals input errors this way
        code = exc.code
        return code if isinstance(code, int) else EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
