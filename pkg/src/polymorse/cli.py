"""Command-line interface.

Subcommands: ``analyze`` (full complex, JSON/DOT/GraphML/curve exports),
``equilibria`` (classification and census only), ``gen`` (fixture meshes
as OFF), ``oracle`` (dense-sampling basin check), ``perturb`` (jitter a
mesh's vertices) and ``bench`` (phase-timing sweep).

Exit codes: 0 success, 1 usage error, 2 validation/parse failure or an
inconclusive probe, 3 non-generic input, 4 internal inconsistency.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import warnings

import numpy as np

from .bench import DEFAULT_SIZES, format_table, run_bench
from .document import (build_document, curves_text, graph_text, parse,
                       serialize)
from .equilibria import classify_edges, find_equilibria
from .errors import (InternalInconsistencyError, MeshValidationError,
                     NonGenericError, OracleInconclusiveError,
                     PolymorseError, ProbeInconclusiveError)
from .fixtures import (make_badguy, make_cube, make_pex, make_random_hull,
                       make_tetrahedron)
from .geom import TolerancePolicy
from .meshio import (format_off, guess_format, parse_mesh, read_source)
from .mscomplex import build_ms_complex
from .oracle import oracle_basins
from .poly import build, with_reference

_GENERATORS = {
    "cube": lambda args: make_cube(),
    "tetra": lambda args: make_tetrahedron(),
    "pex": lambda args: make_pex(),
    "badguy": lambda args: make_badguy(),
    "random": lambda args: make_random_hull(args.n, seed=args.seed),
}


def _origin_arg(text: str):
    if text == "centroid":
        return "centroid"
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"origin must be 'centroid' or 'x,y,z', got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad origin {text!r}: {exc}")


def _tol_arg(text: str):
    try:
        return TolerancePolicy(rel_eps=float(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad tolerance {text!r}: {exc}")


def _add_mesh_options(sp):
    sp.add_argument("mesh", help="mesh file (OFF or OBJ); '-' reads stdin")
    sp.add_argument("--origin", type=_origin_arg, default="centroid",
                    help="reference point 'x,y,z', or 'centroid' (default)")
    sp.add_argument("--tol", type=_tol_arg, default=None, metavar="REL",
                    help="relative tolerance (default 1e-9)")


def _load_referenced(args):
    """Read, parse, build and reference the mesh named by ``args``.

    Returns ``(rp, checksum, provenance)``; the checksum is the SHA-256
    of the raw input text.
    """
    text = read_source(args.mesh)
    checksum = hashlib.sha256(text.encode()).hexdigest()
    vertices, faces = parse_mesh(text, guess_format(args.mesh))
    poly = build(vertices, faces, tolerance=args.tol)
    rp = with_reference(poly, args.origin)
    provenance = "centroid" if args.origin == "centroid" else "given"
    return rp, checksum, provenance


def _write_text(path, text: str) -> None:
    if str(path) == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cmd_analyze(args) -> int:
    rp, checksum, provenance = _load_referenced(args)
    msc = build_ms_complex(rp)
    doc = build_document(msc, checksum=checksum, origin_provenance=provenance)
    if args.curves:
        fmt = "vtk" if str(args.curves).lower().endswith(".vtk") \
            else "obj-polyline"
        _write_text(args.curves, curves_text(msc, fmt))
    if args.out:
        _write_text(args.out, graph_text(msc, args.format, document=doc))
    else:
        census = {"stable": 0, "saddle": 0, "unstable": 0}
        for eq in msc.equilibria:
            census[eq.kind] += 1
        poly = rp.poly
        merged = sum(1 for c in msc.cells if c.merged)
        o = ", ".join(f"{x:.6g}" for x in rp.origin)
        print(f"mesh: {poly.n_vertices} vertices, {poly.n_edges} edges, "
              f"{poly.n_faces} faces (sha256 {checksum[:12]})")
        print(f"origin: {o} ({provenance})")
        print(f"equilibria: {census['stable']} stable, "
              f"{census['saddle']} saddle, {census['unstable']} unstable")
        print(f"curves: {len(msc.curves)}; cells: {len(msc.cells)}"
              + (f" ({merged} merged)" if merged else ""))
        print("validation: "
              + ("pass" if doc.validation["pass"] else "FAIL"))
        print(f"timings: steps 1-3 {doc.timings_ms['steps_1_3']:.2f} ms, "
              f"steps 4-5 {doc.timings_ms['steps_4_5']:.2f} ms")
    return 0


def _cmd_equilibria(args) -> int:
    rp, _checksum, _provenance = _load_referenced(args)
    classification = classify_edges(rp)
    equilibria, report = find_equilibria(rp, classification)
    census = {"stable": 0, "saddle": 0, "unstable": 0}
    for eq in equilibria:
        print(eq)
        census[eq.kind] += 1
    s, h, u = census["stable"], census["saddle"], census["unstable"]
    print(f"census: {s} stable, {h} saddle, {u} unstable "
          f"(S+U-H = {s + u - h})")
    for finding in report.findings:
        print(f"finding: {finding}", file=sys.stderr)
    print(f"status: {report.status}")
    return 0


def _cmd_gen(args) -> int:
    poly = _GENERATORS[args.fixture](args)
    sys.stdout.write(format_off(poly.vertices, poly.faces))
    return 0


def _cmd_oracle(args) -> int:
    rp, _checksum, _provenance = _load_referenced(args)
    against = None
    if args.against:
        with open(args.against) as fh:
            against = parse(fh.read())
    result = oracle_basins(rp, samples=args.samples, step=args.step,
                           seed=args.seed, against=against)
    print(f"samples: {result.samples} ({result.ambiguous} ambiguous), "
          f"step {result.step:.6g}, spacing {result.spacing:.6g}")
    for uid, count in sorted(result.census.items()):
        print(f"basin of unstable {uid}: {count} samples")
    print(f"adjacency: {len(result.adjacency)} stable-unstable incidences")
    if against is not None:
        print(f"disagreements vs document: {len(result.disagreements)}")
    return 0


def _cmd_perturb(args) -> int:
    text = read_source(args.mesh)
    vertices, faces = parse_mesh(text, guess_format(args.mesh))
    rng = np.random.default_rng(args.seed)
    offsets = rng.normal(size=(len(vertices), 3))
    norms = np.linalg.norm(offsets, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    moved = np.asarray(vertices, dtype=float) + args.eps * offsets / norms
    sys.stdout.write(format_off(moved, faces))
    return 0


def _cmd_bench(args) -> int:
    rows = run_bench(sizes=tuple(args.sizes), reps=args.reps, seed=args.seed)
    sys.stdout.write(format_table(rows))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polymorse",
        description="Morse-Smale complex of a convex polyhedron under the "
                    "radial distance from an interior reference point.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="full analysis with exports")
    _add_mesh_options(sp)
    sp.add_argument("--out", default=None,
                    help="output file ('-' for stdout); omit for a summary")
    sp.add_argument("--format", choices=("json", "dot", "graphml"),
                    default="json", help="output format (default json)")
    sp.add_argument("--curves", default=None, metavar="FILE",
                    help="also write curve polylines (.vtk selects VTK, "
                         "anything else OBJ polylines)")
    sp.set_defaults(func=_cmd_analyze)

    sp = sub.add_parser("equilibria",
                        help="edge classes, equilibria and genericity census")
    _add_mesh_options(sp)
    sp.set_defaults(func=_cmd_equilibria)

    sp = sub.add_parser("gen", help="write a fixture mesh as OFF to stdout")
    sp.add_argument("fixture", choices=sorted(_GENERATORS))
    sp.add_argument("--n", type=int, default=100,
                    help="vertex count for 'random' (default 100)")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_gen)

    sp = sub.add_parser("oracle", help="dense-sampling basin cross-check")
    _add_mesh_options(sp)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--step", type=float, default=None,
                    help="ascent step length (default 1%% of the bounding-"
                         "box diameter)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--against", default=None, metavar="FILE",
                    help="analysis JSON to compare basin adjacency with")
    sp.set_defaults(func=_cmd_oracle)

    sp = sub.add_parser("perturb",
                        help="jitter every vertex and write OFF to stdout")
    sp.add_argument("mesh", help="mesh file (OFF or OBJ); '-' reads stdin")
    sp.add_argument("--eps", type=float, required=True,
                    help="perturbation length")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_perturb)

    sp = sub.add_parser("bench", help="phase-timing sweep over random hulls")
    sp.add_argument("--sizes", type=int, nargs="+", default=list(DEFAULT_SIZES))
    sp.add_argument("--reps", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    warnings.showwarning = lambda msg, *a, **k: print(
        f"warning: {msg}", file=sys.stderr)
    try:
        return args.func(args)
    except MeshValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OracleInconclusiveError, ProbeInconclusiveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NonGenericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InternalInconsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except PolymorseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
