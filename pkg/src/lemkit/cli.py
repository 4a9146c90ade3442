"""Command line interface.

One binary with subcommands covering the pipeline: trace a level set,
build its face graph, estimate harmonic measures, sample a conformal
welding, construct matching pairs, generate Koch-type curves, certify
the lemniscate conditions, run the Jordan test, and check the
supporting-segment hypothesis on a curve.  Commands hand data to each
other through files (CSV curves, JSON manifests) so pipelines are
scriptable and cacheable.

Exit codes: 0 success (including an inconclusive Jordan verdict),
1 usage or malformed input, 2 violated or negative verdict, 3 refused
hypothesis, 4 numeric failure.  Outputs are pure functions of inputs
and seed; the thread count never changes bytes.  The run manifest
written next to the outputs is the one file that varies (wall time).
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import formats
from .certify import certify_polynomial, certify_rational, jordan_criterion
from .curves import halfplane_segment_hypothesis
from .errors import (FormatError, LemkitError, RefusalError, ViolationError)
from .koch import approximant, dimension, parameter_for_dimension, snowflake
from .lemgraph import build_graph
from .matching import lemniscate_pair, traced_jordan_curve, verify_matching
from .potential import measure_face
from .ratfun import INF, Multiset
from .tracer import trace
from .welding import singularity_probe, weld

OK, USAGE, VIOLATED, REFUSED, NUMERIC = 0, 1, 2, 3, 4


class _UsageError(Exception):
    pass


def _say(args, message: str) -> None:
    """Status line for humans; kept off stdout in --json mode."""
    print(message, file=sys.stderr if args.json else sys.stdout)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_point(text: str) -> complex:
    if text.strip().lower() in ("inf", "infinity"):
        return INF
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise _UsageError(f"cannot parse point {text!r}; use re,im or inf")


def _load_points(path) -> Multiset:
    doc = formats.load_json(path)
    entries = []
    try:
        for item in doc["points"]:
            loc = item["location"]
            p = INF if loc == "inf" else formats.unpair(loc)
            entries.append((p, int(item.get("multiplicity", 1))))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad points file {path}: {exc}") from exc
    return Multiset(tuple(entries))


def _build_parser() -> _Parser:
    parser = _Parser(prog="lemkit", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--json", action="store_true",
                        help="print the primary JSON document to stdout")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--walkers", type=int, default=100_000)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--threads", type=int, default=1)

    mapargs = argparse.ArgumentParser(add_help=False)
    mapargs.add_argument("--map", required=True,
                         help="rational map JSON file")
    mapargs.add_argument("--c", type=float, default=1.0, help="level")
    mapargs.add_argument("--grid", type=int, default=512,
                         help="trace grid resolution")

    p = sub.add_parser("trace", parents=[common, mapargs],
                       help="trace a level set to edge CSVs + manifest")

    p = sub.add_parser("graph", parents=[common],
                       help="build the face graph from a trace manifest")
    p.add_argument("manifest", help="trace manifest JSON")

    p = sub.add_parser("measure", parents=[common, mc],
                       help="harmonic measures of one face's boundary arcs")
    p.add_argument("manifest", help="graph manifest JSON")
    p.add_argument("--face", type=int, default=0)
    p.add_argument("--z0", default=None,
                   help="base point re,im or inf (default: face interior)")
    p.add_argument("--levels", type=int, default=0,
                   help="dyadic splits per edge")

    p = sub.add_parser("weld", parents=[common, mc],
                       help="sample the conformal welding of a Jordan curve")
    p.add_argument("curve", help="closed curve CSV")
    p.add_argument("--base", default=None,
                   help="interior base point re,im")
    p.add_argument("--probe", type=float, default=None, metavar="Q",
                   help="append the singularity probe per refinement level")

    p = sub.add_parser("match", parents=[common, mapargs],
                       help="construct and verify a matching pair")
    p.add_argument("--curve", default=None,
                   help="reference curve CSV (default: traced level set)")

    p = sub.add_parser("koch", parents=[common],
                       help="Koch-type curve generator")
    p.add_argument("--l", type=float, default=None, help="leg parameter")
    p.add_argument("--n", type=int, default=None, help="refinement level")
    p.add_argument("--snowflake", action="store_true",
                   help="close three copies into a snowflake")
    p.add_argument("--dim", type=float, default=None, metavar="S",
                   help="print the l whose curve has dimension S")

    p = sub.add_parser("certify", parents=[common, mapargs, mc],
                       help="check the lemniscate conditions for points")
    p.add_argument("--mode", choices=("rational", "polynomial"),
                   default="rational")
    p.add_argument("--points", default=None,
                   help="points JSON (default: the map's zeros and poles)")
    p.add_argument("--levels", type=int, default=4,
                   help="dyadic splits per edge")

    p = sub.add_parser("jordan", parents=[common, mapargs],
                       help="Jordan test for the level set")

    p = sub.add_parser("unsolvable", parents=[common],
                       help="supporting-segment hypothesis check")
    p.add_argument("curve", help="closed curve CSV")
    return parser


def _cmd_trace(args, out: Path):
    r = formats.load_map(args.map)
    result = trace(r, args.c, grid_n=args.grid)
    names = formats.write_edge_csvs(result.edges, out)
    doc = formats.trace_manifest(result, names)
    formats.write_json(out / "trace_manifest.json", doc)
    (out / "trace.svg").write_text(formats.svg_curves(
        [e.curve for e in result.edges],
        markers=[loc for loc, _deg in result.vertices]))
    _say(args, f"traced {len(result.edges)} edge(s), "
               f"{len(result.vertices)} vertex(es) at level {args.c}")
    return OK, doc, [args.map]


def _cmd_graph(args, out: Path):
    result = formats.load_trace(args.manifest)
    graph = build_graph(result)
    names = formats.write_edge_csvs(graph.edges, out)
    doc = formats.graph_manifest(graph, names)
    formats.write_json(out / "graph_manifest.json", doc)
    (out / "graph.svg").write_text(formats.svg_curves(
        [e.curve for e in graph.edges],
        markers=[f.representative for f in graph.faces if f.bounded]))
    _say(args, f"graph: {graph.vertex_count} vertices, "
               f"{graph.edge_count} edges, {graph.face_count} faces")
    return OK, doc, [args.manifest]


def _cmd_measure(args, out: Path):
    graph = formats.load_graph(args.manifest)
    if not 0 <= args.face < graph.face_count:
        raise _UsageError(f"face {args.face} out of range "
                          f"(graph has {graph.face_count})")
    z0 = _parse_point(args.z0) if args.z0 is not None else None
    result, _arcs = measure_face(
        graph, args.face, z0=z0, levels=args.levels, walkers=args.walkers,
        seed=args.seed, threads=args.threads)
    doc = formats.measures_json(result, args.seed)
    formats.write_json(out / "measures.json", doc)
    _say(args, f"measured {len(doc)} arcs from {args.walkers} walkers "
               f"({result.lost} lost)")
    return OK, doc, [args.manifest]


def _coarsened(sample, indices: np.ndarray):
    # Coarsened probes must re-bin from the merged pairs, not reuse the
    # full-resolution raw masses.
    return dataclasses.replace(
        sample,
        mass_in=None,
        mass_out=None,
        theta_in=sample.theta_in[indices],
        theta_out=sample.theta_out[indices],
        sigma_in=sample.sigma_in[indices],
        sigma_out=sample.sigma_out[indices],
        vertex_index=sample.vertex_index[indices])


def _probe_by_level(sample, q: float) -> list[dict]:
    """Probe statistic on dyadic coarsenings of the welding partition."""
    n = sample.pair_count - 1
    rows = []
    level = 2
    while (1 << level) < n:
        idx = np.unique(np.round(
            np.linspace(0, n, (1 << level) + 1)).astype(int))
        value = singularity_probe(_coarsened(sample, idx), q)
        rows.append({"level": level, "intervals": int(idx.size - 1),
                     "value": float(value)})
        level += 1
    rows.append({"level": "full", "intervals": int(n),
                 "value": float(singularity_probe(sample, q))})
    return rows


def _cmd_weld(args, out: Path):
    curve = formats.load_curve(args.curve, closed=True)
    base = _parse_point(args.base) if args.base is not None else None
    sample = weld(curve, inner_base=base, walkers=args.walkers,
                  seed=args.seed, threads=args.threads)
    rows = ["theta_in,theta_out"]
    rows += [f"{repr(float(a))},{repr(float(b))}"
             for a, b in zip(sample.theta_in, sample.theta_out)]
    (out / "weld.csv").write_text("\n".join(rows) + "\n")
    (out / "weld.svg").write_text(
        formats.svg_weld_plot(sample.theta_in, sample.theta_out))
    doc = {
        "pairs": int(sample.pair_count),
        "walkers": int(sample.walkers),
        "inner_base": formats.pair(sample.inner_base),
    }
    if args.probe is not None:
        doc["probe"] = {"q": args.probe,
                        "rows": _probe_by_level(sample, args.probe)}
        formats.write_json(out / "probe.json", doc["probe"])
    _say(args, f"welded {sample.pair_count} boundary angles")
    return OK, doc, [args.curve]


def _cmd_match(args, out: Path):
    r = formats.load_map(args.map)
    if args.curve is not None:
        curve = formats.load_curve(args.curve, closed=True)
    else:
        curve = traced_jordan_curve(r, args.c, grid_n=args.grid)
    f, g = lemniscate_pair(r, args.c, curve=curve)
    residual = verify_matching(f, g, curve)
    doc = {
        "conditions": {
            "no-pole-inside": "pass",
            "no-zero-outside": "pass",
            "map-fixes-infinity": "pass",
            "jordan-curve": "pass",
        },
        "residual": float(residual),
        "samples": int(min(curve.points.size, 4096)),
        "conjugate_map": formats.map_to_json(g),
    }
    formats.write_json(out / "match.json", doc)
    _say(args, f"matching pair verified; boundary residual {residual:.3e}")
    inputs = [args.map] + ([args.curve] if args.curve else [])
    return OK, doc, inputs


def _cmd_koch(args, out: Path):
    if args.dim is not None:
        l = parameter_for_dimension(args.dim)
        if not args.json:
            print(repr(l))
        return OK, {"l": l, "dimension": args.dim}, []
    if args.l is None or args.n is None:
        raise _UsageError("koch needs --l and --n (or --dim)")
    curve = (snowflake(args.l, args.n) if args.snowflake
             else approximant(args.l, args.n))
    (out / "koch.csv").write_text(formats.curve_to_csv(curve))
    (out / "koch.svg").write_text(formats.svg_curves([curve]))
    doc = {"l": args.l, "n": args.n, "snowflake": bool(args.snowflake),
           "points": int(curve.points.size),
           "dimension": float(dimension(args.l))}
    _say(args, f"koch curve with {curve.points.size} points, "
               f"dimension {doc['dimension']:.6f}")
    return OK, doc, []


def _cert_report_json(report) -> dict:
    return {
        "mode": report.mode,
        "verdict": report.verdict,
        "witnesses": list(report.witnesses),
        "condition1": report.condition1,
        "condition2": [{
            "edge": row.edge, "level": row.level, "arc": row.arc,
            "value": row.value, "sigma": row.sigma, "ok": row.ok,
        } for row in report.condition2],
        "condition3": [{
            "face": row.face, "component": row.component,
            "value": row.report.value, "nearest": row.report.nearest,
            "sigma": row.report.sigma, "z_score": row.report.z_score,
            "ok": row.ok,
        } for row in report.condition3],
    }


def _cmd_certify(args, out: Path):
    r = formats.load_map(args.map)
    graph = build_graph(trace(r, args.c, grid_n=args.grid))
    if args.points is not None:
        pts = _load_points(args.points)
    elif args.mode == "polynomial":
        pts = r.zeros
    else:
        pts = Multiset(tuple(r.zeros.entries) + tuple(r.poles.entries))
    run = certify_rational if args.mode == "rational" else certify_polynomial
    report = run(graph, pts, levels=args.levels, walkers=args.walkers,
                 seed=args.seed, threads=args.threads)
    doc = _cert_report_json(report)
    formats.write_json(out / "certify_report.json", doc)
    _say(args, f"certify ({report.mode}): {report.verdict}")
    for w in report.witnesses:
        _say(args, f"  {w}")
    inputs = [args.map] + ([args.points] if args.points else [])
    return (OK if report.ok else VIOLATED), doc, inputs


def _cmd_jordan(args, out: Path):
    r = formats.load_map(args.map)
    report = jordan_criterion(r, args.c, grid_n=args.grid)
    witness_file = None
    if report.witness is not None:
        witness_file = "witness.csv"
        (out / witness_file).write_text(formats.curve_to_csv(report.witness))
    doc = {
        "verdict": report.verdict,
        "degree": report.degree,
        "level": report.level,
        "inside_count": report.inside_count,
        "outside_count": report.outside_count,
        "boundary_values": formats.pairs(report.boundary_values),
        "witness_kind": report.witness_kind,
        "witness_file": witness_file,
        "reason": report.reason,
    }
    formats.write_json(out / "jordan_report.json", doc)
    _say(args, f"jordan: {report.verdict} ({report.reason})")
    code = VIOLATED if report.verdict == "not-jordan" else OK
    return code, doc, [args.map]


def _cmd_unsolvable(args, out: Path):
    curve = formats.load_curve(args.curve, closed=True)
    verdict = halfplane_segment_hypothesis(curve)
    doc = {"holds": bool(verdict.holds)}
    if verdict.holds:
        doc["line"] = [formats.pair(verdict.line_a),
                       formats.pair(verdict.line_b)]
        doc["run_points"] = int(verdict.run_points)
        doc["run_span"] = float(verdict.run_span)
    formats.write_json(out / "unsolvable_report.json", doc)
    state = "holds" if verdict.holds else "does not hold"
    _say(args, f"supporting-segment hypothesis {state}")
    return (OK if verdict.holds else VIOLATED), doc, [args.curve]


_COMMANDS = {
    "trace": _cmd_trace,
    "graph": _cmd_graph,
    "measure": _cmd_measure,
    "weld": _cmd_weld,
    "match": _cmd_match,
    "koch": _cmd_koch,
    "certify": _cmd_certify,
    "jordan": _cmd_jordan,
    "unsolvable": _cmd_unsolvable,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE

    if getattr(args, "c", 1.0) <= 0 or not math.isfinite(getattr(args, "c", 1.0)):
        print("error: --c must be a positive finite level", file=sys.stderr)
        return USAGE

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    try:
        code, doc, inputs = _COMMANDS[args.command](args, out)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except RefusalError as exc:
        print(f"refused [{exc.condition}]: {exc.details}", file=sys.stderr)
        return REFUSED
    except ViolationError as exc:
        print(f"violated: {exc}", file=sys.stderr)
        return VIOLATED
    except LemkitError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return NUMERIC
    except ValueError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return NUMERIC

    wrote_files = not (args.command == "koch" and args.dim is not None)
    if wrote_files:
        manifest = formats.run_manifest(
            args.command, argv, getattr(args, "seed", None), inputs,
            time.perf_counter() - started)
        formats.write_json(out / "run_manifest.json", manifest)
    if args.json:
        sys.stdout.write(formats.canonical_dumps(doc))
    return code


if __name__ == "__main__":
    sys.exit(main())
