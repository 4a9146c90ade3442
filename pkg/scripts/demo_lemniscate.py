#!/usr/bin/env python3
"""End-to-end walkthrough on one rational map.

Traces the level set, builds the face graph, certifies the point
conditions, runs the Jordan test, constructs the matching pair when the
curve is Jordan, and samples the conformal welding.  Everything lands
in one output directory with SVG overviews.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
from pathlib import Path

from lemkit import formats
from lemkit.certify import certify_rational, jordan_criterion
from lemkit.errors import LemkitError, RefusalError
from lemkit.lemgraph import build_graph
from lemkit.matching import lemniscate_pair, verify_matching
from lemkit.ratfun import Multiset, Poly, RationalMap
from lemkit.tracer import trace
from lemkit.welding import weld


@dataclasses.dataclass
class DemoConfig:
    num: list[complex]
    den: list[complex]
    level: float = 2.0
    grid: int = 512
    walkers: int = 30_000
    seed: int = 0
    threads: int = 2
    levels: int = 2
    out: Path = Path("demo_out")


def parse_args() -> DemoConfig:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--map", default=None,
                    help="rational map JSON (default: z^2 - 1)")
    ap.add_argument("--c", type=float, default=2.0)
    ap.add_argument("--grid", type=int, default=512)
    ap.add_argument("--walkers", type=int, default=30_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--levels", type=int, default=2)
    ap.add_argument("--out", default="demo_out")
    ns = ap.parse_args()
    if ns.map is not None:
        r = formats.load_map(ns.map)
        num, den = list(r.num.coeffs), list(r.den.coeffs)
    else:
        num, den = [-1, 0, 1], [1]
    return DemoConfig(num=num, den=den, level=ns.c, grid=ns.grid,
                      walkers=ns.walkers, seed=ns.seed, threads=ns.threads,
                      levels=ns.levels, out=Path(ns.out))


def main() -> int:
    cfg = parse_args()
    cfg.out.mkdir(parents=True, exist_ok=True)
    r = RationalMap(Poly(cfg.num), Poly(cfg.den))

    print(f"# tracing |r| = {cfg.level} on a {cfg.grid} grid")
    result = trace(r, cfg.level, grid_n=cfg.grid)
    print(f"  edges: {len(result.edges)}, vertices: {len(result.vertices)}")
    (cfg.out / "trace.svg").write_text(formats.svg_curves(
        [e.curve for e in result.edges],
        markers=[loc for loc, _ in result.vertices]))

    graph = build_graph(result)
    print(f"  faces: {graph.face_count} "
          f"({sum(1 for f in graph.faces if f.bounded)} bounded)")

    print("# certifying zero/pole measure conditions")
    pts = Multiset(tuple(r.zeros.entries) + tuple(r.poles.entries))
    report = certify_rational(graph, pts, levels=cfg.levels,
                              walkers=cfg.walkers, seed=cfg.seed,
                              threads=cfg.threads)
    print(f"  verdict: {report.verdict}")
    worst = max(report.condition2, key=lambda row: row.value)
    print(f"  worst arc residual {worst.value:.2e} "
          f"(3 sigma = {3 * worst.sigma:.2e})")
    (cfg.out / "certify_report.json").write_text(
        formats.canonical_dumps({"verdict": report.verdict,
                                 "witnesses": list(report.witnesses)}))

    print("# Jordan test")
    jr = jordan_criterion(r, cfg.level, grid_n=cfg.grid)
    print(f"  verdict: {jr.verdict} ({jr.reason})")

    if jr.verdict == "jordan" and jr.witness is not None:
        print("# matching pair and welding on the level curve")
        try:
            f, g = lemniscate_pair(r, cfg.level)
            curve = jr.witness
            residual = verify_matching(f, g, curve)
            print(f"  matching residual: {residual:.3e}")
            sample = weld(curve, walkers=cfg.walkers, seed=cfg.seed,
                          threads=cfg.threads)
            (cfg.out / "weld.svg").write_text(formats.svg_weld_plot(
                sample.theta_in, sample.theta_out))
            print(f"  welding sampled at {sample.pair_count} angles")
        except (RefusalError, LemkitError) as exc:
            print(f"  skipped: {exc}")

    summary = {"edges": len(result.edges), "vertices": len(result.vertices),
               "faces": graph.face_count, "certify": report.verdict,
               "jordan": jr.verdict}
    (cfg.out / "summary.json").write_text(formats.canonical_dumps(summary))
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
