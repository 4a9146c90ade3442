#!/usr/bin/env python3
"""Render the shipped lemniscate suite to SVG.

Traces each (map, level) pair in the suite and writes one SVG per
lemniscate plus an index page.  The same suite backs the regression
tests, so the pictures double as a visual sanity check of the traced
topologies: Jordan curves, figure-eights, nested loops, and split
ovals.
"""

from __future__ import annotations

import argparse
import dataclasses
from pathlib import Path

from lemkit import formats
from lemkit.lemgraph import build_graph
from lemkit.ratfun import Poly, RationalMap
from lemkit.tracer import trace


def shipped_suite() -> list[tuple[str, RationalMap, float, int]]:
    """(name, map, level, grid) for every lemniscate in the test suite."""
    def rm(num, den=(1,)):
        return RationalMap(Poly(list(num)), Poly(list(den)))

    return [
        ("identity", rm([0, 1]), 1.0, 512),
        ("square", rm([0, 0, 1]), 1.0, 512),
        ("bernoulli-wide", rm([-1, 0, 1]), 2.0, 512),
        ("bernoulli-eight", rm([-1, 0, 1]), 1.0, 512),
        ("two-ovals", rm([-9, 0, 1]), 8.0, 512),
        ("cubic-loop", rm([0, -1, 0, 1]), 2.0, 512),
        ("cubic-wide", rm([0, -4, 0, 1]), 4.0, 512),
        ("kissing-lobes", rm([1, 0, 1], [0, 2]), 1.0, 512),
        ("moebius-circle", rm([1, 2], [3, 1]), 1.0, 512),
        ("offset-pole", rm([-1, 0, 1], [-3, 1]), 1.0, 512),
        ("nested-rings", rm([-0.1, 0, 1], [0, 1]), 1.5, 1024),
    ]


@dataclasses.dataclass
class GalleryConfig:
    out: Path = Path("gallery_out")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="gallery_out")
    cfg = GalleryConfig(out=Path(ap.parse_args().out))
    cfg.out.mkdir(parents=True, exist_ok=True)

    entries = []
    for name, r, level, grid in shipped_suite():
        result = trace(r, level, grid_n=grid)
        graph = build_graph(result)
        svg_name = f"{name}.svg"
        (cfg.out / svg_name).write_text(formats.svg_curves(
            [e.curve for e in result.edges],
            markers=[loc for loc, _ in result.vertices]))
        entries.append({
            "name": name, "level": level,
            "edges": len(result.edges), "vertices": len(result.vertices),
            "faces": graph.face_count, "svg": svg_name,
        })
        print(f"{name:>16}: {len(result.edges)} edge(s), "
              f"{len(result.vertices)} vertex(es), "
              f"{graph.face_count} faces -> {svg_name}")

    items = "\n".join(
        f'<div><h3>{e["name"]} (level {e["level"]})</h3>'
        f'<p>{e["edges"]} edges, {e["vertices"]} vertices, '
        f'{e["faces"]} faces</p>'
        f'<img src="{e["svg"]}" width="320"/></div>'
        for e in entries)
    (cfg.out / "index.html").write_text(
        "<html><body><h1>Lemniscate gallery</h1>\n"
        f"{items}\n</body></html>\n")
    formats.write_json(cfg.out / "gallery.json", {"entries": entries})
    print(f"wrote {len(entries)} figures to {cfg.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
