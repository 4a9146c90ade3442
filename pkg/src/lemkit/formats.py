"""File formats shared by the command line tools.

Wire formats: rational maps travel as JSON objects with ascending
coefficient pairs ("num"/"den" lists of [re, im]); curves as two-column
CSV with an "re,im" header and no repeated endpoint for closed curves;
traced topology and graph structure as JSON manifests that reference
the edge CSV files written next to them.  Every writer is
deterministic: JSON keys are sorted, floats serialize by repr, and SVG
coordinates use fixed precision, so identical inputs yield identical
bytes regardless of thread count.  A run manifest carrying the command,
argument vector, seed, input hashes, tool version, and wall time
accompanies every command's outputs.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .curves import PolylineCurve
from .errors import FormatError
from .lemgraph import Face, LemGraph
from .potential import MeasureResult
from .ratfun import Poly, RationalMap
from .tracer import TraceEdge, TraceResult


def canonical_dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_json(path: Path, doc) -> None:
    Path(path).write_text(canonical_dumps(doc))


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read JSON from {path}: {exc}") from exc


def sha256_path(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def pairs(values) -> list[list[float]]:
    return [pair(z) for z in values]


def unpair(item) -> complex:
    if (not isinstance(item, (list, tuple)) or len(item) != 2
            or not all(isinstance(v, (int, float)) for v in item)):
        raise FormatError(f"expected an [re, im] pair, got {item!r}")
    return complex(item[0], item[1])


def map_to_json(r: RationalMap) -> dict:
    return {"num": pairs(r.num.coeffs), "den": pairs(r.den.coeffs)}


def map_from_json(doc) -> RationalMap:
    if not isinstance(doc, dict) or "num" not in doc or "den" not in doc:
        raise FormatError('rational map JSON needs "num" and "den" lists')
    try:
        num = Poly([unpair(p) for p in doc["num"]])
        den = Poly([unpair(p) for p in doc["den"]])
        return RationalMap(num, den)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad rational map JSON: {exc}") from exc


def load_map(path) -> RationalMap:
    return map_from_json(load_json(path))


def curve_to_csv(curve: PolylineCurve) -> str:
    rows = ["re,im"]
    rows += [f"{repr(float(z.real))},{repr(float(z.imag))}"
             for z in curve.points]
    return "\n".join(rows) + "\n"


def curve_from_csv(text: str, closed: bool) -> PolylineCurve:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "re,im":
        raise FormatError('curve CSV must start with the header "re,im"')
    pts = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != 2:
            raise FormatError(f"curve CSV row {ln!r} is not re,im")
        try:
            pts.append(complex(float(cells[0]), float(cells[1])))
        except ValueError as exc:
            raise FormatError(f"bad number in curve CSV row {ln!r}") from exc
    return PolylineCurve(np.array(pts, dtype=complex), closed=closed)


def load_curve(path, closed: bool) -> PolylineCurve:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read curve CSV {path}: {exc}") from exc
    return curve_from_csv(text, closed)


def _edge_entries(edges, edge_files) -> list[dict]:
    out = []
    for edge, name in zip(edges, edge_files):
        out.append({
            "file": name,
            "closed": bool(edge.curve.closed),
            "v_start": edge.v_start,
            "v_end": edge.v_end,
        })
    return out


def write_edge_csvs(edges, out_dir: Path) -> list[str]:
    names = []
    for k, edge in enumerate(edges):
        name = f"edge_{k:03d}.csv"
        (Path(out_dir) / name).write_text(curve_to_csv(edge.curve))
        names.append(name)
    return names


def trace_manifest(result: TraceResult, edge_files: list[str]) -> dict:
    return {
        "kind": "trace",
        "level": float(result.level),
        "grid_n": int(result.grid_n),
        "box": [float(v) for v in result.box],
        "map": None if result.rmap is None else map_to_json(result.rmap),
        "vertices": [{"location": pair(loc), "degree": int(deg)}
                     for loc, deg in result.vertices],
        "edges": _edge_entries(result.edges, edge_files),
        "orientation": "sublevel-left",
        "warnings": list(result.warnings),
    }


def _load_edges(doc: dict, base: Path) -> list[TraceEdge]:
    edges = []
    for entry in doc.get("edges", []):
        curve = load_curve(base / entry["file"], bool(entry["closed"]))
        edges.append(TraceEdge(curve, entry.get("v_start"),
                               entry.get("v_end")))
    return edges


def _check_kind(doc: dict, kind: str, path) -> None:
    if doc.get("kind") != kind:
        raise FormatError(f"{path} is not a {kind} manifest "
                          f"(kind = {doc.get('kind')!r})")


def load_trace(path) -> TraceResult:
    path = Path(path)
    doc = load_json(path)
    _check_kind(doc, "trace", path)
    try:
        rmap = None if doc["map"] is None else map_from_json(doc["map"])
        vertices = [(unpair(v["location"]), int(v["degree"]))
                    for v in doc["vertices"]]
        return TraceResult(
            edges=_load_edges(doc, path.parent), vertices=vertices,
            level=float(doc["level"]), box=tuple(doc["box"]),
            grid_n=int(doc["grid_n"]), rmap=rmap,
            warnings=list(doc.get("warnings", [])))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad trace manifest {path}: {exc}") from exc


def graph_manifest(graph: LemGraph, edge_files: list[str]) -> dict:
    return {
        "kind": "graph",
        "level": float(graph.level),
        "grid_n": int(graph.grid_n),
        "box": [float(v) for v in graph.box],
        "map": None if graph.rmap is None else map_to_json(graph.rmap),
        "vertices": [{"location": pair(loc), "degree": int(deg)}
                     for loc, deg in graph.vertices],
        "edges": _edge_entries(graph.edges, edge_files),
        "faces": [{
            "index": f.index,
            "representative": pair(f.representative),
            "color": int(f.color),
            "bounded": bool(f.bounded),
            "boundary": [[e, fw] for e, fw in f.boundary],
            "boundary_components": [list(g) for g in f.boundary_components],
            "area": float(f.area),
        } for f in graph.faces],
        "orientation": "sublevel-left",
    }


def load_graph(path) -> LemGraph:
    path = Path(path)
    doc = load_json(path)
    _check_kind(doc, "graph", path)
    try:
        faces = tuple(Face(
            index=int(f["index"]),
            representative=unpair(f["representative"]),
            color=int(f["color"]),
            bounded=bool(f["bounded"]),
            boundary=tuple((int(e), bool(fw)) for e, fw in f["boundary"]),
            boundary_components=tuple(
                tuple(int(e) for e in g) for g in f["boundary_components"]),
            area=float(f["area"]),
        ) for f in doc["faces"])
        return LemGraph(
            vertices=tuple((unpair(v["location"]), int(v["degree"]))
                           for v in doc["vertices"]),
            edges=tuple(_load_edges(doc, path.parent)),
            faces=faces,
            level=float(doc["level"]),
            rmap=None if doc["map"] is None else map_from_json(doc["map"]),
            box=tuple(doc["box"]),
            grid_n=int(doc["grid_n"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad graph manifest {path}: {exc}") from exc


def measures_json(result: MeasureResult, seed: int) -> dict:
    return {label: {
        "value": float(result.weights[label]),
        "stderr": float(result.stderr[label]),
        "walkers": int(result.walkers),
        "seed": int(seed),
    } for label in sorted(result.weights)}


def run_manifest(command: str, argv: list[str], seed: int | None,
                 inputs: list, walltime: float) -> dict:
    return {
        "kind": "run",
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "inputs": {str(p): sha256_path(p) for p in inputs},
        "version": __version__,
        "walltime_seconds": float(walltime),
    }


# SVG output: presentation only, but still byte-deterministic.

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#e377c2")


def _fmt(v: float) -> str:
    return format(v, ".6f")


def svg_curves(curves, width: int = 640, markers=()) -> str:
    """Curves drawn in a flipped-y viewBox; optional point markers."""
    all_pts = np.concatenate([c.points for c in curves])
    x0, x1 = float(all_pts.real.min()), float(all_pts.real.max())
    y0, y1 = float(all_pts.imag.min()), float(all_pts.imag.max())
    span = max(x1 - x0, y1 - y0, 1e-12)
    pad = 0.05 * span
    x0, x1 = x0 - pad, x1 + pad
    y0, y1 = y0 - pad, y1 + pad
    scale = width / (x1 - x0)
    height = (y1 - y0) * scale

    def to_px(z: complex) -> tuple[float, float]:
        return (z.real - x0) * scale, (y1 - z.imag) * scale

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'width="{width}" height="{_fmt(height)}" '
             f'viewBox="0 0 {width} {_fmt(height)}">',
             '<rect width="100%" height="100%" fill="white"/>']
    for k, curve in enumerate(curves):
        color = _PALETTE[k % len(_PALETTE)]
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}"
                          for x, y in map(to_px, curve.points))
        tag = "polygon" if curve.closed else "polyline"
        parts.append(f'<{tag} points="{coords}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
    for z in markers:
        x, y = to_px(complex(z))
        parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" '
                     f'fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def svg_weld_plot(theta_in: np.ndarray, theta_out: np.ndarray,
                  width: int = 480) -> str:
    """Welding homeomorphism as a graph over [0, 2pi] x [0, 2pi]."""
    tau = 2.0 * np.pi
    margin = 30.0
    side = width - 2 * margin

    def to_px(t_in: float, t_out: float) -> tuple[float, float]:
        return margin + side * t_in / tau, margin + side * (1 - t_out / tau)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'width="{width}" height="{width}" '
             f'viewBox="0 0 {width} {width}">',
             '<rect width="100%" height="100%" fill="white"/>',
             f'<rect x="{_fmt(margin)}" y="{_fmt(margin)}" '
             f'width="{_fmt(side)}" height="{_fmt(side)}" fill="none" '
             f'stroke="#999" stroke-width="1"/>']
    xa, ya = to_px(0.0, 0.0)
    xb, yb = to_px(tau, tau)
    parts.append(f'<line x1="{_fmt(xa)}" y1="{_fmt(ya)}" x2="{_fmt(xb)}" '
                 f'y2="{_fmt(yb)}" stroke="#ccc" stroke-width="1" '
                 f'stroke-dasharray="4 4"/>')
    coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in
                      (to_px(a, b) for a, b in zip(theta_in, theta_out)))
    parts.append(f'<polyline points="{coords}" fill="none" '
                 f'stroke="#1f77b4" stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
