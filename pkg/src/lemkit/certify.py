"""Certification of lemniscate conditions and the Jordan criterion.

Given a level-set graph and candidate points, the characterization of
rational lemniscates is checked in three parts: the graph structure
itself, equality of point-weighted harmonic measures across every edge
on dyadic sub-arcs at several refinement levels, and integrality of the
point-weighted measure of every boundary component of every face.  The
polynomial specialization replaces the face-by-face balance with a
comparison against the view from infinity and adds simple-connectivity
requirements.  Monte Carlo residuals carry standard errors; a verdict of
"violated" needs a residual beyond three sigma plus a fixed allowance.

The Jordan test for a rational map counts critical values inside and
outside the unit circle and searches for a curve separating zeros from
poles on which the modulus stays at most one; failure to find one is
inconclusive rather than a disproof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import PolylineCurve, circle_curve, ellipse_curve, winding_number
from .errors import GraphError, OnCurveError, RefusalError, TraceError
from .lemgraph import SUBLEVEL, LemGraph
from .potential import IntegralityReport, integrality_check, measure_face
from .ratfun import (INF, Multiset, RationalMap, critical_points,
                     critical_values, is_inf)
from .rng import derive_seed
from .tracer import trace

# Fixed discretization allowance added to 3-sigma statistical bands.
_ALLOWANCE = 5e-3
# Modulus band around 1 treated as "on the unit circle".
_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class ArcResidual:
    """Measure-balance defect across one edge on one dyadic sub-arc."""

    edge: int
    level: int
    arc: int
    value: float
    sigma: float

    @property
    def ok(self) -> bool:
        return self.value <= 3.0 * self.sigma + _ALLOWANCE


@dataclass(frozen=True)
class IntegralityRow:
    """Integrality of one face's measure on one boundary component."""

    face: int
    component: int
    report: IntegralityReport

    @property
    def ok(self) -> bool:
        return self.report.ok


@dataclass(frozen=True)
class CertReport:
    mode: str  # "rational" | "polynomial"
    condition1: dict
    condition2: tuple[ArcResidual, ...]
    condition3: tuple[IntegralityRow, ...]
    verdict: str  # "consistent" | "violated"
    witnesses: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.verdict == "consistent"


@dataclass(frozen=True)
class _PointRun:
    point: complex
    mult: int
    edge_weights: dict  # edge index -> finest-level weight array


def _edge_sides(graph: LemGraph) -> dict[int, list[int]]:
    sides: dict[int, list[int]] = {}
    for face in graph.faces:
        for edge_idx, _forward in face.boundary:
            sides.setdefault(edge_idx, []).append(face.index)
    for edge_idx, faces in sides.items():
        if len(faces) != 2:
            raise GraphError(
                f"edge {edge_idx} borders {len(faces)} faces; expected 2")
    return sides


def _place_points(graph: LemGraph, pts: Multiset) -> dict[int, list]:
    """Distinct points per face; infinity goes to the unbounded face."""
    ub = graph.unbounded_face().index
    placed: dict[int, list] = {}
    for p, m in pts.entries:
        fi = ub if is_inf(p) else graph.face_of(p)
        placed.setdefault(fi, []).append((p, m))
    return placed


def _split_by_edge(weights: dict, levels: int) -> dict[int, np.ndarray]:
    n = 1 << levels
    out: dict[int, np.ndarray] = {}
    for label, w in weights.items():
        head, k = label.split(":")
        out.setdefault(int(head[1:]), np.zeros(n))[int(k)] = w
    return out


def _run_measures(graph: LemGraph, placed: dict, levels: int, walkers: int,
                  seed: int, threads: int) -> dict[int, list]:
    """One walk-on-spheres run per (face, point); finest-level weights."""
    tables: dict[int, list] = {}
    for face_index in sorted(placed):
        for ordinal, (p, m) in enumerate(placed[face_index]):
            result, _arcs = measure_face(
                graph, face_index, z0=p, levels=levels, walkers=walkers,
                seed=derive_seed(seed, face_index, ordinal), threads=threads)
            tables.setdefault(face_index, []).append(
                _PointRun(p, m, _split_by_edge(result.weights, levels)))
    return tables


def _side_sums(runs: list, edge_idx: int, level: int, levels: int,
               walkers: int, scale: float) -> tuple[np.ndarray, np.ndarray]:
    """Point-weighted arc sums and variances for one side of an edge."""
    n_arcs = 1 << level
    total = np.zeros(n_arcs)
    var = np.zeros(n_arcs)
    for run in runs:
        fine = run.edge_weights[edge_idx]
        coarse = fine.reshape(n_arcs, -1).sum(axis=1)
        weight = run.mult * scale
        total += weight * coarse
        var += weight**2 * np.clip(coarse * (1 - coarse), 0, None) / walkers
    return total, var


def _condition2(graph: LemGraph, tables: dict, levels: int, walkers: int,
                scales: dict) -> tuple[ArcResidual, ...]:
    rows = []
    for edge_idx, (fa, fb) in sorted(_edge_sides(graph).items()):
        for level in range(levels + 1):
            sa, va = _side_sums(tables.get(fa, []), edge_idx, level, levels,
                                walkers, scales.get(fa, 1.0))
            sb, vb = _side_sums(tables.get(fb, []), edge_idx, level, levels,
                                walkers, scales.get(fb, 1.0))
            sigma = np.sqrt(va + vb)
            for k, (value, sig) in enumerate(zip(np.abs(sa - sb), sigma)):
                rows.append(ArcResidual(edge_idx, level, k,
                                        float(value), float(sig)))
    return tuple(rows)


def _component_rows(graph: LemGraph, face_index: int, runs: list,
                    walkers: int, scale: float) -> list[IntegralityRow]:
    rows = []
    face = graph.faces[face_index]
    for comp_idx, comp_edges in enumerate(face.boundary_components):
        value = 0.0
        var = 0.0
        for run in runs:
            mass = float(sum(run.edge_weights[e].sum() for e in comp_edges))
            weight = run.mult * scale
            value += weight * mass
            var += weight**2 * max(mass * (1 - mass), 0.0) / walkers
        rows.append(IntegralityRow(
            face_index, comp_idx,
            integrality_check(value, math.sqrt(var), slack=_ALLOWANCE)))
    return rows


def _verdict(rows2, rows3) -> tuple[str, tuple[str, ...]]:
    witnesses = []
    for row in rows2:
        if not row.ok:
            witnesses.append(
                f"edge {row.edge} level {row.level} arc {row.arc}: measure "
                f"gap {row.value:.4g} exceeds 3*{row.sigma:.4g} + {_ALLOWANCE}")
    for row in rows3:
        if not row.ok:
            witnesses.append(
                f"face {row.face} component {row.component}: weighted measure "
                f"{row.report.value:.6g} sits {row.report.z_score:.1f} sigma "
                f"from the nearest integer {row.report.nearest}")
    return ("violated" if witnesses else "consistent"), tuple(witnesses)


def _structure_summary(graph: LemGraph, placed: dict) -> dict:
    empty = [f.index for f in graph.faces if f.index not in placed]
    return {
        "vertex_count": graph.vertex_count,
        "edge_count": graph.edge_count,
        "face_count": graph.face_count,
        "assignments": {
            str(p): face for face, entries in placed.items()
            for p, _m in entries},
        "faces_without_points": empty,
    }


def certify_rational(graph: LemGraph, pts: Multiset, levels: int = 4,
                     walkers: int = 100_000, seed: int = 0,
                     threads: int = 1) -> CertReport:
    """Check the rational-lemniscate conditions for candidate points.

    Condition tables: per-edge dyadic measure balance between the two
    adjacent faces (each face's sum weighted by point multiplicity), and
    per-(face, boundary component) integrality of the weighted measure.
    The graph structure itself was validated at construction; its counts
    are restated in condition1 along with the point placement.
    """
    placed = _place_points(graph, pts)
    tables = _run_measures(graph, placed, levels, walkers, seed, threads)
    rows2 = _condition2(graph, tables, levels, walkers, scales={})
    rows3 = []
    for face_index in range(graph.face_count):
        rows3.extend(_component_rows(graph, face_index,
                                     tables.get(face_index, []), walkers, 1.0))
    verdict, witnesses = _verdict(rows2, rows3)
    return CertReport("rational", _structure_summary(graph, placed),
                      rows2, tuple(rows3), verdict, witnesses)


def certify_polynomial(graph: LemGraph, pts: Multiset, levels: int = 4,
                       walkers: int = 100_000, seed: int = 0,
                       threads: int = 1) -> CertReport:
    """Check the polynomial-lemniscate conditions for candidate points.

    Requires every bounded face simply connected and every point finite
    in a bounded face (refused otherwise).  The balance condition
    compares each bounded face's point-averaged measure against the
    measure seen from infinity, and integrality multiplies the measure
    from infinity of each graph component by the total point count.
    """
    for face in graph.faces:
        if face.bounded and face.boundary_component_count != 1:
            raise RefusalError(
                "simply-connected-faces",
                f"bounded face {face.index} has "
                f"{face.boundary_component_count} boundary components")
    ub = graph.unbounded_face().index
    placed = _place_points(graph, pts)
    if ub in placed:
        raise RefusalError(
            "points-in-bounded-faces",
            f"points {[p for p, _ in placed[ub]]} lie in the unbounded face")
    m = pts.total

    tables = _run_measures(graph, placed, levels, walkers, seed, threads)
    inf_result, _arcs = measure_face(
        graph, ub, z0=INF, levels=levels, walkers=walkers,
        seed=derive_seed(seed, ub, 0), threads=threads)
    inf_run = _PointRun(INF, 1, _split_by_edge(inf_result.weights, levels))
    tables[ub] = [inf_run]

    scales = {fi: 1.0 / m for fi in placed}
    scales[ub] = 1.0
    rows2 = _condition2(graph, tables, levels, walkers, scales)
    rows3 = _component_rows(graph, ub, [inf_run], walkers, float(m))
    verdict, witnesses = _verdict(rows2, rows3)
    summary = _structure_summary(graph, placed)
    summary["total_point_count"] = m
    return CertReport("polynomial", summary, rows2, tuple(rows3),
                      verdict, witnesses)


@dataclass(frozen=True)
class JordanReport:
    verdict: str  # "jordan" | "not-jordan" | "inconclusive"
    degree: int
    level: float
    inside_count: int
    outside_count: int
    boundary_values: tuple
    witness: PolylineCurve | None
    witness_kind: str | None
    reason: str

    @property
    def is_jordan(self) -> bool | None:
        if self.verdict == "jordan":
            return True
        if self.verdict == "not-jordan":
            return False
        return None


def _separates(r: RationalMap, curve: PolylineCurve) -> bool:
    for z0, _m in r.zeros.finite_entries():
        if winding_number(curve, z0) == 0:
            return False
    for q, _m in r.poles.finite_entries():
        if winding_number(curve, q) != 0:
            return False
    return True


def _modulus_ok(r: RationalMap, curve: PolylineCurve) -> bool:
    vals = np.abs(np.asarray(r(curve.points), dtype=complex))
    return bool(np.all(vals <= 1.0 + _BOUNDARY_TOL))


def find_separating_curve(r: RationalMap, include_level_set: bool = True,
                          grid_n: int = 512,
                          ) -> tuple[PolylineCurve, str] | None:
    """Search for a Jordan curve with zeros inside, poles outside, and
    modulus at most one along it.

    Candidates: the traced unit level set when it is a single closed
    vertex-free curve, then circles and axis-aligned ellipses around the
    zero centroid.  The family is finite, so a miss proves nothing.
    """
    if include_level_set:
        try:
            tr = trace(r, 1.0, grid_n=grid_n)
            loops = [e for e in tr.edges if e.is_loop]
            if not tr.vertices and len(tr.edges) == 1 and loops:
                curve = loops[0].curve
                if _separates(r, curve) and _modulus_ok(r, curve):
                    return curve, "level-set"
        except TraceError:
            pass

    zeros = [z for z, _m in r.zeros.finite_entries()]
    poles = [q for q, _m in r.poles.finite_entries()]
    centroid = complex(np.mean(zeros)) if zeros else 0.0 + 0.0j
    r_lo = max((abs(z - centroid) for z in zeros), default=0.0)
    r_hi = min((abs(q - centroid) for q in poles), default=math.inf)
    lo = 1.05 * r_lo if r_lo > 0 else (0.05 * r_hi if math.isfinite(r_hi)
                                       else 0.5)
    hi = 0.95 * r_hi if math.isfinite(r_hi) else 4.0 * (r_lo + 1.0)
    if not lo < hi:
        return None
    for radius in np.geomspace(max(lo, 1e-12), hi, 24):
        candidates = [(circle_curve(centroid, radius, 256), "circle")]
        for ratio in (2.0, 0.5):
            ax = radius * math.sqrt(ratio)
            ay = radius / math.sqrt(ratio)
            candidates.append(
                (ellipse_curve(centroid, ax, ay, 256), "ellipse"))
        for curve, kind in candidates:
            if _separates(r, curve) and _modulus_ok(r, curve):
                return curve, kind
    return None


def jordan_criterion(r: RationalMap, c: float = 1.0,
                     grid_n: int = 512) -> JordanReport:
    """Decide whether the level set |r| = c is an analytic Jordan curve.

    The level is rescaled to 1.  Hypothesis: the modulus at infinity
    exceeds 1 (refused otherwise).  The test counts critical values
    strictly inside and outside the unit circle (degree minus one on
    each side is necessary); any critical value on the circle is a
    level-set vertex, which settles the verdict negatively.  When the
    counts pass, a separating witness curve completes a positive
    verdict; absence of a witness in the finite search family leaves
    the verdict inconclusive, never negative.
    """
    if c <= 0:
        raise ValueError(f"level must be positive, got {c}")
    work = r.scaled(1.0 / c)
    v_inf = work.value_at_inf()
    mod_inf = math.inf if is_inf(v_inf) else abs(v_inf)
    if mod_inf <= 1.0 + _BOUNDARY_TOL:
        raise RefusalError(
            "modulus-at-infinity",
            f"|r(inf)| = {mod_inf:.6g} after rescaling; the test needs "
            "modulus above 1 so infinity lies strictly outside")

    k = work.degree
    inside = outside = 0
    boundary = []
    for v, m in critical_values(work).entries:
        mod = math.inf if is_inf(v) else abs(v)
        if abs(mod - 1.0) <= _BOUNDARY_TOL:
            boundary.append(v)
        elif mod < 1.0:
            inside += m
        else:
            outside += m

    if boundary:
        return JordanReport(
            "not-jordan", k, c, inside, outside, tuple(boundary), None, None,
            "critical value on the level circle: the level set has a vertex")
    if inside != k - 1 or outside != k - 1:
        return JordanReport(
            "not-jordan", k, c, inside, outside, (), None, None,
            f"critical value split {inside}/{outside}, need "
            f"{k - 1}/{k - 1}")

    found = find_separating_curve(work, grid_n=grid_n)
    if found is not None:
        curve, kind = found
        return JordanReport("jordan", k, c, inside, outside, (), curve, kind,
                            "critical value counts pass and a separating "
                            "curve of modulus at most 1 exists")
    return JordanReport(
        "inconclusive", k, c, inside, outside, (), None, None,
        "critical value counts pass but no separating curve was found in "
        "the finite family; not a disproof")


def riemann_hurwitz_audit(r: RationalMap, graph: LemGraph,
                          face_index: int) -> tuple[int, int]:
    """Both sides of the branch-count identity on one face.

    Left: critical points of r inside the face, with multiplicity.
    Right: (local degree of r on the face) minus the face's Euler
    characteristic, the target disk contributing characteristic 1.  The
    local degree counts zeros in sublevel faces and poles in superlevel
    faces; infinity belongs to the unbounded face.  Critical points on
    the level set itself are graph vertices and lie inside no face.
    """
    face = graph.faces[face_index]
    ub = not face.bounded

    def in_face(p: complex) -> bool:
        if is_inf(p):
            return ub
        try:
            return graph.face_of(p) == face_index
        except OnCurveError:
            return False

    anchors = r.zeros if face.color == SUBLEVEL else r.poles
    local_degree = sum(m for p, m in anchors.entries if in_face(p))
    m_critical = sum(m for p, m in critical_points(r).entries if in_face(p))
    chi = 2 - face.boundary_component_count
    return m_critical, local_degree - chi
