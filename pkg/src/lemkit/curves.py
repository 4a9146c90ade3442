"""Planar polyline curves and the geometric predicates built on them.

A PolylineCurve is an ordered array of complex points, open or closed.
Closed curves never repeat the first point; the closing segment is
implicit.  All geometry downstream (tracing, graph extraction, Monte
Carlo measure, welding) speaks this type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from shapely.geometry import LineString

from .errors import CurveError, OnCurveError

ON_CURVE_GUARD = 1e-12


class PolylineCurve:
    """Ordered complex points; `closed` means an implicit last-to-first
    segment.  At least two points, consecutive points distinct."""

    __slots__ = ("points", "closed", "__dict__")

    def __init__(self, points, closed: bool):
        pts = np.asarray(points, dtype=complex).ravel()
        if closed and pts.size >= 2 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if pts.size < 2:
            raise CurveError("a curve needs at least two distinct points")
        if not np.all(np.isfinite(pts.view(float))):
            raise CurveError("curve points must be finite")
        if np.any(pts[1:] == pts[:-1]):
            raise CurveError("consecutive curve points must be distinct")
        if closed and pts.size < 3:
            raise CurveError("a closed curve needs at least three points")
        self.points = pts
        self.closed = bool(closed)

    def __len__(self):
        return self.points.size

    def segments(self):
        """(start, end) arrays of every segment, closing one included."""
        a = self.points
        if self.closed:
            return a, np.roll(a, -1)
        return a[:-1], a[1:]

    @cached_property
    def seg_lengths(self) -> np.ndarray:
        a, b = self.segments()
        return np.abs(b - a)

    @cached_property
    def cum_arclength(self) -> np.ndarray:
        """Arclength from point 0 to point i (length n array)."""
        a = self.points
        d = np.abs(np.diff(a))
        return np.concatenate([[0.0], np.cumsum(d)])

    @property
    def total_length(self) -> float:
        t = self.cum_arclength[-1]
        if self.closed:
            t += abs(self.points[0] - self.points[-1])
        return float(t)

    def point_at(self, s: float) -> complex:
        """Point at arclength s from point 0 (wraps when closed)."""
        total = self.total_length
        if self.closed:
            s = s % total
        else:
            if not 0.0 <= s <= total * (1 + 1e-12):
                raise CurveError(f"arclength {s} outside [0, {total}]")
            s = min(s, total)
        cum = self.cum_arclength
        if s <= cum[-1]:
            i = int(np.searchsorted(cum, s, side="right") - 1)
            i = min(i, len(cum) - 2)
            seg = cum[i + 1] - cum[i]
            t = 0.0 if seg == 0 else (s - cum[i]) / seg
            return complex(self.points[i] * (1 - t) + self.points[i + 1] * t)
        # on the closing segment
        seg = abs(self.points[0] - self.points[-1])
        t = (s - cum[-1]) / seg
        return complex(self.points[-1] * (1 - t) + self.points[0] * t)

    def reversed(self) -> "PolylineCurve":
        return PolylineCurve(self.points[::-1], self.closed)

    def bbox(self):
        x, y = self.points.real, self.points.imag
        return float(x.min()), float(x.max()), float(y.min()), float(y.max())

    def bbox_diameter(self) -> float:
        x0, x1, y0, y1 = self.bbox()
        return math.hypot(x1 - x0, y1 - y0)

    def signed_area(self) -> float:
        if not self.closed:
            raise CurveError("signed area needs a closed curve")
        a, b = self.segments()
        return float(0.5 * np.sum(a.real * b.imag - b.real * a.imag))

    def is_simple(self) -> bool:
        """No self-intersections (robust planar sweep)."""
        coords = np.column_stack([self.points.real, self.points.imag])
        if self.closed:
            coords = np.vstack([coords, coords[:1]])
        return bool(LineString(coords).is_simple)

    def distance_to(self, z) -> np.ndarray:
        """Distance from point(s) z to the curve (all segments)."""
        zs = np.atleast_1d(np.asarray(z, dtype=complex))
        a, b = self.segments()
        out = np.empty(zs.size)
        for i, p in enumerate(zs):
            out[i] = float(np.min(_point_segment_distance(p, a, b)))
        return out if np.ndim(z) else out[:1]


def _point_segment_distance(p: complex, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from one point to many segments."""
    d = b - a
    denom = (d.real**2 + d.imag**2)
    w = p - a
    t = (w.real * d.real + w.imag * d.imag) / np.where(denom == 0, 1.0, denom)
    t = np.clip(t, 0.0, 1.0)
    proj = a + t * d
    return np.abs(p - proj)


def points_to_segments_distance(pts: np.ndarray, a: np.ndarray, b: np.ndarray,
                                chunk: int = 256) -> np.ndarray:
    """min-over-segments distance for each point, chunked for memory."""
    pts = np.asarray(pts, dtype=complex)
    d = b - a
    denom = d.real**2 + d.imag**2
    denom = np.where(denom == 0, 1.0, denom)
    out = np.empty(pts.size)
    for i in range(0, pts.size, chunk):
        p = pts[i : i + chunk, None]
        w = p - a[None, :]
        t = (w.real * d.real[None, :] + w.imag * d.imag[None, :]) / denom[None, :]
        np.clip(t, 0.0, 1.0, out=t)
        proj = a[None, :] + t * d[None, :]
        out[i : i + chunk] = np.min(np.abs(p - proj), axis=1)
    return out


def winding_number(curve: PolylineCurve, z: complex) -> int:
    """Winding number of a closed curve about z (crossing count).

    Raises OnCurveError when z is within the guard band of the curve.
    """
    if not curve.closed:
        raise CurveError("winding number needs a closed curve")
    guard = ON_CURVE_GUARD * max(1.0, curve.bbox_diameter())
    if float(curve.distance_to(z)[0]) <= guard:
        raise OnCurveError(f"point {z} lies on the curve")
    a, b = curve.segments()
    x, y = z.real, z.imag
    upward = (a.imag <= y) & (b.imag > y)
    downward = (a.imag > y) & (b.imag <= y)
    # signed side of the crossing segment
    cross = (b.real - a.real) * (y - a.imag) - (x - a.real) * (b.imag - a.imag)
    w = int(np.sum(upward & (cross > 0))) - int(np.sum(downward & (cross < 0)))
    return w


def angle_sweep(curve: PolylineCurve, z: complex) -> float:
    """Total angle swept by the curve around z (2*pi*winding if closed)."""
    a, b = curve.segments()
    return float(np.sum(np.angle((b - z) / (a - z))))


def hausdorff_distance(c1: PolylineCurve, c2: PolylineCurve) -> float:
    """Symmetric Hausdorff distance, vertices against segments."""
    a2, b2 = c2.segments()
    d12 = float(np.max(points_to_segments_distance(c1.points, a2, b2)))
    a1, b1 = c1.segments()
    d21 = float(np.max(points_to_segments_distance(c2.points, a1, b1)))
    return max(d12, d21)


@dataclass(frozen=True)
class HalfplaneVerdict:
    """Outcome of the supporting-line search.

    When `holds`, the curve sits inside a half-plane whose boundary line
    (through `line_a`, `line_b`) contains a nondegenerate sub-arc of the
    curve: `run_points` consecutive curve points spanning `run_span` of
    arclength sit on the line.
    """

    holds: bool
    line_a: complex = 0j
    line_b: complex = 0j
    run_points: int = 0
    run_span: float = 0.0


CONTACT_TOL = 1e-9
RUN_SPAN_FRACTION = 1e-6


def halfplane_segment_hypothesis(curve: PolylineCurve) -> HalfplaneVerdict:
    """Search for a supporting line containing a sub-arc of the curve.

    A closed curve that contains a straight segment lying on its convex
    hull satisfies the hypothesis: the whole curve is inside one
    half-plane and a nondegenerate piece of it sits on the boundary
    line.  The contact run must have at least three consecutive curve
    points within CONTACT_TOL of the hull line and span at least
    RUN_SPAN_FRACTION of the curve diameter, so sparsely sampled
    polygons should be densified before calling.
    """
    pts = curve.points
    xy = np.column_stack([pts.real, pts.imag])
    try:
        hull = ConvexHull(xy)
    except QhullError as exc:
        raise CurveError("curve is degenerate (all points collinear)") from exc
    diam = curve.bbox_diameter()
    n = pts.size
    verts = hull.vertices  # counterclockwise
    for k in range(len(verts)):
        a = pts[verts[k]]
        b = pts[verts[(k + 1) % len(verts)]]
        d = b - a
        L = abs(d)
        if L == 0:
            continue
        # signed distance: >= 0 on the hull side for ccw hulls
        s = ((pts - a) / d).imag * L
        if np.min(s) < -CONTACT_TOL * max(1.0, diam):
            continue  # not a supporting line (should not happen for hull edges)
        contact = np.abs(s) <= CONTACT_TOL * max(1.0, diam)
        run = _longest_contact_run(contact, curve.closed)
        if run is None:
            continue
        i0, count = run
        if count < 3:
            continue
        idx = [(i0 + j) % n for j in range(count)]
        span = float(np.sum(np.abs(np.diff(pts[idx]))))
        if span >= RUN_SPAN_FRACTION * diam:
            return HalfplaneVerdict(True, complex(a), complex(b), count, span)
    return HalfplaneVerdict(False)


def _longest_contact_run(contact: np.ndarray, cyclic: bool):
    """Longest run of consecutive True values; (start, length) or None."""
    n = contact.size
    if not np.any(contact):
        return None
    if np.all(contact):
        return 0, n
    flags = np.concatenate([contact, contact]) if cyclic else contact
    best_start, best_len = None, 0
    i = 0
    limit = flags.size
    while i < limit:
        if flags[i]:
            j = i
            while j < limit and flags[j]:
                j += 1
            if j - i > best_len:
                best_start, best_len = i % n, min(j - i, n)
            i = j
        else:
            i += 1
    if best_start is None:
        return None
    return best_start, best_len


def circle_curve(center: complex, radius: float, n: int = 256) -> PolylineCurve:
    """Regular n-gon approximation of a circle, counterclockwise."""
    theta = 2 * np.pi * np.arange(n) / n
    return PolylineCurve(center + radius * np.exp(1j * theta), closed=True)


def ellipse_curve(center: complex, ax: float, ay: float, n: int = 256,
                  rotation: float = 0.0) -> PolylineCurve:
    theta = 2 * np.pi * np.arange(n) / n
    pts = ax * np.cos(theta) + 1j * ay * np.sin(theta)
    return PolylineCurve(center + pts * np.exp(1j * rotation), closed=True)
