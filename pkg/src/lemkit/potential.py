"""Potential theory on level-set faces.

Green's function of the unit disk, the modulus identity for finite
Blaschke products, and a Monte Carlo estimator of harmonic measure
driven by the walk-on-spheres process.  Harmonic measure is invariant
under conformal maps, so measures of an unbounded face (including the
view from infinity) are computed after the inversion z -> 1/(z - q)
with a pivot q chosen outside the face's closure.

Walkers advance in fixed-size batches and every batch draws its
uniforms from a counter-based generator keyed by (seed, batch, step),
so results are bit-identical no matter how the work is threaded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .curves import PolylineCurve
from .errors import MeasureError
from .ratfun import INF, is_inf
from .rng import step_uniforms

_BATCH = 65_536
_NEAR_K = 12


def green_disk(z, w):
    """Green's function of the unit disk with pole at w.

    g(z, w) = log|1 - conj(w) z| - log|z - w|, positive inside,
    zero on the circle.  Broadcasts over arrays.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.log(np.abs(1 - np.conj(w) * z)) - np.log(np.abs(z - w))


def blaschke_log_abs(z, zeros) -> np.ndarray:
    """log|B(z)| for the Blaschke product with the given zeros.

    Forms the product of the factors and takes a single log, so the
    identity log|B| = -sum of Green's functions is checked across two
    genuinely different evaluation routes.
    """
    z = np.asarray(z, dtype=complex)
    prod = np.ones(z.shape, dtype=complex)
    for w in zeros:
        prod *= (z - w) / (1 - np.conj(w) * z)
    return np.log(np.abs(prod))


@dataclass(frozen=True)
class BoundaryArc:
    """A labeled piece of a face boundary."""

    label: str
    curve: PolylineCurve


def arc_slice(curve: PolylineCurve, s0: float, s1: float) -> PolylineCurve:
    """Open sub-polyline of a curve between arclengths s0 < s1."""
    if not s0 < s1:
        raise MeasureError(f"empty arc [{s0}, {s1}]")
    pts = curve.points
    cum = curve.cum_arclength
    if curve.closed:
        pts = np.concatenate([pts, pts[:1]])
        cum = np.concatenate([cum, [curve.total_length]])
    i0 = int(np.searchsorted(cum, s0, side="right"))
    i1 = int(np.searchsorted(cum, s1, side="left"))
    pieces = [curve.point_at(s0), *pts[i0:i1].tolist(), curve.point_at(s1)]
    tol = 1e-12 * max(curve.total_length, 1.0)
    out = [pieces[0]]
    for p in pieces[1:]:
        if abs(p - out[-1]) > tol:
            out.append(p)
    if len(out) < 2:
        out = [curve.point_at(s0), curve.point_at(s1)]
    return PolylineCurve(np.array(out), closed=False)


def dyadic_arcs(curve: PolylineCurve, levels: int,
                prefix: str = "arc") -> list[BoundaryArc]:
    """Split a curve into 2**levels arcs of equal arclength.

    Labels are prefix:k in traversal order.  The split depends only on
    the curve's stored orientation, so the two faces beside an edge
    name the same physical arcs identically.
    """
    if levels < 0:
        raise MeasureError("levels must be nonnegative")
    count = 2 ** levels
    total = curve.total_length
    breaks = [total * k / count for k in range(count + 1)]
    return [BoundaryArc(f"{prefix}:{k}", arc_slice(curve, breaks[k],
                                                   breaks[k + 1]))
            for k in range(count)]


@dataclass(frozen=True)
class MeasureResult:
    """Harmonic-measure estimates for one start point.

    weights[label] estimates the measure of that arc; stderr[label] is
    the binomial standard error.  Lost walkers (those still alive at
    the step cap) are counted but carry no weight.
    """

    weights: dict[str, float]
    stderr: dict[str, float]
    walkers: int
    lost: int
    mean_steps: float

    def weight(self, label: str) -> float:
        return self.weights[label]

    def sigma(self, label: str) -> float:
        return self.stderr[label]

    def total_weight(self) -> float:
        return float(sum(self.weights.values()))


def _transform_arcs(arcs, pivot):
    """Invert arcs about a pivot and rebalance their point density.

    Inversion shrinks distant boundary pieces, leaving them sampled far
    more densely than the absorption scale requires; each image arc is
    simplified with a deviation bound well below eps so segment lengths
    stay comparable across the whole boundary.
    """
    from shapely.geometry import LineString

    transformed = []
    for arc in arcs:
        pts = 1.0 / (arc.curve.points - pivot)
        if not np.all(np.isfinite(pts)):
            raise MeasureError("inversion pivot lies on the boundary")
        transformed.append(pts)
    every = np.concatenate(transformed)
    diam = float(np.hypot(np.ptp(every.real), np.ptp(every.imag)))
    tol = 1e-5 * diam

    out = []
    for arc, pts in zip(arcs, transformed):
        closed = arc.curve.closed
        ring = np.concatenate([pts, pts[:1]]) if closed else pts
        line = LineString(np.column_stack([ring.real, ring.imag]))
        slim = np.asarray(line.simplify(tol).coords)
        slim = slim[:, 0] + 1j * slim[:, 1]
        if closed:
            slim = slim[:-1]
        if len(slim) < (3 if closed else 2):
            slim = pts
        out.append(BoundaryArc(arc.label, PolylineCurve(slim, closed=closed)))
    return out


def _subdivide_segments(seg_a, seg_b, seg_lab, max_len: float):
    """Split long segments into collinear pieces of at most max_len.

    The polyline geometry is unchanged; shorter segments tighten the
    midpoint-tree distance bound and speed up the walk.
    """
    length = np.abs(seg_b - seg_a)
    pieces = np.maximum(1, np.ceil(length / max_len).astype(np.int64))
    if int(pieces.max()) == 1:
        return seg_a, seg_b, seg_lab
    step = np.repeat((seg_b - seg_a) / pieces, pieces)
    base = np.repeat(seg_a, pieces)
    offset = np.arange(int(pieces.sum())) - np.repeat(
        np.cumsum(pieces) - pieces, pieces)
    a = base + offset * step
    return a, a + step, np.repeat(seg_lab, pieces)


def _exact_distances(p: np.ndarray, a: np.ndarray, b: np.ndarray):
    """Distances from points p (m,) to segments a->b (m, k) per row."""
    d = b - a
    dd = np.abs(d) ** 2
    dd = np.where(dd == 0, 1.0, dd)
    t = np.clip(((p[:, None] - a) * np.conj(d)).real / dd, 0.0, 1.0)
    proj = a + t * d
    return np.abs(p[:, None] - proj)


def harmonic_measure(arcs: Sequence[BoundaryArc], z0: complex,
                     walkers: int = 100_000, seed: int = 0,
                     eps_factor: float = 1e-4, step_cap: int = 10_000,
                     threads: int = 1,
                     transfer: complex | None = None) -> MeasureResult:
    """Estimate harmonic measure of each arc from z0 by walk-on-spheres.

    Each walker jumps to a uniform point on the largest boundary-free
    circle around its position until it comes within eps of the
    boundary, where eps is eps_factor times the boundary diameter; it
    is then absorbed and attributed to the nearest arc.  A transfer
    pivot maps an unbounded face to a bounded one by inversion first
    (z0 may be the point at infinity only in that case).
    """
    if not arcs:
        raise MeasureError("no boundary arcs given")
    if transfer is not None:
        arcs = _transform_arcs(arcs, transfer)
        z0 = 0j if is_inf(z0) else 1.0 / (complex(z0) - transfer)
    elif is_inf(z0):
        raise MeasureError("measuring from infinity needs a transfer pivot")
    z0 = complex(z0)

    labels = [arc.label for arc in arcs]
    if len(set(labels)) != len(labels):
        raise MeasureError("duplicate arc labels")
    seg_a_parts, seg_b_parts, seg_lab_parts = [], [], []
    for idx, arc in enumerate(arcs):
        a, b = arc.curve.segments()
        seg_a_parts.append(a)
        seg_b_parts.append(b)
        seg_lab_parts.append(np.full(len(a), idx, dtype=np.int64))
    seg_a = np.concatenate(seg_a_parts)
    seg_b = np.concatenate(seg_b_parts)
    seg_lab = np.concatenate(seg_lab_parts)

    all_pts = np.concatenate([seg_a, seg_b])
    diam = float(np.hypot(np.ptp(all_pts.real), np.ptp(all_pts.imag)))
    if diam == 0:
        raise MeasureError("degenerate boundary")
    eps = eps_factor * diam
    seg_a, seg_b, seg_lab = _subdivide_segments(seg_a, seg_b, seg_lab,
                                                diam / 256.0)
    s_half = 0.5 * float(np.max(np.abs(seg_b - seg_a)))
    near_cut = max(2.0 * eps, 2.0 * s_half)

    mid = 0.5 * (seg_a + seg_b)
    tree = cKDTree(np.column_stack([mid.real, mid.imag]))
    nseg = len(seg_a)
    k_near = min(_NEAR_K, nseg)

    start_gap = float(np.min(_exact_distances(
        np.array([z0]), seg_a[None, :], seg_b[None, :])[0]))
    if start_gap <= eps:
        raise MeasureError(f"start point {z0!r} is within eps of the "
                           "boundary")

    counts = np.zeros(len(arcs), dtype=np.int64)
    lost = 0
    total_steps = 0
    done = 0
    batch_idx = 0
    while done < walkers:
        m = min(_BATCH, walkers - done)
        z = np.full(m, z0, dtype=complex)
        alive = np.ones(m, dtype=bool)
        for step in range(step_cap):
            n_active = int(alive.sum())
            if n_active == 0:
                break
            pos = z[alive]
            xy = np.column_stack([pos.real, pos.imag])
            dv, _ = tree.query(xy, k=1, workers=threads)
            d_low = dv - s_half
            total_steps += n_active

            radius = d_low.copy()
            absorbed = np.zeros(n_active, dtype=bool)
            hit_label = np.zeros(n_active, dtype=np.int64)
            near = d_low <= near_cut
            if near.any():
                p_near = pos[near]
                xy_near = xy[near]
                dk, ik = tree.query(xy_near, k=k_near, workers=threads)
                dk = dk.reshape(len(p_near), k_near)
                ik = ik.reshape(len(p_near), k_near)
                dists = _exact_distances(p_near, seg_a[ik], seg_b[ik])
                local_arg = np.argmin(dists, axis=1)
                rows = np.arange(len(p_near))
                d_exact = dists[rows, local_arg]
                seg_idx = ik[rows, local_arg]
                # the k nearest midpoints certify the true nearest
                # segment only when the k-th one is clearly farther
                unsafe = (k_near < nseg) & (d_exact > dk[:, -1] - s_half)
                if np.any(unsafe):
                    full = _exact_distances(p_near[unsafe],
                                            seg_a[None, :], seg_b[None, :])
                    d_exact[unsafe] = np.min(full, axis=1)
                    seg_idx[unsafe] = np.argmin(full, axis=1)
                radius[near] = d_exact
                absorbed[near] = d_exact <= eps
                hit_label[near] = seg_lab[seg_idx]

            if absorbed.any():
                hits = hit_label[absorbed]
                counts += np.bincount(hits, minlength=len(arcs))
                keep = np.where(alive)[0]
                alive[keep[absorbed]] = False

            moving = ~absorbed
            if moving.any():
                u = step_uniforms(seed, batch_idx, step, n_active)
                angles = 2.0 * np.pi * u[moving]
                idx_alive = np.where(alive)[0]
                z[idx_alive] = (pos[moving]
                                + radius[moving] * np.exp(1j * angles))
        lost += int(alive.sum())
        done += m
        batch_idx += 1

    if lost / walkers >= 1e-3:
        raise MeasureError(
            f"{lost} of {walkers} walkers never reached the boundary "
            f"within {step_cap} steps")

    weights = {}
    stderr = {}
    for idx, label in enumerate(labels):
        p = counts[idx] / walkers
        weights[label] = float(p)
        stderr[label] = float(np.sqrt(p * (1.0 - p) / walkers))
    return MeasureResult(weights=weights, stderr=stderr, walkers=walkers,
                         lost=lost, mean_steps=total_steps / walkers)


@dataclass(frozen=True)
class IntegralityReport:
    """Distance of a measured flux from the nearest integer."""

    value: float
    nearest: int
    sigma: float
    z_score: float
    ok: bool


def integrality_check(value: float, sigma: float,
                      z_tol: float = 3.0,
                      slack: float = 0.0) -> IntegralityReport:
    """Check that a measured quantity is an integer to within noise.

    Passes when |value - round(value)| <= z_tol * sigma + slack.
    """
    nearest = int(round(value))
    gap = abs(value - nearest)
    z = gap / sigma if sigma > 0 else (0.0 if gap <= slack else np.inf)
    return IntegralityReport(value=value, nearest=nearest, sigma=sigma,
                             z_score=float(z),
                             ok=gap <= z_tol * sigma + slack)


def face_arcs(graph, face_index: int, levels: int = 0) -> list[BoundaryArc]:
    """Dyadic arcs of every edge on a face's boundary.

    Arcs are cut on each edge's stored orientation, so adjacent faces
    produce identical labels for the same physical pieces.
    """
    arcs = []
    for edge_idx, _forward in graph.faces[face_index].boundary:
        curve = graph.edges[edge_idx].curve
        arcs.extend(dyadic_arcs(curve, levels, prefix=f"e{edge_idx}"))
    return arcs


def pick_transfer_pivot(graph, face_index: int) -> complex:
    """A point outside an unbounded face's closure, for inversion."""
    bounded = [f for f in graph.faces if f.bounded]
    if not bounded:
        raise MeasureError("graph has no bounded face to anchor the "
                           "inversion")
    deepest = max(bounded, key=lambda f: f.area)
    return deepest.representative


def measure_face(graph, face_index: int, z0: complex | None = None,
                 levels: int = 0, walkers: int = 100_000, seed: int = 0,
                 threads: int = 1, eps_factor: float = 1e-4,
                 step_cap: int = 10_000):
    """Harmonic measures of a face's dyadic boundary arcs from z0.

    Defaults z0 to the face representative (infinity has no special
    default; pass INF explicitly to measure from there).  Unbounded
    faces are inverted about a deep interior point of a bounded face.
    Returns (MeasureResult, arcs).
    """
    face = graph.faces[face_index]
    if z0 is None:
        z0 = face.representative
    transfer = None
    if not face.bounded:
        transfer = pick_transfer_pivot(graph, face_index)
    elif is_inf(z0):
        raise MeasureError("infinity lies in the unbounded face only")
    arcs = face_arcs(graph, face_index, levels)
    result = harmonic_measure(arcs, z0, walkers=walkers, seed=seed,
                              eps_factor=eps_factor, step_cap=step_cap,
                              threads=threads, transfer=transfer)
    return result, arcs
