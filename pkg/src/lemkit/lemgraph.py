"""Planar graph structure carried by a rational level set.

A traced level set cuts the plane into faces separated by smooth edges
that meet at critical-point vertices.  This module recovers that
combinatorial structure and audits the invariants every such graph must
satisfy: every vertex has even degree at least four, faces admit a
proper two-coloring by side (the modulus is below the level on one side
of each edge and above it on the other), and the planar Euler count
V - E + F = 1 + C holds, where C is the number of connected components
of the curve system and each closed loop is given one auxiliary vertex
so it counts as a proper one-vertex cycle.

Faces are found by flood-filling the complement of a conservative
rasterisation of the edges, so the face count is independent of the
combinatorial bookkeeping and the Euler audit cross-checks the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .curves import PolylineCurve, angle_sweep
from .errors import GraphError, OnCurveError
from .ratfun import RationalMap
from .tracer import TraceResult, rasterize_cut_cells

SUBLEVEL = 0
SUPERLEVEL = 1

# fraction of a full turn by which a boundary winding may miss an integer
_WINDING_TOL = 1e-6


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        self.parent[self.find(i)] = self.find(j)

    def component_count(self, items) -> int:
        return len({self.find(i) for i in items})


@dataclass(frozen=True)
class Face:
    """One complementary region of the level set.

    ``boundary`` lists (edge index, forward) pairs; an edge is traversed
    forward when this face lies on its left, so the directed boundary
    always keeps the face on the left.
    """

    index: int
    representative: complex
    color: int  # SUBLEVEL or SUPERLEVEL
    bounded: bool
    boundary: tuple[tuple[int, bool], ...]
    boundary_components: tuple[tuple[int, ...], ...]  # edge-index groups
    area: float

    @property
    def boundary_component_count(self) -> int:
        return len(self.boundary_components)


@dataclass(frozen=True)
class LemGraph:
    vertices: tuple[tuple[complex, int], ...]  # (location, degree)
    edges: tuple
    faces: tuple[Face, ...]
    level: float
    rmap: RationalMap | None
    box: tuple[float, float, float, float]
    grid_n: int

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def unbounded_face(self) -> Face:
        for f in self.faces:
            if not f.bounded:
                return f
        raise GraphError("graph has no unbounded face")

    def boundary_curves(self, face_index: int) -> list[PolylineCurve]:
        """Directed boundary of a face, face kept on the left."""
        out = []
        for edge_idx, forward in self.faces[face_index].boundary:
            curve = self.edges[edge_idx].curve
            out.append(curve if forward else curve.reversed())
        return out

    def face_of(self, z: complex) -> int:
        """Index of the face containing z by the winding rule.

        The directed boundary of a bounded face winds once around the
        points it encloses and not at all around the rest; a point no
        bounded face claims lies in the unbounded face.  Points on or
        near an edge raise OnCurveError.
        """
        x0, x1, y0, y1 = self.box
        scale = max(1.0, x1 - x0, y1 - y0)
        for e in self.edges:
            if e.curve.distance_to(z) <= 1e-9 * scale:
                raise OnCurveError(f"{z!r} lies on the level set")
        claimed = []
        for f in self.faces:
            if not f.bounded:
                continue
            total = 0.0
            for curve in self.boundary_curves(f.index):
                total += angle_sweep(curve, z)
            turns = total / (2.0 * np.pi)
            if abs(turns - round(turns)) > _WINDING_TOL:
                raise GraphError(
                    f"non-integer boundary winding {turns!r} around {z!r}")
            if round(turns) == 1:
                claimed.append(f.index)
        if len(claimed) > 1:
            raise GraphError(f"point {z!r} claimed by faces {claimed}")
        if claimed:
            return claimed[0]
        return self.unbounded_face().index

    def assign_points(self, points) -> list[int]:
        return [self.face_of(complex(z)) for z in np.asarray(points).ravel()]


def _locate_cell(z: complex, box, n: int) -> tuple[int, int]:
    x0, x1, y0, y1 = box
    ix = int((z.real - x0) / (x1 - x0) * n)
    iy = int((z.imag - y0) / (y1 - y0) * n)
    return min(max(iy, 0), n - 1), min(max(ix, 0), n - 1)


def _probe_label(z: complex, labels: np.ndarray, box, n: int) -> int:
    """Label of the face region at z, searching past rasterised cells."""
    iy, ix = _locate_cell(z, box, n)
    if labels[iy, ix] > 0:
        return int(labels[iy, ix])
    for radius in (1, 2):
        block = labels[max(iy - radius, 0):iy + radius + 1,
                       max(ix - radius, 0):ix + radius + 1]
        hit = block[block > 0]
        if hit.size:
            values, counts = np.unique(hit, return_counts=True)
            return int(values[np.argmax(counts)])
    return 0


def _edge_side_labels(curve: PolylineCurve, labels, box, n) -> tuple[int, int]:
    """Face labels just left and just right of a directed edge.

    Samples several interior segments and majority-votes each side so a
    single probe landing in a rasterised cell cannot misattribute.
    """
    seg_a, seg_b = curve.segments()
    count = len(seg_a)
    picks = sorted({count // 4, count // 2, (3 * count) // 4, count // 8})
    x0, x1, y0, y1 = box
    h = 0.75 * min((x1 - x0), (y1 - y0)) / n
    votes_left: dict[int, int] = {}
    votes_right: dict[int, int] = {}
    for k in picks:
        a, b = seg_a[k], seg_b[k]
        d = b - a
        if abs(d) == 0:
            continue
        normal = 1j * d / abs(d)
        mid = 0.5 * (a + b)
        equal_pair = None
        for scale in (1.0, 2.0, 4.0):
            lab_l = _probe_label(mid + scale * h * normal, labels, box, n)
            lab_r = _probe_label(mid - scale * h * normal, labels, box, n)
            if lab_l > 0 and lab_r > 0 and lab_l != lab_r:
                votes_left[lab_l] = votes_left.get(lab_l, 0) + 1
                votes_right[lab_r] = votes_right.get(lab_r, 0) + 1
                equal_pair = None
                break
            if lab_l > 0 and lab_l == lab_r:
                # remember a same-face sighting but keep trying wider
                # offsets; it only counts if no offset separates them
                equal_pair = (lab_l, lab_r)
        else:
            if equal_pair is not None:
                votes_left[equal_pair[0]] = votes_left.get(equal_pair[0], 0) + 1
                votes_right[equal_pair[1]] = votes_right.get(equal_pair[1], 0) + 1
    if not votes_left or not votes_right:
        raise GraphError("could not resolve the faces beside an edge; "
                         "refine the trace grid")
    left = max(votes_left, key=votes_left.get)
    right = max(votes_right, key=votes_right.get)
    return left, right


def build_graph(result: TraceResult, grid_n: int | None = None) -> LemGraph:
    """Assemble and audit the face structure of a traced level set.

    Raises GraphError when any invariant fails: odd or small vertex
    degree, a face bordering itself across an edge (no two-coloring),
    a face side disagreeing with the modulus at its deepest interior
    point, or an Euler count that contradicts the flood-fill face count.
    """
    edges = list(result.edges)
    if not edges:
        raise GraphError("level set has no edges")
    n = grid_n or result.grid_n

    # recompute vertex degrees from incidence and compare with the
    # orders declared by the tracer's critical-point analysis
    degree = [0] * len(result.vertices)
    for e in edges:
        if not e.is_loop:
            degree[e.v_start] += 1
            degree[e.v_end] += 1
    vertices = []
    for (loc, declared), got in zip(result.vertices, degree):
        if got != declared:
            raise GraphError(
                f"vertex at {loc!r} declares degree {declared} "
                f"but {got} edge ends attach")
        if got % 2 != 0 or got < 4:
            raise GraphError(
                f"vertex at {loc!r} has degree {got}; a level-set "
                "vertex needs even degree of at least four")
        vertices.append((loc, got))

    curves = [e.curve for e in edges]
    cut = rasterize_cut_cells(curves, result.box, n)
    labels, face_count = ndimage.label(~cut)
    if face_count < 2:
        raise GraphError(f"flood fill found {face_count} faces; "
                         "a level set separates the plane")

    frame = np.concatenate([labels[0, :], labels[-1, :],
                            labels[:, 0], labels[:, -1]])
    frame_labels = set(np.unique(frame[frame > 0]).tolist())
    if len(frame_labels) != 1:
        raise GraphError(
            f"{len(frame_labels)} regions touch the frame; the trace "
            "box must enclose the level set with margin")
    unbounded_label = frame_labels.pop()

    # deepest uncut cell of each region serves as its representative
    dist = ndimage.distance_transform_cdt(labels > 0)
    rep_cells = ndimage.maximum_position(dist, labels,
                                         range(1, face_count + 1))
    x0, x1, y0, y1 = result.box
    hx, hy = (x1 - x0) / n, (y1 - y0) / n
    reps = [complex(x0 + (ix + 0.5) * hx, y0 + (iy + 0.5) * hy)
            for iy, ix in rep_cells]
    cell_counts = np.bincount(labels.ravel(), minlength=face_count + 1)
    areas = cell_counts[1:] * hx * hy

    side_pairs = [_edge_side_labels(c, labels, result.box, n)
                  for c in curves]

    # a proper two-coloring exists iff no edge has the same face on
    # both sides; colors then propagate from the left/right relation
    colors = [-1] * (face_count + 1)
    for (left, right), e in zip(side_pairs, edges):
        if left == right:
            raise GraphError(
                "an edge has the same face on both sides; the faces "
                "admit no two-coloring")
        for lab, color in ((left, SUBLEVEL), (right, SUPERLEVEL)):
            if colors[lab] == -1:
                colors[lab] = color
            elif colors[lab] != color:
                raise GraphError(
                    "face side assignments conflict; the faces admit "
                    "no two-coloring")

    boundary_lists: list[list[tuple[int, bool]]] = [
        [] for _ in range(face_count + 1)]
    for idx, (left, right) in enumerate(side_pairs):
        boundary_lists[left].append((idx, True))
        boundary_lists[right].append((idx, False))
    for lab in range(1, face_count + 1):
        if not boundary_lists[lab]:
            raise GraphError(
                "a flood-fill region touches no edge; rasterisation "
                "split a face, refine the trace grid")

    if result.rmap is not None:
        logc = np.log(result.level)
        for lab in range(1, face_count + 1):
            side = result.rmap.log_abs(np.array([reps[lab - 1]]))[0]
            want = SUBLEVEL if side < logc else SUPERLEVEL
            if colors[lab] != want:
                raise GraphError(
                    f"face at {reps[lab - 1]!r} is on the "
                    f"{'sub' if want == SUBLEVEL else 'super'}level side "
                    "but its edges orient it the other way")

    # Euler audit; loops are their own components and take an auxiliary
    # vertex each so V - E + F = 1 + C applies verbatim
    uf = _UnionFind(len(edges))
    for i, e in enumerate(edges):
        for j, other in enumerate(edges[:i]):
            if e.is_loop or other.is_loop:
                continue
            if {e.v_start, e.v_end} & {other.v_start, other.v_end}:
                uf.union(i, j)
    components = uf.component_count(range(len(edges)))
    loops = sum(1 for e in edges if e.is_loop)
    euler = (len(vertices) + loops) - len(edges) + face_count
    if euler != 1 + components:
        raise GraphError(
            f"Euler count V - E + F = {euler} but 1 + C = "
            f"{1 + components}; the trace is inconsistent")

    faces = []
    for lab in range(1, face_count + 1):
        incident = [idx for idx, _ in boundary_lists[lab]]
        fuf = _UnionFind(len(edges))
        for a_pos, i in enumerate(incident):
            for j in incident[:a_pos]:
                ei, ej = edges[i], edges[j]
                if ei.is_loop or ej.is_loop:
                    continue
                if {ei.v_start, ei.v_end} & {ej.v_start, ej.v_end}:
                    fuf.union(i, j)
        groups: dict[int, list[int]] = {}
        for i in incident:
            groups.setdefault(fuf.find(i), []).append(i)
        faces.append(Face(
            index=lab - 1,
            representative=reps[lab - 1],
            color=colors[lab],
            bounded=(lab != unbounded_label),
            boundary=tuple(boundary_lists[lab]),
            boundary_components=tuple(
                tuple(g) for g in sorted(groups.values())),
            area=float(areas[lab - 1]),
        ))

    return LemGraph(
        vertices=tuple(vertices),
        edges=tuple(edges),
        faces=tuple(faces),
        level=result.level,
        rmap=result.rmap,
        box=result.box,
        grid_n=n,
    )
