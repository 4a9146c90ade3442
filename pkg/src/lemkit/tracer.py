"""Level-set tracing: |r(z)| = c as planar polylines.

Marching squares on log|r| - log c over an automatically sized box,
followed by Newton correction of every sample onto the level set and
snapping of chains onto level-critical points (the graph vertices).

Limitations, by design: level sets through the point at infinity cannot
be represented as finite polylines and are rejected; far-field
components around infinity are captured by analytic radius bounds that
feed the box sizing.  A half-resolution topology comparison guards
against grids too coarse for the feature scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import PolylineCurve
from .errors import GridResolutionError, NewtonError, TraceError
from .ratfun import (
    INF,
    Multiset,
    RationalMap,
    critical_points,
    is_inf,
    rat_eval,
)

NEWTON_TOL = 1e-12
NEWTON_CAP = 30
DERIV_FLOOR = 1e-12
VERTEX_VALUE_TOL = 1e-6
SNAP_CELLS = 10.0
INF_LEVEL_TOL = 1e-6
_CLAMP = 50.0


@dataclass
class TraceEdge:
    """One edge of the traced graph.

    v_start/v_end index into the vertex list; both None means a closed
    loop with no vertex on it.  The curve runs from v_start to v_end
    (the vertex locations are the first/last points).
    """

    curve: PolylineCurve
    v_start: int | None = None
    v_end: int | None = None

    @property
    def is_loop(self) -> bool:
        return self.v_start is None and self.v_end is None


@dataclass
class TraceResult:
    edges: list
    vertices: list  # [(location, declared_degree)]
    level: float
    box: tuple     # (x0, x1, y0, y1)
    grid_n: int
    rmap: RationalMap | None = None
    warnings: list = field(default_factory=list)

    def curves(self):
        return [e.curve for e in self.edges]


def newton_correct(r: RationalMap, c: float, z0, tol: float = 1e-9,
                   max_iter: int = NEWTON_CAP):
    """Project z0 onto {|r| = c} along the gradient of log|r|.

    Scalar: raises NewtonError on singular gradient or no convergence.
    Array: returns (z, ok) and flags failures instead of raising.
    The convergence target is | log(|r(z)|/c) | <= tol, which puts
    ||r(z)| - c| within about tol * c.
    """
    scalar = np.ndim(z0) == 0
    z = np.atleast_1d(np.asarray(z0, dtype=complex)).copy()
    ok = np.ones(z.shape, dtype=bool)
    done = np.zeros(z.shape, dtype=bool)
    logc = math.log(c)
    for _ in range(max_iter):
        active = ok & ~done
        if not np.any(active):
            break
        za = z[active]
        g = r.log_abs(za) - logc
        L = r.log_deriv(za)
        absL = np.abs(L)
        bad = ~np.isfinite(g) | ~np.isfinite(absL) | (absL < DERIV_FLOOR)
        conv = ~bad & (np.abs(g) <= tol)
        move = ~(bad | conv)
        safe_L = np.where(move, L, 1.0)
        step = np.where(move, g, 0.0) * np.conj(safe_L) / np.abs(safe_L) ** 2
        z[active] = za - step
        idx = np.nonzero(active)[0]
        ok[idx[bad]] = False
        done[idx[conv | bad]] = True
    # anything not done and still ok never converged
    ok &= done
    if scalar:
        if not ok[0]:
            raise NewtonError(
                f"correction failed at {complex(np.atleast_1d(z0)[0])}: "
                "singular gradient or no convergence"
            )
        return complex(z[0])
    return z, ok


def _feature_radius(r: RationalMap, c: float) -> tuple:
    """(center, half_width) of a box guaranteed to contain the level set."""
    pts = []
    for ms in (r.zeros, r.poles, critical_points(r)):
        pts.extend(p for p in ms.points() if not is_inf(p))
    if pts:
        xs = np.array([p.real for p in pts])
        ys = np.array([p.imag for p in pts])
        cx = 0.5 * (xs.min() + xs.max())
        cy = 0.5 * (ys.min() + ys.max())
        spread = max(
            float(np.max(np.hypot(xs - cx, ys - cy))), 1e-2
        )
    else:
        cx = cy = 0.0
        spread = 1.0
    center = complex(cx, cy)
    radii = [1.6 * spread]
    dn, dd = r.num.degree, r.den.degree
    # far-field level radius when the map has a zero or pole at infinity
    if dn != dd:
        lead = abs(r.num.lead) / abs(r.den.lead)
        if dn > dd:
            radii.append(1.35 * (c / lead) ** (1.0 / (dn - dd)) + 0.35 * spread)
        else:
            radii.append(1.35 * (lead / c) ** (1.0 / (dd - dn)) + 0.35 * spread)
    return center, max(radii)


def _sample_grid(r: RationalMap, c: float, box, n):
    x0, x1, y0, y1 = box
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    zz = xs[None, :] + 1j * ys[:, None]  # row j = y index, col i = x index
    f = r.log_abs(zz) - math.log(c)
    # inf - inf from simultaneous overflow can only happen far outside
    # the feature zone; treat it as superlevel
    f = np.where(np.isnan(f), 1.0, f)
    return xs, ys, f


_EDGE_BOTTOM, _EDGE_RIGHT, _EDGE_TOP, _EDGE_LEFT = 0, 1, 2, 3


def _march(xs, ys, f, r: RationalMap, c: float):
    """Marching squares; returns (node points, adjacency, frame_hit).

    Nodes are level crossings on grid edges, computed once per edge so
    chains join exactly.  Adjacency holds within-cell connections.
    """
    n = xs.size - 1
    pos = f > 0
    fc = np.clip(f, -_CLAMP, _CLAMP)

    nodes = []
    node_of = {}

    def edge_node(kind, i, j):
        key = (kind, i, j)
        got = node_of.get(key)
        if got is not None:
            return got
        if kind == "h":
            f0, f1 = fc[j, i], fc[j, i + 1]
            t = f0 / (f0 - f1)
            p = complex(xs[i] + t * (xs[i + 1] - xs[i]), ys[j])
        else:
            f0, f1 = fc[j, i], fc[j + 1, i]
            t = f0 / (f0 - f1)
            p = complex(xs[i], ys[j] + t * (ys[j + 1] - ys[j]))
        node_of[key] = len(nodes)
        nodes.append(p)
        return node_of[key]

    # cells whose four corners disagree in sign
    corner = pos[:-1, :-1].astype(np.int8) + pos[:-1, 1:] + pos[1:, :-1] + pos[1:, 1:]
    cj, ci = np.nonzero((corner > 0) & (corner < 4))
    adj = {}
    frame_hit = False

    def connect(a, b):
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)

    for j, i in zip(cj.tolist(), ci.tolist()):
        bl, br = pos[j, i], pos[j, i + 1]
        tl, tr = pos[j + 1, i], pos[j + 1, i + 1]
        crossings = []
        if bl != br:
            crossings.append((_EDGE_BOTTOM, edge_node("h", i, j)))
        if br != tr:
            crossings.append((_EDGE_RIGHT, edge_node("v", i + 1, j)))
        if tl != tr:
            crossings.append((_EDGE_TOP, edge_node("h", i, j + 1)))
        if bl != tl:
            crossings.append((_EDGE_LEFT, edge_node("v", i, j)))
        if j == 0 or j == n - 1 or i == 0 or i == n - 1:
            for side, _ in crossings:
                if (
                    (j == 0 and side == _EDGE_BOTTOM)
                    or (j == n - 1 and side == _EDGE_TOP)
                    or (i == 0 and side == _EDGE_LEFT)
                    or (i == n - 1 and side == _EDGE_RIGHT)
                ):
                    frame_hit = True
        if len(crossings) == 2:
            connect(crossings[0][1], crossings[1][1])
        elif len(crossings) == 4:
            center = complex(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]))
            f_ctr = float(r.log_abs(np.array([center]))[0]) - math.log(c)
            by_side = dict(crossings)
            if (f_ctr > 0) == bool(bl):
                connect(by_side[_EDGE_BOTTOM], by_side[_EDGE_RIGHT])
                connect(by_side[_EDGE_TOP], by_side[_EDGE_LEFT])
            else:
                connect(by_side[_EDGE_BOTTOM], by_side[_EDGE_LEFT])
                connect(by_side[_EDGE_RIGHT], by_side[_EDGE_TOP])
        # odd crossing counts cannot happen: each sign change pairs up

    return np.array(nodes, dtype=complex), adj, frame_hit


def _walk_chains(nodes, adj):
    """Split the degree<=2 crossing graph into open chains and loops."""
    visited = set()
    chains = []

    def walk(start, first):
        path = [start, first]
        visited.add(start)
        visited.add(first)
        prev, cur = start, first
        while True:
            nbrs = [x for x in adj[cur] if x != prev]
            nxt = None
            for x in nbrs:
                if x not in visited:
                    nxt = x
                    break
            if nxt is None:
                # possibly closing back to start
                if start in adj[cur] and len(path) > 2:
                    return path, True
                return path, False
            path.append(nxt)
            visited.add(nxt)
            prev, cur = cur, nxt

    deg1 = [a for a, nb in adj.items() if len(nb) == 1]
    for a in deg1:
        if a in visited:
            continue
        path, closed = walk(a, adj[a][0])
        chains.append((path, False))
    for a in adj:
        if a in visited:
            continue
        path, closed = walk(a, adj[a][0])
        chains.append((path, True))
    return [(nodes[np.array(p)], closed) for p, closed in chains]


def _split_at_vertices(chain, closed, vertices, snap):
    """Remove points inside vertex snap disks; return runs with the
    vertex index each cut end belongs to."""
    pts = np.asarray(chain)
    if not vertices:
        return [(pts, None, None)] if not closed else [(pts, -1, -1)]
    vlocs = np.array([v for v, _ in vertices])
    d = np.abs(pts[:, None] - vlocs[None, :])
    nearest = np.argmin(d, axis=1)
    near = d[np.arange(len(pts)), nearest] <= snap
    if not np.any(near):
        return [(pts, None, None)] if not closed else [(pts, -1, -1)]
    if np.all(near):
        return []  # chain absorbed entirely: grid cannot resolve it
    runs = []
    n = len(pts)
    if closed:
        # rotate so index 0 is near a vertex, then scan linearly
        start = int(np.argmax(near))
        order = np.arange(start, start + n) % n
        pts, near, nearest = pts[order], near[order], nearest[order]
    i = 0
    while i < n:
        if near[i]:
            i += 1
            continue
        j = i
        while j < n and not near[j]:
            j += 1
        va = nearest[i - 1] if i > 0 else (nearest[-1] if closed else None)
        vb = nearest[j] if j < n else (nearest[0] if closed else None)
        runs.append((pts[i:j], None if va is None else int(va),
                     None if vb is None else int(vb)))
        i = j
    return runs


def trace(r: RationalMap, c: float, grid_n: int = 512, box=None,
          check_stability: bool = True) -> TraceResult:
    """Trace the level set {|r(z)| = c} into polyline edges and vertices.

    Every edge point lands within 1e-9 * c of the level set after
    Newton correction; edges are oriented with the sublevel region
    |r| < c on their left.  Critical points whose values sit on the
    level within VERTEX_VALUE_TOL become vertices of declared degree
    2*(multiplicity + 1), and chains are cut onto them inside a snap
    radius of SNAP_CELLS grid-cell diagonals.
    """
    if c <= 0 or not math.isfinite(c):
        raise TraceError("level must be positive and finite")
    if grid_n < 16:
        raise TraceError("grid_n must be at least 16")
    v_inf = r.value_at_inf()
    if not is_inf(v_inf) and abs(abs(v_inf) - c) <= INF_LEVEL_TOL * max(c, 1.0):
        raise TraceError(
            "level set meets the point at infinity; "
            "finite polylines cannot represent it"
        )

    if box is None:
        center, half = _feature_radius(r, c)
        grown = False
        for _ in range(6):
            box = (center.real - half, center.real + half,
                   center.imag - half, center.imag + half)
            xs, ys, f = _sample_grid(r, c, box, grid_n)
            frame = np.concatenate([f[0, :], f[-1, :], f[:, 0], f[:, -1]])
            if np.all(frame > 0) or np.all(frame < 0):
                grown = True
                break
            half *= 1.6
        if not grown:
            raise TraceError("level set escapes every candidate box; "
                             "pass an explicit box")
    else:
        xs, ys, f = _sample_grid(r, c, box, grid_n)
        frame = np.concatenate([f[0, :], f[-1, :], f[:, 0], f[:, -1]])
        if not (np.all(frame > 0) or np.all(frame < 0)):
            raise TraceError("level set crosses the requested box frame")

    result = _trace_on_grid(r, c, box, grid_n, xs, ys, f)
    if check_stability:
        half_n = grid_n // 2
        xs2, ys2, f2 = _sample_grid(r, c, box, half_n)
        coarse = _trace_on_grid(r, c, box, half_n, xs2, ys2, f2)
        same = (
            len(coarse.vertices) == len(result.vertices)
            and len(coarse.edges) == len(result.edges)
            and grid_face_count(coarse) == grid_face_count(result)
        )
        if not same:
            raise GridResolutionError(
                f"topology differs between grid {half_n} and {grid_n}; "
                "re-run with a finer grid"
            )
    return result


def _trace_on_grid(r, c, box, grid_n, xs, ys, f) -> TraceResult:
    nodes, adj, frame_hit = _march(xs, ys, f, r, c)
    if frame_hit:
        raise TraceError("level set touches the bounding frame")
    if len(nodes) == 0:
        raise TraceError("grid found no level crossings; refine or re-box")
    chains = _walk_chains(nodes, adj)

    cell = math.hypot(xs[1] - xs[0], ys[1] - ys[0])
    snap = SNAP_CELLS * cell
    vertices = []
    for p, m in critical_points(r):
        if is_inf(p):
            continue
        v = rat_eval(r, p)
        if not is_inf(v) and abs(abs(v) - c) <= VERTEX_VALUE_TOL * max(c, 1.0):
            vertices.append((p, 2 * (m + 1)))

    warnings = []
    edges = []
    for chain, closed in chains:
        runs = _split_at_vertices(chain, closed, vertices, snap)
        if not runs and len(chain) > 0:
            raise GridResolutionError(
                "a traced component was swallowed by a vertex snap disk; "
                "re-run with a finer grid"
            )
        for pts, va, vb in runs:
            if va == -1:  # closed loop untouched by any vertex
                corrected, ok = newton_correct(r, c, pts)
                corrected = corrected[ok]
                if corrected.size < 3:
                    raise GridResolutionError("degenerate closed component")
                corrected = _dedupe(corrected)
                edges.append(TraceEdge(PolylineCurve(corrected, closed=True)))
            else:
                corrected, ok = newton_correct(r, c, pts)
                corrected = corrected[ok]
                if float(np.mean(~ok)) > 0.1:
                    warnings.append("more than 10% of points failed correction")
                head = [vertices[va][0]] if va is not None else []
                tail = [vertices[vb][0]] if vb is not None else []
                full = np.concatenate([head, corrected, tail])
                full = _dedupe(full)
                if full.size < 2:
                    raise GridResolutionError("edge collapsed during correction")
                edges.append(TraceEdge(PolylineCurve(full, closed=False),
                                       v_start=va, v_end=vb))

    result = TraceResult(edges=edges, vertices=vertices, level=c, box=box,
                         grid_n=grid_n, rmap=r, warnings=warnings)
    _orient_sublevel_left(result, cell)
    _audit_vertex_degrees(result)
    return result


def _dedupe(pts: np.ndarray) -> np.ndarray:
    if pts.size < 2:
        return pts
    keep = np.ones(pts.size, dtype=bool)
    keep[1:] = np.abs(np.diff(pts)) > 1e-12
    return pts[keep]


def _orient_sublevel_left(result: TraceResult, cell: float):
    r, c = result.rmap, result.level
    for k, e in enumerate(result.edges):
        pts = e.curve.points
        m = len(pts) // 2
        if len(pts) < 2:
            continue
        a = pts[m - 1] if m > 0 else pts[0]
        b = pts[m] if m < len(pts) else pts[-1]
        t = b - a
        t /= abs(t)
        probe_base = 0.5 * (a + b)
        side = None
        for h in (0.35 * cell, 0.7 * cell, 1.4 * cell):
            left = float(r.log_abs(np.array([probe_base + 1j * t * h]))[0])
            right = float(r.log_abs(np.array([probe_base - 1j * t * h]))[0])
            logc = math.log(c)
            if (left - logc) * (right - logc) < 0:
                side = left < logc
                break
        if side is None:
            result.warnings.append(f"edge {k}: ambiguous side probe")
            continue
        if not side:
            result.edges[k] = TraceEdge(e.curve.reversed(),
                                        v_start=e.v_end, v_end=e.v_start)


def _audit_vertex_degrees(result: TraceResult):
    counts = [0] * len(result.vertices)
    for e in result.edges:
        for v in (e.v_start, e.v_end):
            if v is not None:
                counts[v] += 1
    for i, ((_, declared), got) in enumerate(zip(result.vertices, counts)):
        if declared != got:
            result.warnings.append(
                f"vertex {i}: declared degree {declared}, traced ends {got}"
            )


def grid_face_count(result: TraceResult, grid_n: int | None = None) -> int:
    """Independent face count: connected components of uncut grid cells.

    Rasterises the traced edges onto the grid and counts 4-connected
    components of the remaining cells with scipy's labeller.  Used both
    as the refinement-stability probe and as a test oracle for the
    graph builder.
    """
    from scipy import ndimage

    n = grid_n or result.grid_n
    cut = rasterize_cut_cells([e.curve for e in result.edges], result.box, n)
    lab, count = ndimage.label(~cut)
    return int(count)


def rasterize_cut_cells(curves, box, n) -> np.ndarray:
    """Boolean (n, n) mask of grid cells crossed by any curve.

    Marks every cell whose closed square a segment passes through
    (conservative supercover by dense sampling at quarter-cell steps),
    so 4-connected flood fill cannot leak across a curve.
    """
    x0, x1, y0, y1 = box
    hx = (x1 - x0) / n
    hy = (y1 - y0) / n
    cut = np.zeros((n, n), dtype=bool)
    step = 0.25 * min(hx, hy)
    for curve in curves:
        a, b = curve.segments()
        for p, q in zip(a.tolist(), b.tolist()):
            length = abs(q - p)
            m = max(2, int(length / step) + 2)
            t = np.linspace(0.0, 1.0, m)
            zs = p + t * (q - p)
            ii = np.clip(((zs.real - x0) / hx).astype(int), 0, n - 1)
            jj = np.clip(((zs.imag - y0) / hy).astype(int), 0, n - 1)
            cut[jj, ii] = True
            # thicken samples that sit near cell borders so diagonal
            # steps cannot slip through a corner
            fx = (zs.real - x0) / hx - ii
            fy = (zs.imag - y0) / hy - jj
            near_x = np.where(fx < 0.3, -1, np.where(fx > 0.7, 1, 0))
            near_y = np.where(fy < 0.3, -1, np.where(fy > 0.7, 1, 0))
            cut[jj, np.clip(ii + near_x, 0, n - 1)] = True
            cut[np.clip(jj + near_y, 0, n - 1), ii] = True
    return cut
