"""Graph construction, face structure, and invariant audits."""

import numpy as np
import pytest

from lemkit.curves import OnCurveError, PolylineCurve, circle_curve
from lemkit.errors import GraphError
from lemkit.lemgraph import SUBLEVEL, SUPERLEVEL, build_graph
from lemkit.ratfun import Poly, RationalMap
from lemkit.tracer import TraceEdge, TraceResult, trace


@pytest.fixture(scope="module")
def figure_eight():
    r = RationalMap(Poly([-1, 0, 1]), Poly([1]))
    return build_graph(trace(r, 1.0, grid_n=512))


class TestFigureEight:
    def test_counts(self, figure_eight):
        g = figure_eight
        assert (g.vertex_count, g.edge_count, g.face_count) == (1, 2, 3)

    def test_vertex(self, figure_eight):
        (loc, deg), = figure_eight.vertices
        assert abs(loc) <= 1e-9
        assert deg == 4

    def test_faces(self, figure_eight):
        g = figure_eight
        bounded = [f for f in g.faces if f.bounded]
        assert len(bounded) == 2
        assert all(f.color == SUBLEVEL for f in bounded)
        assert g.unbounded_face().color == SUPERLEVEL
        assert all(f.boundary_component_count == 1 for f in g.faces)

    def test_lobe_areas(self, figure_eight):
        # each lobe of |z^2 - 1| = 1 has area exactly 1
        areas = sorted(f.area for f in figure_eight.faces if f.bounded)
        assert areas == pytest.approx([1.0, 1.0], abs=0.05)

    def test_zeros_in_distinct_lobes(self, figure_eight):
        g = figure_eight
        a, b = g.face_of(-1 + 0j), g.face_of(1 + 0j)
        assert a != b
        assert g.faces[a].bounded and g.faces[b].bounded

    def test_far_point_in_unbounded_face(self, figure_eight):
        g = figure_eight
        assert g.face_of(40 + 3j) == g.unbounded_face().index

    def test_vertex_point_raises(self, figure_eight):
        with pytest.raises(OnCurveError):
            figure_eight.face_of(0j)

    def test_assign_points(self, figure_eight):
        g = figure_eight
        out = g.assign_points([1 + 0j, -1 + 0j, 10 + 0j])
        assert out[0] != out[1]
        assert out[2] == g.unbounded_face().index


class TestSimpleCurves:
    def test_unit_circle(self):
        r = RationalMap(Poly([0, 1]), Poly([1]))
        g = build_graph(trace(r, 1.0, grid_n=256))
        assert (g.vertex_count, g.edge_count, g.face_count) == (0, 1, 2)
        inner = g.faces[g.face_of(0j)]
        assert inner.bounded and inner.color == SUBLEVEL
        # the sublevel side is kept on the left, so the bounded face
        # traverses the circle forward
        assert inner.boundary == ((0, True),)
        assert g.unbounded_face().boundary == ((0, False),)

    def test_pole_inverts_sides(self):
        # r = 1/z puts the superlevel side inside the circle
        r = RationalMap(Poly([1]), Poly([0, 1]))
        g = build_graph(trace(r, 1.0, grid_n=256))
        inner = g.faces[g.face_of(0j)]
        assert inner.bounded and inner.color == SUPERLEVEL
        assert g.unbounded_face().color == SUBLEVEL

    def test_two_ovals(self):
        r = RationalMap(Poly([-9, 0, 1]), Poly([8]))
        g = build_graph(trace(r, 1.0, grid_n=512))
        assert (g.vertex_count, g.edge_count, g.face_count) == (0, 2, 3)
        assert g.unbounded_face().boundary_component_count == 2
        assert g.face_of(3 + 0j) != g.face_of(-3 + 0j)

    def test_three_ovals(self):
        r = RationalMap(Poly([0, -1, 0, 1]), Poly([1]))  # z^3 - z
        g = build_graph(trace(r, 0.2, grid_n=512))
        assert (g.vertex_count, g.edge_count, g.face_count) == (0, 3, 4)
        assert g.unbounded_face().boundary_component_count == 3
        homes = {g.face_of(z) for z in (-1 + 0j, 0j, 1 + 0j)}
        assert len(homes) == 3

    def test_double_vertex_level(self):
        # both critical points of z^3 - z share the critical modulus,
        # so the level set through them carries two degree-4 vertices
        r = RationalMap(Poly([0, -1, 0, 1]), Poly([1]))
        c = 2 / (3 * np.sqrt(3))
        g = build_graph(trace(r, c, grid_n=512))
        assert (g.vertex_count, g.edge_count, g.face_count) == (2, 4, 4)
        assert all(d == 4 for _, d in g.vertices)
        assert sum(1 for f in g.faces if f.bounded) == 3


def _arc(a: complex, b: complex, bulge: float, n: int = 80) -> PolylineCurve:
    t = np.linspace(0.0, 1.0, n)
    pts = a + t * (b - a) + 1j * bulge * np.sin(np.pi * t)
    return PolylineCurve(pts, closed=False)


class TestViolations:
    def test_theta_graph_rejected(self):
        # three edges between two vertices: degree 3 is not a level-set
        # degree, construction must refuse
        edges = [
            TraceEdge(_arc(-1, 1, 0.8), 0, 1),
            TraceEdge(_arc(-1, 1, 0.0), 0, 1),
            TraceEdge(_arc(-1, 1, -0.8), 0, 1),
        ]
        tr = TraceResult(edges, [(-1 + 0j, 3), (1 + 0j, 3)], 1.0,
                         (-2.0, 2.0, -2.0, 2.0), 128, None)
        with pytest.raises(GraphError, match="even degree"):
            build_graph(tr)

    def test_declared_degree_mismatch(self):
        edges = [TraceEdge(_arc(-1, 1, 0.8), 0, 1),
                 TraceEdge(_arc(-1, 1, -0.8), 0, 1)]
        tr = TraceResult(edges, [(-1 + 0j, 4), (1 + 0j, 4)], 1.0,
                         (-2.0, 2.0, -2.0, 2.0), 128, None)
        with pytest.raises(GraphError, match="declares degree"):
            build_graph(tr)

    def test_dangling_arc_rejected(self):
        # an open arc inside a circle has the same face on both sides
        circle = circle_curve(0j, 1.5, 400)
        edges = [TraceEdge(circle),
                 TraceEdge(_arc(-0.5, 0.5, 0.3))]
        tr = TraceResult(edges, [], 1.0, (-2.0, 2.0, -2.0, 2.0), 256, None)
        with pytest.raises(GraphError, match="same face on both sides"):
            build_graph(tr)

    def test_duplicate_curve_fails_euler(self):
        circle = circle_curve(0j, 1.0, 400)
        edges = [TraceEdge(circle), TraceEdge(circle)]
        tr = TraceResult(edges, [], 1.0, (-2.0, 2.0, -2.0, 2.0), 256, None)
        with pytest.raises(GraphError, match="Euler"):
            build_graph(tr)

    def test_no_edges_rejected(self):
        tr = TraceResult([], [], 1.0, (-2.0, 2.0, -2.0, 2.0), 128, None)
        with pytest.raises(GraphError):
            build_graph(tr)


class TestAuditAcrossMaps:
    @pytest.mark.parametrize("num,den,c", [
        ([0, 1], [1], 2.5),
        ([-1, 0, 1], [1], 0.5),
        ([-1, 0, 1], [1], 3.0),
        ([1, 0, 1], [0, 1], 2.5),        # z + 1/z
        ([-4, 0, 0, 1], [1], 4.0),       # z^3 - 4
        ([1], [0, 0, 1], 1.0),           # 1/z^2
    ])
    def test_invariants_hold(self, num, den, c):
        # build_graph raises on any violated invariant, so a clean
        # build is itself the audit
        r = RationalMap(Poly(num), Poly(den))
        g = build_graph(trace(r, c, grid_n=256))
        assert g.face_count >= 2
        assert sum(1 for f in g.faces if not f.bounded) == 1
        for _, d in g.vertices:
            assert d % 2 == 0 and d >= 4
