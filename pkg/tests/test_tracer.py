"""Level-set tracing: fidelity, topology, vertex handling, stability."""

import time

import numpy as np
import pytest

from lemkit.errors import NewtonError, TraceError
from lemkit.ratfun import Poly, RationalMap
from lemkit.tracer import (
    TraceResult,
    grid_face_count,
    newton_correct,
    rasterize_cut_cells,
    trace,
)


@pytest.fixture(scope="module")
def identity_map():
    return RationalMap(Poly([0, 1]), Poly([1]))


@pytest.fixture(scope="module")
def parabola():
    return RationalMap(Poly([-1, 0, 1]), Poly([1]))  # z^2 - 1


class TestNewtonCorrect:
    def test_scalar_converges_to_level(self, parabola):
        z = newton_correct(parabola, 2.0, 1.8 + 0j)
        assert abs(abs(z**2 - 1) - 2.0) <= 1e-9 * 2.0
        # the nearby exact solution on the real axis is sqrt(3)
        assert z == pytest.approx(np.sqrt(3), abs=1e-6)

    def test_singular_gradient_raises(self, identity_map):
        # log|z| has a singular gradient at the origin
        with pytest.raises(NewtonError):
            newton_correct(identity_map, 1.0, 0j)

    def test_array_mode_flags_failures(self, identity_map):
        z, ok = newton_correct(identity_map, 1.0, np.array([0.5 + 0j, 0j]))
        assert ok[0] and not ok[1]
        assert abs(abs(z[0]) - 1.0) <= 1e-9


class TestTraceCircle:
    def test_unit_circle_fidelity_and_speed(self, identity_map):
        t0 = time.time()
        tr = trace(identity_map, 1.0, grid_n=512)
        elapsed = time.time() - t0
        assert elapsed < 1.0
        assert len(tr.edges) == 1 and not tr.vertices
        curve = tr.edges[0].curve
        assert curve.closed
        assert np.max(np.abs(np.abs(curve.points) - 1.0)) <= 1e-9

    def test_orientation_sublevel_left(self, identity_map):
        tr = trace(identity_map, 1.0, grid_n=256)
        # sublevel |z| < 1 on the left means counterclockwise
        assert tr.edges[0].curve.signed_area() > 0

    def test_pole_map_orientation(self):
        # r = 1/z: sublevel |r| < 1 is the outside; the circle should
        # then run clockwise
        r = RationalMap(Poly([1]), Poly([0, 1]))
        tr = trace(r, 1.0, grid_n=256)
        assert tr.edges[0].curve.signed_area() < 0

    def test_large_level_circle(self, identity_map):
        tr = trace(identity_map, 100.0, grid_n=256)
        pts = tr.edges[0].curve.points
        assert np.max(np.abs(np.abs(pts) - 100.0)) <= 1e-7 * 100


class TestTraceTopology:
    def test_figure_eight(self, parabola):
        tr = trace(parabola, 1.0, grid_n=512)
        assert len(tr.vertices) == 1
        v, degree = tr.vertices[0]
        assert abs(v) <= 1e-9
        assert degree == 4
        assert len(tr.edges) == 2
        for e in tr.edges:
            assert e.v_start == 0 and e.v_end == 0
            assert not e.curve.closed
        assert grid_face_count(tr) == 3
        assert not tr.warnings

    def test_jordan_level(self, parabola):
        tr = trace(parabola, 2.0, grid_n=512)
        assert len(tr.edges) == 1 and not tr.vertices
        e = tr.edges[0]
        assert e.curve.closed and e.is_loop
        vals = np.abs(parabola.num(e.curve.points))
        assert np.max(np.abs(vals - 2.0)) <= 1e-9 * 2.0
        assert grid_face_count(tr) == 2

    def test_two_ovals(self):
        r = RationalMap(Poly([-9, 0, 1]), Poly([8]))
        tr = trace(r, 1.0, grid_n=512)
        assert len(tr.edges) == 2 and not tr.vertices
        assert all(e.curve.closed for e in tr.edges)
        assert grid_face_count(tr) == 3

    def test_refinement_stability(self, parabola):
        a = trace(parabola, 1.0, grid_n=256)
        b = trace(parabola, 1.0, grid_n=512)
        assert len(a.edges) == len(b.edges)
        assert len(a.vertices) == len(b.vertices)
        assert grid_face_count(a) == grid_face_count(b)

    def test_residual_contract_across_maps(self):
        maps = [
            (RationalMap(Poly([0, 1]), Poly([1])), 1.0),
            (RationalMap(Poly([-1, 0, 1]), Poly([1])), 2.0),
            (RationalMap(Poly([0, -1, 0, 1]), Poly([1])), 1.0),  # z^3 - z
            (RationalMap(Poly([1, 0, 1]), Poly([0, 1])), 3.0),   # z + 1/z
        ]
        for r, c in maps:
            tr = trace(r, c, grid_n=256)
            for e in tr.edges:
                pts = e.curve.points
                interior = pts[1:-1] if not e.curve.closed else pts
                resid = np.abs(np.exp(r.log_abs(interior)) - c)
                assert np.max(resid) <= 1e-8 * c


class TestTraceErrors:
    def test_level_through_infinity_rejected(self):
        # |r(inf)| = 1 puts the level set through the point at infinity
        r = RationalMap(Poly([-1, 1]), Poly([1, 1]))  # (z-1)/(z+1)
        with pytest.raises(TraceError):
            trace(r, 1.0)

    def test_bad_level(self, identity_map):
        with pytest.raises(TraceError):
            trace(identity_map, -2.0)

    def test_explicit_box_must_contain_level(self, identity_map):
        with pytest.raises(TraceError):
            trace(identity_map, 1.0, box=(-0.5, 0.5, -0.5, 0.5))


class TestRasterizer:
    def test_cut_cells_block_flood(self, identity_map):
        tr = trace(identity_map, 1.0, grid_n=128)
        assert grid_face_count(tr) == 2
        cut = rasterize_cut_cells([tr.edges[0].curve], tr.box, 128)
        # the circle band must not be empty and must not fill the grid
        assert 0 < int(cut.sum()) < 128 * 128
