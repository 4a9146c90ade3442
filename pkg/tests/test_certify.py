"""Certification, Jordan criterion, and branch-count audit tests.

Monte Carlo verdicts are exercised on level sets whose harmonic
measures are known by symmetry or by the argument principle, including
a map whose level set bounds a genuinely multiply connected face.
"""

import math

import numpy as np
import pytest

from lemkit.certify import (
    CertReport,
    certify_polynomial,
    certify_rational,
    find_separating_curve,
    jordan_criterion,
    riemann_hurwitz_audit,
)
from lemkit.curves import winding_number
from lemkit.errors import OnCurveError, RefusalError
from lemkit.lemgraph import build_graph
from lemkit.ratfun import INF, Multiset, Poly, RationalMap
from lemkit.tracer import trace

IDENTITY = RationalMap(Poly([0, 1]), Poly([1]))
BERNOULLI = RationalMap(Poly([-1, 0, 1]), Poly([1]))
# Pole at 0 and zeros near it produce nested level loops at level 1.5:
# a small superlevel disk, a sublevel annulus, and the unbounded face.
ANNULUS_MAP = RationalMap(Poly([-0.1, 0, 1]), Poly([0, 1]))
TWO_OVALS = RationalMap(Poly([-9, 0, 1]), Poly([1]))


@pytest.fixture(scope="module")
def circle_graph():
    return build_graph(trace(IDENTITY, 1.0, grid_n=512))


@pytest.fixture(scope="module")
def bernoulli2_graph():
    return build_graph(trace(BERNOULLI, 2.0, grid_n=512))


@pytest.fixture(scope="module")
def annulus_graph():
    return build_graph(trace(ANNULUS_MAP, 1.5, grid_n=1024))


def _max_z_score(report: CertReport) -> float:
    scores = [row.value / row.sigma
              for row in report.condition2 if row.sigma > 0]
    return max(scores)


class TestCertifyRational:
    def test_circle_consistent(self, circle_graph):
        pts = Multiset(((0j, 1), (INF, 1)))
        report = certify_rational(circle_graph, pts, levels=2,
                                  walkers=30_000, seed=3)
        assert report.ok
        assert report.mode == "rational"
        assert len(report.condition2) == 7  # one edge, arcs 1 + 2 + 4
        assert len(report.condition3) == 2  # two faces, one component each
        assert all(row.ok for row in report.condition3)
        assert report.condition1["face_count"] == 2
        assert not report.witnesses

    def test_bernoulli_full_consistent(self, bernoulli2_graph):
        pts = Multiset((((-1 + 0j), 1), ((1 + 0j), 1), (INF, 2)))
        report = certify_rational(bernoulli2_graph, pts, levels=2,
                                  walkers=40_000, seed=9)
        assert report.ok
        edges_seen = {row.edge for row in report.condition2}
        assert edges_seen == {0}
        pairs_seen = {(row.face, row.component) for row in report.condition3}
        assert len(pairs_seen) == 2

    def test_withheld_zero_violated(self, bernoulli2_graph):
        pts = Multiset((((1 + 0j), 1), (INF, 2)))
        report = certify_rational(bernoulli2_graph, pts, levels=2,
                                  walkers=20_000, seed=9)
        assert report.verdict == "violated"
        assert any("edge" in w for w in report.witnesses)
        level0 = [row for row in report.condition2 if row.level == 0]
        assert level0[0].value == pytest.approx(1.0, abs=0.01)
        assert _max_z_score(report) >= 5.0

    def test_annulus_consistent(self, annulus_graph):
        s = math.sqrt(0.1)
        pts = Multiset(((complex(-s), 1), (complex(s), 1),
                        (0j, 1), (INF, 1)))
        report = certify_rational(annulus_graph, pts, levels=2,
                                  walkers=40_000, seed=5)
        assert report.ok
        assert len(report.condition2) == 14  # two edges
        by_face: dict = {}
        for row in report.condition3:
            by_face.setdefault(row.face, []).append(row)
        assert sorted(len(v) for v in by_face.values()) == [1, 1, 2]
        for row in report.condition3:
            assert row.report.nearest == 1

    def test_point_on_curve_rejected(self, circle_graph):
        on_curve = complex(circle_graph.edges[0].curve.points[0])
        pts = Multiset(((on_curve, 1), (INF, 1)))
        with pytest.raises(OnCurveError):
            certify_rational(circle_graph, pts, levels=0, walkers=1000)


class TestCertifyPolynomial:
    def test_bernoulli_consistent(self, bernoulli2_graph):
        pts = Multiset((((-1 + 0j), 1), ((1 + 0j), 1)))
        report = certify_polynomial(bernoulli2_graph, pts, levels=2,
                                    walkers=40_000, seed=2)
        assert report.ok
        assert report.mode == "polynomial"
        assert report.condition1["total_point_count"] == 2
        assert len(report.condition3) == 1
        assert report.condition3[0].report.nearest == 2

    def test_circle_consistent(self, circle_graph):
        pts = Multiset(((0j, 1),))
        report = certify_polynomial(circle_graph, pts, levels=2,
                                    walkers=30_000, seed=4)
        assert report.ok
        assert report.condition3[0].report.nearest == 1

    def test_wrong_single_point_violated(self, bernoulli2_graph):
        # One point cannot reproduce the measure of a two-zero curve.
        pts = Multiset((((1 + 0j), 1),))
        report = certify_polynomial(bernoulli2_graph, pts, levels=2,
                                    walkers=20_000, seed=8)
        assert report.verdict == "violated"
        assert _max_z_score(report) >= 5.0

    def test_point_in_unbounded_face_refused(self, circle_graph):
        pts = Multiset(((3 + 0j, 1),))
        with pytest.raises(RefusalError) as exc:
            certify_polynomial(circle_graph, pts, levels=0, walkers=1000)
        assert exc.value.condition == "points-in-bounded-faces"

    def test_multiply_connected_face_refused(self, annulus_graph):
        s = math.sqrt(0.1)
        pts = Multiset(((complex(-s), 1), (complex(s), 1)))
        with pytest.raises(RefusalError) as exc:
            certify_polynomial(annulus_graph, pts, levels=0, walkers=1000)
        assert exc.value.condition == "simply-connected-faces"


class TestJordanCriterion:
    def test_identity_jordan(self):
        report = jordan_criterion(IDENTITY)
        assert report.verdict == "jordan"
        assert report.is_jordan is True
        assert (report.inside_count, report.outside_count) == (0, 0)
        assert report.witness_kind == "level-set"
        assert winding_number(report.witness, 0j) == 1

    def test_halved_bernoulli_jordan(self):
        r = RationalMap(Poly([-0.5, 0, 0.5]), Poly([1]))
        report = jordan_criterion(r)
        assert report.verdict == "jordan"
        assert (report.inside_count, report.outside_count) == (1, 1)
        assert report.witness_kind == "level-set"
        vals = np.abs(r(report.witness.points))
        assert np.all(vals <= 1 + 1e-9)
        assert winding_number(report.witness, 1 + 0j) == 1
        assert winding_number(report.witness, -1 + 0j) == 1

    def test_bernoulli_boundary_critical(self):
        report = jordan_criterion(BERNOULLI)
        assert report.verdict == "not-jordan"
        assert report.is_jordan is False
        assert len(report.boundary_values) == 1
        assert report.boundary_values[0] == pytest.approx(-1 + 0j)
        assert "level circle" in report.reason

    def test_two_ovals_not_jordan(self):
        r = RationalMap(Poly([-9 / 8, 0, 1 / 8]), Poly([1]))
        report = jordan_criterion(r)
        assert report.verdict == "not-jordan"
        assert not report.boundary_values
        assert (report.inside_count, report.outside_count) == (0, 2)

    def test_level_rescaling_matches(self):
        assert jordan_criterion(TWO_OVALS, c=8.0).verdict == "not-jordan"
        report = jordan_criterion(BERNOULLI, c=2.0)
        assert report.verdict == "jordan"
        assert report.level == 2.0

    def test_small_modulus_at_infinity_refused(self):
        inv = RationalMap(Poly([1]), Poly([0, 1]))
        with pytest.raises(RefusalError) as exc:
            jordan_criterion(inv)
        assert exc.value.condition == "modulus-at-infinity"

    def test_unit_modulus_at_infinity_refused(self):
        r = RationalMap(Poly([1, 2]), Poly([-1, 2]))
        with pytest.raises(RefusalError):
            jordan_criterion(r)

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            jordan_criterion(IDENTITY, c=0.0)
        with pytest.raises(ValueError):
            jordan_criterion(IDENTITY, c=-2.0)

    def test_separating_circle_without_level_set(self):
        found = find_separating_curve(IDENTITY, include_level_set=False)
        assert found is not None
        curve, kind = found
        assert kind == "circle"
        assert winding_number(curve, 0j) == 1
        assert np.max(np.abs(curve.points)) <= 1 + 1e-9

    def test_no_separating_curve_for_figure_eight(self):
        # At level 1 the Bernoulli lemniscate pinches; no Jordan curve of
        # modulus at most 1 encloses both zeros.
        assert find_separating_curve(BERNOULLI,
                                     include_level_set=False) is None


class TestRiemannHurwitzAudit:
    def test_identity_faces(self, circle_graph):
        for face in circle_graph.faces:
            m, rhs = riemann_hurwitz_audit(IDENTITY, circle_graph, face.index)
            assert m == rhs == 0

    def test_bernoulli_level_two_faces(self, bernoulli2_graph):
        for face in bernoulli2_graph.faces:
            m, rhs = riemann_hurwitz_audit(BERNOULLI, bernoulli2_graph,
                                           face.index)
            assert m == rhs == 1

    def test_annulus_faces(self, annulus_graph):
        results = {}
        for face in annulus_graph.faces:
            m, rhs = riemann_hurwitz_audit(ANNULUS_MAP, annulus_graph,
                                           face.index)
            assert m == rhs
            results[face.index] = m
        # Both critical points of z - 0.1/z sit inside the annulus face.
        assert sorted(results.values()) == [0, 0, 2]

    def test_two_ovals_faces(self):
        graph = build_graph(trace(TWO_OVALS, 8.0, grid_n=512))
        values = []
        for face in graph.faces:
            m, rhs = riemann_hurwitz_audit(TWO_OVALS, graph, face.index)
            assert m == rhs
            values.append(m)
        # Ovals carry no branching; the doubly connected unbounded face
        # absorbs both critical points (one finite, one at infinity).
        assert sorted(values) == [0, 0, 2]
