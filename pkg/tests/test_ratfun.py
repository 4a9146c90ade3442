"""Polynomial and rational-map core: frozen hand values plus properties."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lemkit.errors import (
    EvaluationError,
    PolynomialError,
    RationalMapError,
)
from lemkit.ratfun import (
    INF,
    Multiset,
    Poly,
    RationalMap,
    chordal,
    critical_points,
    critical_values,
    is_inf,
    poly_eval,
    poly_roots,
    rat_eval,
    zeros_poles,
)


class TestPolyEval:
    def test_hand_expanded_cubic(self):
        # (z-1)(z-2)(z-3) expanded by hand: z^3 - 6z^2 + 11z - 6
        p = Poly([-6, 11, -6, 1])
        assert poly_eval(p, 4.0) == pytest.approx(6.0)

    def test_matches_numpy_polyval_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            coeffs = rng.normal(size=5) + 1j * rng.normal(size=5)
            z = rng.normal(size=11) + 1j * rng.normal(size=11)
            p = Poly(coeffs)
            expected = np.polyval(coeffs[::-1], z)
            got = poly_eval(p, z)
            assert np.max(np.abs(got - expected)) <= 1e-12 * np.max(
                1.0 + np.abs(expected)
            )

    def test_degree_bookkeeping(self):
        assert Poly([0.0]).degree == -1
        assert Poly([3.0]).degree == 0
        assert Poly([1.0, 0.0, 0.0]).degree == 0  # trailing zeros stripped
        assert Poly([0, 1]).degree == 1

    def test_derivative(self):
        p = Poly([-6, 11, -6, 1])
        dp = p.deriv()
        assert np.allclose(dp.coeffs, [11, -12, 3])


class TestPolyRoots:
    def test_distinct_roots_recovered(self):
        p = Poly([-6, 11, -6, 1])
        ms = poly_roots(p)
        got = sorted(ms.expand(), key=lambda z: z.real)
        for g, want in zip(got, [1.0, 2.0, 3.0]):
            assert abs(g - want) <= 1e-10

    def test_triple_root_clusters(self):
        ms = poly_roots(Poly([0, 0, 0, 1]))
        assert len(ms) == 1
        (z, m), = ms.entries
        assert m == 3 and abs(z) <= 1e-8

    def test_double_root_exact_coefficients(self):
        # (z-2)^2 = z^2 - 4z + 4
        ms = poly_roots(Poly([4, -4, 1]))
        assert ms.total == 2
        assert ms.multiplicity_at(2.0 + 0j) == 2

    def test_degree_one(self):
        ms = poly_roots(Poly([3, 2]))
        assert ms.entries == (((-1.5 + 0j), 1),)

    def test_zero_polynomial_rejected(self):
        with pytest.raises(PolynomialError):
            poly_roots(Poly([0.0]))

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(
            st.tuples(st.integers(-6, 6), st.integers(-6, 6)),
            min_size=2,
            max_size=12,
            unique=True,
        )
    )
    def test_roots_reexpand_to_coefficients(self, lattice):
        # well-separated roots on an integer lattice round-trip
        roots = [complex(a, b) for a, b in lattice]
        p = Poly.from_roots(roots)
        ms = poly_roots(p)
        assert ms.total == len(roots)
        back = Poly.from_roots(ms.expand())
        scale = np.max(np.abs(p.coeffs))
        assert np.max(np.abs(back.coeffs - p.coeffs)) <= 1e-8 * scale


class TestSphere:
    def test_chordal_basic(self):
        assert chordal(INF, INF) == 0.0
        assert chordal(0j, INF) == pytest.approx(2.0)
        assert chordal(1 + 0j, INF) == pytest.approx(2 / math.sqrt(2))
        assert chordal(0j, 1 + 0j) == pytest.approx(2 / math.sqrt(2))

    def test_chordal_symmetry_and_identity(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=6) + 1j * rng.normal(size=6)
        for a in pts:
            assert chordal(a, a) == 0.0
            for b in pts:
                assert chordal(a, b) == pytest.approx(chordal(b, a))
                assert chordal(a, b) <= 2.0 + 1e-15

    def test_is_inf(self):
        assert is_inf(INF)
        assert is_inf(complex(math.inf, 0.0))
        assert not is_inf(1e300 + 0j)


class TestRationalMap:
    def test_eval_at_pole_and_infinity(self):
        r = RationalMap(Poly([1]), Poly([0, 1]))  # 1/z
        assert is_inf(rat_eval(r, 0j))
        assert rat_eval(r, INF) == 0.0
        r2 = RationalMap(Poly([-1, 0, 1]), Poly([1]))  # z^2 - 1
        assert is_inf(rat_eval(r2, INF))
        assert rat_eval(r2, 2.0 + 0j) == pytest.approx(3.0)

    def test_equal_degree_value_at_inf(self):
        r = RationalMap(Poly([1, 2]), Poly([3, 1]))  # (2z+1)/(z+3)
        assert rat_eval(r, INF) == pytest.approx(2.0)

    def test_unreduced_rejected(self):
        with pytest.raises(RationalMapError):
            RationalMap(Poly.from_roots([1.0, 2.0]), Poly.from_roots([2.0, 5.0]))

    def test_degree_zero_rejected(self):
        with pytest.raises(RationalMapError):
            RationalMap(Poly([2.0]), Poly([1.0]))

    def test_indeterminate_eval(self):
        # bypass the construction guard to exercise the 0/0 error
        r = RationalMap.__new__(RationalMap)
        r.num = Poly([0, 1])
        r.den = Poly([0, 1])
        with pytest.raises(EvaluationError):
            rat_eval(r, 0j)


class TestCriticalStructure:
    def test_joukowski_critical_points(self):
        # r = z + 1/z: r' = 1 - 1/z^2 vanishes at z = +-1, values -+2
        r = RationalMap(Poly([1, 0, 1]), Poly([0, 1]))
        cps = critical_points(r)
        assert cps.multiplicity_at(1 + 0j) == 1
        assert cps.multiplicity_at(-1 + 0j) == 1
        cvs = critical_values(r)
        assert cvs.multiplicity_at(2 + 0j) == 1
        assert cvs.multiplicity_at(-2 + 0j) == 1

    def test_parabola_critical_points_include_infinity(self):
        r = RationalMap(Poly([-1, 0, 1]), Poly([1]))
        cps = critical_points(r)
        assert cps.multiplicity_at(0j) == 1
        assert cps.multiplicity_at(INF) == 1
        assert cps.total == 2 * r.degree - 2
        cvs = critical_values(r)
        assert cvs.multiplicity_at(-1 + 0j) == 1
        assert cvs.multiplicity_at(INF) == 1

    def test_degree_one_map_has_no_critical_points(self):
        r = RationalMap(Poly([0, 1]), Poly([1]))
        assert critical_points(r).total == 0

    def test_total_always_2d_minus_2(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            num = rng.normal(size=4) + 1j * rng.normal(size=4)
            den = rng.normal(size=3) + 1j * rng.normal(size=3)
            try:
                r = RationalMap(Poly(num), Poly(den))
            except RationalMapError:
                continue
            assert critical_points(r).total == 2 * r.degree - 2

    def test_critical_values_invariant_under_domain_rotation(self):
        # replacing r(z) by r(e^{ia} z) permutes critical points but
        # leaves the critical value set unchanged
        r = RationalMap(Poly([-1, 0, 1]), Poly([1]))
        a = 0.7
        rot = np.exp(1j * a)
        num2 = Poly(r.num.coeffs * rot ** np.arange(r.num.coeffs.size))
        den2 = Poly(r.den.coeffs * rot ** np.arange(r.den.coeffs.size))
        r2 = RationalMap(num2, den2)
        v1 = critical_values(r)
        v2 = critical_values(r2)
        assert len(v1) == len(v2)
        for p, m in v1:
            assert v2.multiplicity_at(p) == m


class TestZerosPoles:
    def test_z_over_z2_minus_4(self):
        r = RationalMap(Poly([0, 1]), Poly([-4, 0, 1]))
        zs, ps = zeros_poles(r)
        assert zs.multiplicity_at(0j) == 1
        assert zs.multiplicity_at(INF) == 1
        assert ps.multiplicity_at(2 + 0j) == 1
        assert ps.multiplicity_at(-2 + 0j) == 1
        assert zs.total == ps.total == r.degree

    def test_polynomial_poles_all_at_infinity(self):
        r = RationalMap(Poly([-1, 0, 1]), Poly([1]))
        zs, ps = zeros_poles(r)
        assert ps.entries == ((INF, 2),)
        assert zs.multiplicity_at(1 + 0j) == 1
        assert zs.multiplicity_at(-1 + 0j) == 1

    def test_multiset_validation(self):
        with pytest.raises(ValueError):
            Multiset(((0j, 0),))
