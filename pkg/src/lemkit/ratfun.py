"""Polynomials and rational maps on the Riemann sphere.

Points on the sphere are plain complex numbers plus one distinguished
value INF for the point at infinity; is_inf() recognises any non-finite
complex as INF.  Root sets, zero/pole sets and critical sets are carried
as Multisets: tuples of (point, multiplicity) whose representatives are
pairwise separated.

Root finding uses simultaneous Aberth-Ehrlich iteration followed by a
greedy radius clustering that merges numerically coincident iterates
into one representative with a multiplicity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    EvaluationError,
    PolynomialError,
    RationalMapError,
    RootFindingError,
)

INF = complex(math.inf, math.inf)

# Relative threshold below which a leading coefficient produced by
# polynomial arithmetic is treated as an exact cancellation.
_TRIM_REL = 1e-12


def is_inf(z: complex) -> bool:
    """True when z represents the point at infinity."""
    return not (math.isfinite(z.real) and math.isfinite(z.imag))


def chordal(a: complex, b: complex) -> float:
    """Chordal metric on the sphere; INF is a genuine point."""
    ai, bi = is_inf(a), is_inf(b)
    if ai and bi:
        return 0.0
    if ai:
        return 2.0 / math.sqrt(1.0 + abs(b) ** 2)
    if bi:
        return 2.0 / math.sqrt(1.0 + abs(a) ** 2)
    return 2.0 * abs(a - b) / math.sqrt((1.0 + abs(a) ** 2) * (1.0 + abs(b) ** 2))


class Poly:
    """Polynomial with complex coefficients in ascending order.

    The zero polynomial has degree -1 and is only valid as an
    intermediate arithmetic result, never as a rational-map numerator
    or denominator.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs, trim_relative=False):
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim != 1:
            raise PolynomialError("coefficients must be a 1-d sequence")
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(c.view(float))):
            raise PolynomialError("coefficients must be finite")
        if trim_relative and c.size > 1:
            scale = np.max(np.abs(c))
            if scale > 0.0:
                keep = np.nonzero(np.abs(c) > _TRIM_REL * scale)[0]
                c = c[: keep[-1] + 1] if keep.size else c[:1] * 0.0
        # always strip exactly-zero leading coefficients
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)
        self.coeffs = c

    @property
    def degree(self) -> int:
        if self.coeffs.size == 1 and self.coeffs[0] == 0:
            return -1
        return self.coeffs.size - 1

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def __call__(self, z):
        return poly_eval(self, z)

    def deriv(self) -> "Poly":
        if self.coeffs.size == 1:
            return Poly([0.0])
        k = np.arange(1, self.coeffs.size)
        return Poly(self.coeffs[1:] * k)

    def __mul__(self, other):
        if isinstance(other, Poly):
            return Poly(np.convolve(self.coeffs, other.coeffs), trim_relative=True)
        return Poly(self.coeffs * other)

    def __add__(self, other: "Poly") -> "Poly":
        n = max(self.coeffs.size, other.coeffs.size)
        a = np.zeros(n, dtype=complex)
        a[: self.coeffs.size] = self.coeffs
        a[: other.coeffs.size] += other.coeffs
        return Poly(a, trim_relative=True)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (other * (-1.0))

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"

    @staticmethod
    def from_roots(roots, lead=1.0) -> "Poly":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.convolve(c, np.array([-r, 1.0], dtype=complex))
        return Poly(c)


def poly_eval(p: Poly, z):
    """Horner evaluation; accepts scalars or numpy arrays."""
    zs = np.asarray(z, dtype=complex)
    acc = np.full(zs.shape, p.coeffs[-1], dtype=complex)
    for c in p.coeffs[-2::-1]:
        acc = acc * zs + c
    if np.ndim(z) == 0:
        return complex(acc)
    return acc


def _eval_scale(p: Poly, z):
    """Sum_k |a_k| |z|^k, the natural magnitude scale of an evaluation."""
    za = np.abs(np.asarray(z, dtype=complex))
    acc = np.full(za.shape, abs(p.coeffs[-1]), dtype=float)
    for c in p.coeffs[-2::-1]:
        acc = acc * za + abs(c)
    return acc


@dataclass(frozen=True)
class Multiset:
    """Points with integer multiplicities; INF allowed as a point."""

    entries: tuple

    def __post_init__(self):
        for _, m in self.entries:
            if m < 1:
                raise ValueError("multiplicities must be positive")

    @property
    def total(self) -> int:
        return sum(m for _, m in self.entries)

    def points(self):
        return [p for p, _ in self.entries]

    def expand(self):
        out = []
        for p, m in self.entries:
            out.extend([p] * m)
        return out

    def finite_entries(self):
        return [(p, m) for p, m in self.entries if not is_inf(p)]

    def multiplicity_at(self, z: complex, tol: float = 1e-7) -> int:
        for p, m in self.entries:
            if chordal(p, z) <= tol:
                return m
        return 0

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def _cluster(points: np.ndarray, radius: np.ndarray) -> list:
    """Greedy radius clustering; returns (mean, count) per cluster.

    radius is per-point; two points merge when either's radius reaches
    the other.  Iterates until representatives are pairwise separated.
    """
    pts = list(zip(points.tolist(), radius.tolist(), [1] * len(points)))
    changed = True
    while changed:
        changed = False
        out = []
        used = [False] * len(pts)
        order = sorted(range(len(pts)), key=lambda i: (pts[i][0].real, pts[i][0].imag))
        for i in order:
            if used[i]:
                continue
            zi, ri, mi = pts[i]
            acc_z, acc_m, acc_r = zi * mi, mi, ri
            used[i] = True
            for j in order:
                if used[j]:
                    continue
                zj, rj, mj = pts[j]
                if abs(zi - zj) <= max(ri, rj):
                    acc_z += zj * mj
                    acc_m += mj
                    acc_r = max(acc_r, rj)
                    used[j] = True
                    changed = True
            out.append((acc_z / acc_m, acc_r, acc_m))
        pts = out
    return [(z, m) for z, _, m in pts]


def poly_roots(
    p: Poly,
    tol: float = 1e-10,
    cluster_tol: float = 1e-8,
    max_iter: int = 500,
) -> Multiset:
    """All roots of p as a Multiset, via Aberth-Ehrlich iteration.

    Residual contract: every representative z satisfies
    |p(z)| <= tol * max(max_k |a_k|, sum_k |a_k| |z|^k).
    """
    n = p.degree
    if n < 0:
        raise PolynomialError("zero polynomial has no root set")
    if n == 0:
        return Multiset(())
    a = p.coeffs / p.coeffs[-1]
    if n == 1:
        return Multiset(((complex(-a[0]), 1),))
    mono = Poly(a)
    dmono = mono.deriv()

    cauchy = 1.0 + float(np.max(np.abs(a[:-1])))
    gm = abs(a[0]) ** (1.0 / n) if a[0] != 0 else 0.0
    r0 = gm if gm > 1e-8 * cauchy else 0.5 * cauchy
    k = np.arange(n)
    z = r0 * np.exp(2j * np.pi * (k + 0.25) / n + 0.7391j)

    steps = np.zeros(n)
    eps = np.finfo(float).eps
    converged = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        pv = poly_eval(mono, z)
        dv = poly_eval(dmono, z)
        bad = dv == 0
        if np.any(bad):
            z = np.where(bad, z * (1.0 + 1e-8) + 1e-12, z)
            pv = poly_eval(mono, z)
            dv = poly_eval(dmono, z)
        newton = pv / dv
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        s = (1.0 / diff).sum(axis=1) - 1.0
        w = newton / (1.0 - newton * s)
        w = np.where(converged, 0.0, w)
        if not np.all(np.isfinite(w.view(float))):
            raise RootFindingError(
                "iteration diverged", iterates=z, residuals=np.abs(pv)
            )
        z = z - w
        steps = np.where(converged, steps, np.abs(w))
        resid_floor = 8.0 * eps * _eval_scale(mono, z)
        pv2 = poly_eval(mono, z)
        converged = (np.abs(w) <= 1e-13 * (1.0 + np.abs(z))) | (
            np.abs(pv2) <= resid_floor
        )
        if np.all(converged):
            break
    else:
        raise RootFindingError(
            "no convergence within iteration cap",
            iterates=z,
            residuals=np.abs(poly_eval(mono, z)),
        )

    scale = max(1.0, float(np.max(np.abs(z))))
    radius = np.maximum(cluster_tol * scale, 20.0 * steps)
    clusters = _cluster(z, radius)

    coeff_scale = float(np.max(np.abs(mono.coeffs)))
    for rep, _ in clusters:
        bound = tol * max(coeff_scale, float(_eval_scale(mono, rep)))
        if abs(poly_eval(mono, rep)) > bound:
            raise RootFindingError(
                f"residual {abs(poly_eval(mono, rep)):.3e} above bound {bound:.3e}",
                iterates=z,
                residuals=np.abs(poly_eval(mono, z)),
            )
    return Multiset(tuple(sorted(clusters, key=lambda e: (e[0].real, e[0].imag))))


class RationalMap:
    """Reduced rational map num/den of positive degree."""

    def __init__(self, num: Poly, den: Poly):
        if not isinstance(num, Poly):
            num = Poly(num)
        if not isinstance(den, Poly):
            den = Poly(den)
        if den.degree < 0:
            raise RationalMapError("denominator is the zero polynomial")
        if num.degree < 0:
            raise RationalMapError("numerator is the zero polynomial")
        self.num = num
        self.den = den
        if self.degree < 1:
            raise RationalMapError("map must have degree at least 1")
        self._check_reduced()

    def _check_reduced(self):
        if self.num.degree < 1 or self.den.degree < 1:
            return
        zn = poly_roots(self.num)
        zd = poly_roots(self.den)
        scale = max(
            [1.0]
            + [abs(z) for z in zn.points() if not is_inf(z)]
            + [abs(z) for z in zd.points() if not is_inf(z)]
        )
        for a in zn.points():
            for b in zd.points():
                if abs(a - b) <= 1e-7 * scale:
                    raise RationalMapError(
                        f"numerator and denominator share a root near {a}"
                    )

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    def __call__(self, z):
        if np.ndim(z) == 0:
            return rat_eval(self, z)
        return rat_eval_array(self, z)

    def scaled(self, factor: complex) -> "RationalMap":
        """The map factor * r, as a new reduced rational map."""
        return RationalMap(self.num * factor, self.den)

    def value_at_inf(self) -> complex:
        dn, dd = self.num.degree, self.den.degree
        if dn > dd:
            return INF
        if dn < dd:
            return 0.0
        return self.num.lead / self.den.lead

    @cached_property
    def zeros(self) -> Multiset:
        entries = list(poly_roots(self.num).entries) if self.num.degree >= 1 else []
        deficit = self.degree - self.num.degree
        if deficit > 0:
            entries.append((INF, deficit))
        return Multiset(tuple(entries))

    @cached_property
    def poles(self) -> Multiset:
        entries = list(poly_roots(self.den).entries) if self.den.degree >= 1 else []
        deficit = self.degree - self.den.degree
        if deficit > 0:
            entries.append((INF, deficit))
        return Multiset(tuple(entries))

    @cached_property
    def wronskian(self) -> Poly:
        return self.num.deriv() * self.den - self.num * self.den.deriv()

    def log_deriv(self, z: np.ndarray) -> np.ndarray:
        """r'/r evaluated elementwise (num'/num - den'/den)."""
        zn = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return poly_eval(self.num.deriv(), zn) / poly_eval(self.num, zn) - poly_eval(
                self.den.deriv(), zn
            ) / poly_eval(self.den, zn)

    def log_abs(self, z: np.ndarray) -> np.ndarray:
        """log|r(z)| elementwise, with -inf at zeros and +inf at poles."""
        zn = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.abs(poly_eval(self.num, zn))) - np.log(
                np.abs(poly_eval(self.den, zn))
            )


def rat_eval(r: RationalMap, z: complex) -> complex:
    """Evaluate r at a sphere point; returns INF at poles."""
    if is_inf(z):
        return r.value_at_inf()
    nv = poly_eval(r.num, z)
    dv = poly_eval(r.den, z)
    if dv == 0:
        if nv == 0:
            raise EvaluationError(f"indeterminate 0/0 at {z}; map is unreduced")
        return INF
    with np.errstate(over="ignore"):
        w = nv / dv
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        return INF
    return w


def rat_eval_array(r: RationalMap, z: np.ndarray) -> np.ndarray:
    """Vectorised evaluation on finite points; poles come out non-finite."""
    zn = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return poly_eval(r.num, zn) / poly_eval(r.den, zn)


def critical_points(r: RationalMap) -> Multiset:
    """Critical points of r on the sphere, with multiplicities.

    Finite ones are the roots of num'*den - num*den'; the point at
    infinity absorbs whatever is missing from the full count 2*deg - 2.
    """
    w = r.wronskian
    target = 2 * r.degree - 2
    entries = []
    finite_total = 0
    if w.degree >= 1:
        finite = poly_roots(w)
        entries = list(finite.entries)
        finite_total = finite.total
    elif w.degree < 0:
        raise RationalMapError("constant map has no critical structure")
    inf_mult = target - finite_total
    if inf_mult < 0:
        raise RationalMapError("critical count exceeds 2*degree - 2; map unreduced?")
    if inf_mult > 0:
        entries.append((INF, inf_mult))
    return Multiset(tuple(entries))


def critical_values(r: RationalMap) -> Multiset:
    """Images of the critical points, merged when they collide."""
    cps = critical_points(r)
    finite_vals = []
    inf_mult = 0
    for p, m in cps:
        v = rat_eval(r, p)
        if is_inf(v):
            inf_mult += m
        else:
            finite_vals.append((v, m))
    entries = []
    if finite_vals:
        merged = {}
        reps = []
        for v, m in finite_vals:
            placed = False
            for i, rep in enumerate(reps):
                if abs(v - rep) <= 1e-7 * (1.0 + abs(rep)):
                    merged[i] += m
                    placed = True
                    break
            if not placed:
                reps.append(v)
                merged[len(reps) - 1] = m
        entries = [(reps[i], merged[i]) for i in range(len(reps))]
        entries.sort(key=lambda e: (e[0].real, e[0].imag))
    if inf_mult:
        entries.append((INF, inf_mult))
    return Multiset(tuple(entries))


def zeros_poles(r: RationalMap):
    """(zeros, poles) of r on the sphere; each totals the degree."""
    return r.zeros, r.poles
