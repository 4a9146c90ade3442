"""Conformal welding of Jordan curves by harmonic-measure matching.

A Jordan curve carries two natural circle parametrizations: by harmonic
measure seen from an interior basepoint, and by harmonic measure seen
from infinity.  Reading the same boundary point in both parametrizations
gives a circle homeomorphism, the welding of the curve.  Both cumulative
measures are estimated by walk-on-spheres over the per-segment partition
of the curve, so every curve vertex receives an inner and an outer angle.

For Jordan lemniscates of a polynomial the outer angle has a closed form
(the exterior uniformization conjugates the polynomial to a pure power),
which serves as the exact oracle for the Monte Carlo welding, and the
welding itself satisfies a functional equation whose residual is checked
here.  A mass-transport probe quantifies how unevenly the welding moves
arc length at a given resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import PolylineCurve, winding_number
from .errors import WeldingError
from .potential import BoundaryArc, harmonic_measure
from .ratfun import INF, Poly
from .rng import derive_seed

# sqrt(ln(2/alpha)/2) at the two-sided 3-sigma level (alpha = 0.0027)
_KS_Z3 = 1.8177


def angle_sup_tolerance(walkers: int, samples: int = 1,
                        floor: float = 1e-2) -> float:
    """Sup-norm tolerance for comparing sampled angle sequences.

    Cumulative angles are rescaled empirical distribution functions, so
    their sup deviation follows Kolmogorov statistics; this sizes the
    3-sigma confidence band for one empirical sequence against an exact
    one (samples=1) or two empirical sequences against each other
    (samples=2), with an absolute floor.  Pointwise 3-sigma bands are
    too narrow for a supremum over hundreds of vertices.
    """
    return max(2.0 * np.pi * _KS_Z3 * math.sqrt(samples / walkers), floor)


@dataclass(frozen=True)
class WeldingSample:
    """Sampled welding homeomorphism of a Jordan curve.

    ``theta_in[j]`` and ``theta_out[j]`` are the inner and outer
    uniformizing angles of curve vertex ``vertex_index[j]``.  Both run
    strictly from 0 at the basepoint (vertex 0) up to exactly 2*pi at
    its wrap-around copy (index ``len(curve)``).  ``sigma_in`` and
    ``sigma_out`` are one-standard-deviation Monte Carlo errors of the
    angles; they vanish at both endpoints, which are pinned.

    ``mass_in`` and ``mass_out`` hold the raw normalized per-segment
    harmonic masses over all ``len(curve)`` segments, before the
    zero-mass merge that builds the strictly increasing angle pairs;
    segments unresolved on one side keep their exact zero there.
    """

    curve: PolylineCurve
    inner_base: complex
    theta_in: np.ndarray
    theta_out: np.ndarray
    sigma_in: np.ndarray
    sigma_out: np.ndarray
    vertex_index: np.ndarray
    walkers: int
    basepoint: int = 0
    mass_in: np.ndarray | None = None
    mass_out: np.ndarray | None = None

    @property
    def pair_count(self) -> int:
        return int(self.theta_in.size)

    def positions(self) -> np.ndarray:
        """Curve vertices the samples sit at (wrap index included)."""
        n = len(self.curve)
        return self.curve.points[np.asarray(self.vertex_index) % n]

    def map_in_to_out(self, theta) -> np.ndarray:
        """Piecewise-linear welding map evaluated at inner angles."""
        t = np.mod(np.asarray(theta, dtype=float), 2.0 * np.pi)
        return np.interp(t, self.theta_in, self.theta_out)

    def map_out_to_in(self, theta) -> np.ndarray:
        """Inverse welding map evaluated at outer angles."""
        t = np.mod(np.asarray(theta, dtype=float), 2.0 * np.pi)
        return np.interp(t, self.theta_out, self.theta_in)


def _segment_arcs(curve: PolylineCurve) -> list[BoundaryArc]:
    a, b = curve.segments()
    return [
        BoundaryArc(f"s{k}", PolylineCurve([a[k], b[k]], closed=False))
        for k in range(a.size)
    ]


def _cumulative(weights: np.ndarray, walkers: int):
    """Normalized cumulative mass at every vertex and its MC error."""
    total = float(weights.sum())
    if total <= 0.0:
        raise WeldingError("no walker reached the curve")
    cum = np.concatenate([[0.0], np.cumsum(weights)]) / total
    cum[-1] = 1.0
    sigma = np.sqrt(np.clip(cum * (1.0 - cum), 0.0, None) / walkers)
    return cum, sigma


def weld(curve: PolylineCurve, inner_base: complex | None = None,
         walkers: int = 100_000, seed: int = 0,
         threads: int = 1) -> WeldingSample:
    """Sample the welding homeomorphism of a Jordan curve.

    The inner angle of a vertex is 2*pi times the harmonic measure, seen
    from ``inner_base``, of the boundary run from the basepoint (vertex
    0) to that vertex; the outer angle is the same with harmonic measure
    seen from infinity, computed in an inverted chart centered at
    ``inner_base``.  Vertices whose adjacent run received no hits on one
    side are merged into the next vertex so both angle sequences stay
    strictly increasing; heavy merging is expected on curves whose two
    harmonic measures concentrate on complementary arcs, so the raw
    per-segment masses are kept on the sample for the singularity probe.
    """
    if not curve.closed:
        raise WeldingError("welding needs a closed curve")
    if not curve.is_simple():
        raise WeldingError("welding needs a Jordan curve; "
                           "this one self-intersects")
    if curve.signed_area() < 0.0:
        curve = curve.reversed()
    if inner_base is None:
        inner_base = complex(curve.points.mean())
    inner_base = complex(inner_base)
    if winding_number(curve, inner_base) != 1:
        raise WeldingError(f"basepoint {inner_base!r} is not inside the curve")

    arcs = _segment_arcs(curve)
    inner = harmonic_measure(arcs, inner_base, walkers=walkers,
                             seed=derive_seed(seed, 0), threads=threads)
    outer = harmonic_measure(arcs, INF, walkers=walkers,
                             seed=derive_seed(seed, 1), threads=threads,
                             transfer=inner_base)

    n_seg = len(arcs)
    w_in = np.array([inner.weights[f"s{k}"] for k in range(n_seg)])
    w_out = np.array([outer.weights[f"s{k}"] for k in range(n_seg)])
    cum_in, sig_in = _cumulative(w_in, walkers)
    cum_out, sig_out = _cumulative(w_out, walkers)
    tau = 2.0 * np.pi
    th_in = tau * cum_in
    th_out = tau * cum_out

    # Keep a vertex only when both angles moved strictly past the last
    # kept vertex; the wrap vertex is always kept, so tail vertices that
    # would tie with it are merged backwards into it.
    kept = [0]
    for j in range(1, n_seg):
        if (th_in[j] > th_in[kept[-1]] and th_out[j] > th_out[kept[-1]]
                and th_in[j] < tau and th_out[j] < tau):
            kept.append(j)
    kept.append(n_seg)
    if len(kept) < 4:
        raise WeldingError("welding sample collapsed; increase walkers")

    idx = np.array(kept)
    return WeldingSample(
        curve=curve,
        inner_base=inner_base,
        theta_in=th_in[idx],
        theta_out=th_out[idx],
        sigma_in=tau * sig_in[idx],
        sigma_out=tau * sig_out[idx],
        vertex_index=idx,
        walkers=walkers,
        mass_in=w_in / w_in.sum(),
        mass_out=w_out / w_out.sum(),
    )


def poly_outer_oracle(p: Poly, curve: PolylineCurve) -> np.ndarray:
    """Exact outer angles on a Jordan polynomial lemniscate.

    On such a curve the exterior uniformizer conjugates ``p`` to a pure
    n-th power, so the outer angle of a vertex is the continuously
    tracked argument of ``p`` there divided by n, pinned to 0 at vertex
    0.  Returns one angle per vertex plus the closing 2*pi entry, matching
    the WeldingSample convention.
    """
    if not curve.closed:
        raise WeldingError("the oracle needs a closed curve")
    n = p.degree
    if n < 1:
        raise WeldingError("the oracle needs a non-constant polynomial")
    vals = np.asarray(p(curve.points), dtype=complex)
    if np.any(vals == 0):
        raise WeldingError("polynomial vanishes on the curve")

    phase = np.angle(vals)
    step = np.diff(phase, append=phase[:1])
    step = np.mod(step + np.pi, 2.0 * np.pi) - np.pi
    if np.any(np.abs(step) >= np.pi * (1.0 - 1e-6)):
        raise WeldingError(
            "argument jump of pi between consecutive vertices; "
            "retrace the curve with more points")
    swept = np.concatenate([[0.0], np.cumsum(step)])
    total = swept[-1]
    want = 2.0 * np.pi * n
    if abs(total - want) > 1e-6 * want:
        raise WeldingError(
            f"argument of p sweeps {total:.6f} along the curve, expected "
            f"{want:.6f}; the curve is not a positively oriented Jordan "
            "lemniscate enclosing every zero")
    theta = swept / n
    theta[-1] = 2.0 * np.pi
    return theta


def functional_equation_residual(p: Poly, curve: PolylineCurve,
                                 welding: WeldingSample) -> float:
    """Sup-norm defect of the lemniscate welding functional equation.

    On a Jordan lemniscate of ``p`` at level c the welding satisfies
    p(vertex)/c = a * exp(i n theta_out) for one unimodular constant a.
    The level is recovered from the curve, a is fitted by least squares
    on the circle, and the worst vertex defect is returned.
    """
    n = p.degree
    pos = welding.positions()[:-1]
    theta = np.asarray(welding.theta_out)[:-1]
    vals = np.asarray(p(pos), dtype=complex)
    if np.any(vals == 0):
        raise WeldingError("polynomial vanishes at a welding vertex")
    level = float(np.exp(np.mean(np.log(np.abs(vals)))))
    lhs = vals / level
    phase = np.exp(1j * n * theta)
    u = np.sum(lhs * np.conj(phase))
    a = u / abs(u) if abs(u) > 0 else 1.0 + 0j
    return float(np.max(np.abs(lhs - a * phase)))


def singularity_probe(welding: WeldingSample, q: float) -> float:
    """Least outer mass carried by inner-arc sets of mass at least q.

    Sample intervals are ranked by outer-to-inner mass ratio and greedily
    collected (final interval taken fractionally) until their inner mass
    reaches q; the collected outer mass is returned.  The identity
    welding gives exactly q; smaller values mean the welding concentrates
    Lebesgue measure more strongly at this resolution.  Intervals are
    those of the merged sample, so both masses are strictly positive and
    the result stays in (0, 1]; the resolution the walkers actually
    support is the resolution probed.  This is a finite-resolution
    statistic, evidence rather than a verdict on singularity of the
    welding.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    tau = 2.0 * np.pi
    d_in = np.diff(welding.theta_in) / tau
    d_out = np.diff(welding.theta_out) / tau
    order = np.argsort(d_out / d_in, kind="stable")
    acc_in = 0.0
    acc_out = 0.0
    for k in order:
        if acc_in + d_in[k] >= q:
            frac = (q - acc_in) / d_in[k]
            return float(acc_out + frac * d_out[k])
        acc_in += d_in[k]
        acc_out += d_out[k]
    return float(acc_out)
