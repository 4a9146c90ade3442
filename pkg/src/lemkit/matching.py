"""Matching pairs on Jordan rational lemniscates.

On a Jordan curve where |r| = c the map r satisfies conj(r) = c^2/r, so
the pair (r, c^2/r) matches across the curve: the first function is
holomorphic inside, the second is holomorphic outside and vanishes at
infinity, and they agree after conjugation on the curve itself.  The
construction needs three hypotheses: r has no pole enclosed by the
curve, r has no zero outside it, and r fixes infinity.  Each failed
hypothesis produces a structured refusal naming it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import PolylineCurve, winding_number
from .errors import RefusalError
from .ratfun import RationalMap, is_inf
from .tracer import trace
from .welding import WeldingSample

# An explicitly supplied curve must sit on the level set this loosely.
_LEVEL_RTOL = 1e-2


@dataclass(frozen=True)
class BoundaryFunctionSample:
    """Values of one boundary function at points of a reference curve."""

    points: np.ndarray
    values: np.ndarray
    source: str

    def __post_init__(self):
        if np.asarray(self.points).shape != np.asarray(self.values).shape:
            raise ValueError("points and values must align")


def sample_on_curve(fn, curve: PolylineCurve, source: str,
                    max_points: int = 4096) -> BoundaryFunctionSample:
    """Evaluate a rule on curve vertices (thinned past max_points)."""
    pts = curve.points
    if pts.size > max_points:
        stride = int(np.ceil(pts.size / max_points))
        pts = pts[::stride]
    return BoundaryFunctionSample(points=pts,
                                  values=np.asarray(fn(pts), dtype=complex),
                                  source=source)


def traced_jordan_curve(r: RationalMap, c: float,
                        grid_n: int = 512) -> PolylineCurve:
    """Trace the level set, insisting on a single closed Jordan curve."""
    tr = trace(r, c, grid_n=grid_n)
    loops = [e for e in tr.edges if e.is_loop]
    if tr.vertices or len(loops) != 1 or len(tr.edges) != 1:
        raise RefusalError(
            "jordan-curve",
            f"level set at {c} has {len(tr.edges)} edges and "
            f"{len(tr.vertices)} vertices; need one closed curve")
    return loops[0].curve


def lemniscate_pair(r: RationalMap, c: float,
                    curve: PolylineCurve | None = None,
                    ) -> tuple[RationalMap, RationalMap]:
    """Matching pair (r, c^2/r) on the Jordan level curve |r| = c.

    With no explicit curve the level set is traced and must be a single
    Jordan curve.  An explicit curve lets one component of a larger
    level set serve as the reference; it must lie on the level set.
    Hypothesis failures raise RefusalError with condition tags
    'map-fixes-infinity', 'jordan-curve', 'no-pole-inside', and
    'no-zero-outside'.
    """
    if c <= 0:
        raise ValueError(f"level must be positive, got {c}")
    v_inf = r.value_at_inf()
    if not is_inf(v_inf):
        raise RefusalError(
            "map-fixes-infinity",
            f"r(inf) = {v_inf}; the outer function c^2/r must vanish "
            "at infinity, which needs r(inf) = inf")

    if curve is None:
        curve = traced_jordan_curve(r, c)
    else:
        if not curve.closed:
            raise ValueError("reference curve must be closed")
        if not curve.is_simple():
            raise RefusalError("jordan-curve",
                               "reference curve self-intersects")
        mod = np.abs(np.asarray(r(curve.points), dtype=complex))
        worst = float(np.max(np.abs(mod - c)))
        if worst > _LEVEL_RTOL * c:
            raise ValueError(
                f"reference curve leaves the level set: max deviation "
                f"{worst:.3g} against level {c}")
    if curve.signed_area() < 0:
        curve = curve.reversed()

    for q, mult in r.poles.finite_entries():
        if winding_number(curve, q) != 0:
            raise RefusalError(
                "no-pole-inside",
                f"pole at {q} (multiplicity {mult}) lies inside the curve")
    for z0, mult in r.zeros.finite_entries():
        if winding_number(curve, z0) == 0:
            raise RefusalError(
                "no-zero-outside",
                f"zero at {z0} (multiplicity {mult}) lies outside the curve")

    g = RationalMap(r.den * (c * c), r.num)
    if g.value_at_inf() != 0:
        raise RefusalError(
            "map-fixes-infinity",
            "outer function does not vanish at infinity")
    return r, g


def verify_matching(f, g, curve: PolylineCurve,
                    max_points: int = 4096) -> float:
    """Sup over curve vertices of |f - conj(g)|."""
    pts = curve.points
    if pts.size > max_points:
        stride = int(np.ceil(pts.size / max_points))
        pts = pts[::stride]
    fv = np.asarray(f(pts), dtype=complex)
    gv = np.asarray(g(pts), dtype=complex)
    return float(np.max(np.abs(fv - np.conj(gv))))


def _interp_periodic(theta_grid: np.ndarray, values: np.ndarray,
                     at: np.ndarray) -> np.ndarray:
    tau = 2.0 * np.pi
    t = np.mod(theta_grid, tau)
    order = np.argsort(t)
    t, v = t[order], values[order]
    t = np.concatenate([t, [t[0] + tau]])
    v = np.concatenate([v, [v[0]]])
    at = np.mod(at, tau)
    re = np.interp(at, t, v.real)
    im = np.interp(at, t, v.imag)
    return re + 1j * im


def verify_welding_equivalence(phi: tuple[np.ndarray, np.ndarray],
                               psi: tuple[np.ndarray, np.ndarray],
                               welding: WeldingSample) -> float:
    """Sup residual of the transported boundary identity.

    ``phi`` is (inner angles, values) and ``psi`` is (outer angles,
    values).  Each inner angle is pushed through the welding map and the
    outer samples are interpolated there; returns the sup of
    |phi - psi(welded angle)|.
    """
    phi_theta, phi_vals = (np.asarray(a) for a in phi)
    psi_theta, psi_vals = (np.asarray(a) for a in psi)
    pushed = welding.map_in_to_out(phi_theta.astype(float))
    psi_at = _interp_periodic(psi_theta.astype(float),
                              psi_vals.astype(complex), pushed)
    return float(np.max(np.abs(np.asarray(phi_vals, dtype=complex) - psi_at)))
