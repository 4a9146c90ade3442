"""Koch-type fractal arcs and snowflakes from a one-parameter IFS.

For a scale parameter l in (1/4, 1/2) the four similarity maps

    f1(z) = l z
    f2(z) = l e^{i t} z + l
    f3(z) = l e^{-i t} z + 1/2 + i b
    f4(z) = l z + (1 - l)

with b = sqrt(l - 1/4) and t = arctan(b / (1/2 - l)) send the unit
segment to a connected four-segment tent whose attractor is a Koch-type
arc from 0 to 1 of Hausdorff dimension log 4 / log(1/l).  Three rotated
copies of the arc assemble into a closed snowflake.

Construction is audited at runtime: the four maps must chain end to end
(f1(0)=0, f_j(1)=f_{j+1}(0), f4(1)=1) and the snowflake must close up,
both to 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from shapely.geometry import Polygon

from .curves import PolylineCurve
from .errors import CurveError, LemkitError, RefusalError

CHAIN_TOL = 1e-12
MAX_LEVEL = 10


@dataclass(frozen=True)
class IfsSystem:
    """Four affine maps z -> scale*z + offset generating a Koch-type arc."""

    l: float
    b: float
    theta: float
    maps: tuple  # ((scale, offset), ...) of four complex pairs

    def apply(self, j: int, z):
        s, o = self.maps[j]
        return s * np.asarray(z) + o


def ifs(l: float) -> IfsSystem:
    """Build the four-map system for parameter l in (1/4, 1/2)."""
    if not 0.25 < l < 0.5:
        raise RefusalError("parameter-range", f"l={l} outside (1/4, 1/2)")
    b = math.sqrt(l - 0.25)
    theta = math.atan2(b, 0.5 - l)
    rot = complex(math.cos(theta), math.sin(theta))
    maps = (
        (complex(l), 0j),
        (l * rot, complex(l)),
        (l * rot.conjugate(), complex(0.5, b)),
        (complex(l), complex(1 - l)),
    )
    sys = IfsSystem(l=l, b=b, theta=theta, maps=maps)
    _audit_chain(sys)
    return sys


def _audit_chain(sys: IfsSystem):
    if abs(sys.apply(0, 0.0)) > CHAIN_TOL:
        raise LemkitError("IFS audit failed: f1(0) != 0")
    for j in range(3):
        gap = abs(sys.apply(j, 1.0) - sys.apply(j + 1, 0.0))
        if gap > CHAIN_TOL:
            raise LemkitError(f"IFS audit failed: f{j+1}(1) != f{j+2}(0), gap {gap:.2e}")
    if abs(sys.apply(3, 1.0) - 1.0) > CHAIN_TOL:
        raise LemkitError("IFS audit failed: f4(1) != 1")


def _check_level(n: int):
    if not 0 <= n <= MAX_LEVEL:
        est = (4**n + 1) * 16
        raise RefusalError(
            "refinement-depth",
            f"level {n} needs about {est:.2e} bytes; cap is {MAX_LEVEL}",
        )


def approximant(l: float, n: int) -> PolylineCurve:
    """Level-n polyline approximant of the arc; 4^n + 1 points, 0 to 1."""
    sys = ifs(l)
    _check_level(n)
    pts = np.array([0.0 + 0j, 1.0 + 0j])
    for _ in range(n):
        pieces = [sys.apply(0, pts)]
        for j in range(1, 4):
            pieces.append(sys.apply(j, pts)[1:])
        pts = np.concatenate(pieces)
    return PolylineCurve(pts, closed=False)


def snowflake(l: float, n: int, check_jordan: bool = True) -> PolylineCurve:
    """Closed snowflake from three rotated copies of the level-n arc.

    The three arcs run 0 -> 1, 1 -> e^{-i pi/3}, e^{-i pi/3} -> 0; the
    result is normalised counterclockwise.  Junction gaps above 1e-12
    or a self-intersection raise.
    """
    arc = approximant(l, n).points
    rot3 = np.exp(-2j * np.pi / 3)
    rot6 = np.exp(-1j * np.pi / 3)
    first = arc                      # 0 -> 1
    second = rot3 * arc + 1.0        # 1 -> e^{-i pi/3}
    third = (rot6 * np.conjugate(arc))[::-1]  # e^{-i pi/3} -> 0
    for a, b in ((first, second), (second, third)):
        if abs(a[-1] - b[0]) > CHAIN_TOL:
            raise LemkitError(f"snowflake junction gap {abs(a[-1] - b[0]):.2e}")
    if abs(third[-1] - first[0]) > CHAIN_TOL:
        raise LemkitError("snowflake does not close up")
    pts = np.concatenate([first[:-1], second[:-1], third[:-1]])
    curve = PolylineCurve(pts, closed=True)
    if curve.signed_area() < 0:
        curve = curve.reversed()
    if check_jordan and not curve.is_simple():
        raise CurveError(f"snowflake(l={l}, n={n}) self-intersects")
    return curve


def dimension(l: float) -> float:
    """Hausdorff dimension of the arc: log 4 / log(1/l)."""
    if not 0.25 < l < 0.5:
        raise RefusalError("parameter-range", f"l={l} outside (1/4, 1/2)")
    return math.log(4.0) / math.log(1.0 / l)


def parameter_for_dimension(s: float) -> float:
    """Inverse of dimension(): l = 4^(-1/s)."""
    if not 1.0 < s < 2.0:
        raise RefusalError("dimension-range", f"s={s} outside (1, 2)")
    return 4.0 ** (-1.0 / s)


@dataclass(frozen=True)
class OpenSetVerdict:
    holds: bool
    max_escape: float      # how far any image vertex leaves the triangle
    max_overlap_area: float


OPEN_SET_SLACK = 1e-12


def open_set_witness(l: float) -> OpenSetVerdict:
    """Check the open-set condition with the witness triangle.

    The witness open set is the isosceles triangle with vertices
    0, 1/2 + i b, 1.  Each map must send it into its closure and the
    four image triangles must have disjoint interiors (area of pairwise
    intersection at most 1e-12).
    """
    sys = ifs(l)
    tri = [0j, complex(0.5, sys.b), 1 + 0j]
    big = Polygon([(z.real, z.imag) for z in tri])
    images = []
    for j in range(4):
        verts = [complex(sys.apply(j, z)) for z in tri]
        images.append(Polygon([(v.real, v.imag) for v in verts]))
    # containment: image minus (slightly buffered) triangle must vanish
    buffered = big.buffer(OPEN_SET_SLACK)
    escape = max(img.difference(buffered).area for img in images)
    overlap = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            overlap = max(overlap, images[i].intersection(images[j]).area)
    holds = escape <= OPEN_SET_SLACK and overlap <= OPEN_SET_SLACK
    return OpenSetVerdict(holds=holds, max_escape=escape, max_overlap_area=overlap)
