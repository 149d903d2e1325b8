"""Exact arithmetic foundations.

Rational slope handling, the quadratic ring Q[sqrt(3)], the shear taking the
equilateral gasket onto the right-angle gasket, and the exact line/triangle
intersection predicate used by the geometric box-counting oracle.

No floats enter any predicate here: slopes and intercepts are Fractions,
sqrt(3) is kept symbolic, and triangle cells carry dyadic-rational vertices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .errors import ValidationError

__all__ = [
    "Sqrt3",
    "SlopeSpec",
    "ExactPoint",
    "TriangleCell",
    "RationalLine",
    "make_slope",
    "slope_from_gasket_tangent",
    "transform_to_right_angle",
    "transform_from_right_angle",
    "line_hits_triangle",
]


# ---------------------------------------------------------------------------
# The ring Q[sqrt(3)]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sqrt3:
    """An element a + b*sqrt(3) with rational a, b.

    Closed under +, -, *; enough for applying the (linear) gasket shear and
    its inverse exactly.
    """

    a: Fraction
    b: Fraction = Fraction(0)

    @staticmethod
    def of(a, b=0) -> "Sqrt3":
        return Sqrt3(Fraction(a), Fraction(b))

    def __add__(self, other: "Sqrt3") -> "Sqrt3":
        return Sqrt3(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "Sqrt3") -> "Sqrt3":
        return Sqrt3(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "Sqrt3":
        return Sqrt3(-self.a, -self.b)

    def __mul__(self, other: "Sqrt3") -> "Sqrt3":
        # (a + b s)(c + d s) = ac + 3bd + (ad + bc) s   with s^2 = 3
        return Sqrt3(
            self.a * other.a + 3 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    def scale(self, r) -> "Sqrt3":
        r = Fraction(r)
        return Sqrt3(self.a * r, self.b * r)

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(3.0)

    def is_rational(self) -> bool:
        return self.b == 0


_SQRT3 = Sqrt3.of(0, 1)


# ---------------------------------------------------------------------------
# Slopes and the two angle representations
# ---------------------------------------------------------------------------

def _gasket_tangent_reduced(p: int, q: int) -> Tuple[int, int]:
    """Reduced (m, n) with tan(theta_gasket) = sqrt(3) * m / n for slope p/q."""
    num, den = p, 2 * q + p
    g = math.gcd(num, den)
    return num // g, den // g


def _parity_witness(m: int, n: int) -> Tuple[int, int]:
    """A representation m'/n' of m/n with (m' odd => n' odd).

    Every tangent sqrt(3)*m/n with 0 < m < n admits one: the fraction itself
    when the parity condition already holds, otherwise its doubling.
    """
    if m % 2 == 0 or n % 2 == 1:
        return m, n
    return 2 * m, 2 * n


@dataclass(frozen=True)
class SlopeSpec:
    """A validated rational slope p/q of a line through the right-angle gasket.

    Carries both angle forms: tan(theta) = p/q in right-angle coordinates and
    tan(theta) = sqrt(3)*p/(2q+p) in equilateral coordinates.
    """

    p: int
    q: int
    was_reduced: bool = False

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValidationError(f"slope needs positive integers, got p={self.p} q={self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise ValidationError("SlopeSpec requires coprime p, q; use make_slope()")

    @property
    def m(self) -> int:
        """Size of the interval partition (and of the transition matrices)."""
        return self.p + self.q

    @property
    def tan_right(self) -> Fraction:
        return Fraction(self.p, self.q)

    @property
    def tan_gasket_coeffs(self) -> Tuple[int, int]:
        """(p, 2q+p): the unreduced coefficients of sqrt(3)*p/(2q+p)."""
        return self.p, 2 * self.q + self.p

    @property
    def tan_gasket_reduced(self) -> Tuple[int, int]:
        return _gasket_tangent_reduced(self.p, self.q)

    @property
    def qprime_witness(self) -> Tuple[int, int]:
        """A parity-compatible (m, n) representation of the gasket tangent."""
        return _parity_witness(*self.tan_gasket_reduced)

    @property
    def projection_range(self) -> Tuple[Fraction, Fraction]:
        """The projection of the right-angle gasket to the y-axis along the slope."""
        return -self.tan_right, Fraction(1)

    def __str__(self) -> str:
        m, n = self.tan_gasket_reduced
        return f"p/q={self.p}/{self.q} (gasket tangent sqrt(3)*{m}/{n})"


def make_slope(p: int, q: int) -> SlopeSpec:
    """Validate and reduce a rational slope p/q.

    Reduces to lowest terms (recording that a reduction happened) and checks
    that the gasket-form tangent sqrt(3)*p/(2q+p) lies strictly inside
    (0, sqrt(3)) and admits a parity-compatible representation.
    """
    if not (isinstance(p, int) and isinstance(q, int)):
        raise ValidationError("p and q must be integers")
    if p < 1 or q < 1:
        raise ValidationError(f"p and q must be >= 1, got p={p} q={q}")
    g = math.gcd(p, q)
    spec = SlopeSpec(p // g, q // g, was_reduced=(g > 1))
    m, n = spec.tan_gasket_reduced
    # 0 < m/n < 1 always holds for p, q >= 1; keep it as a hard invariant.
    if not (0 < m < n):
        raise ValidationError(f"gasket tangent {m}/{n} outside (0, 1)")
    wm, wn = spec.qprime_witness
    if wm % 2 == 1 and wn % 2 == 0:
        raise ValidationError(f"no parity-compatible representation for {m}/{n}")
    return spec


def slope_from_gasket_tangent(m: int, n: int) -> SlopeSpec:
    """Slope spec for a gasket-form tangent sqrt(3)*m/n with 0 < m < n.

    Inverts tan = sqrt(3)*p/(2q+p): the right-angle slope is 2m/(n-m).
    """
    if m < 1 or n < 1 or m >= n:
        raise ValidationError(f"gasket tangent needs 0 < m < n, got {m}/{n}")
    return make_slope(2 * m, n - m)


# ---------------------------------------------------------------------------
# The shear between the two gaskets
# ---------------------------------------------------------------------------

# Maps the equilateral gasket (vertices (0,0), (1,0), (1/2, sqrt(3)/2)) onto
# the right-angle gasket (vertices (0,0), (1,0), (0,1)):
#   (x, y) |-> (x - y*sqrt(3)/3, y*2*sqrt(3)/3)
_T_XY = Sqrt3.of(0, Fraction(-1, 3))
_T_YY = Sqrt3.of(0, Fraction(2, 3))
# Inverse: (x, y) |-> (x + y/2, y*sqrt(3)/2)
_TI_XY = Sqrt3.of(Fraction(1, 2))
_TI_YY = Sqrt3.of(0, Fraction(1, 2))


def transform_to_right_angle(pt: Tuple[Sqrt3, Sqrt3]) -> Tuple[Sqrt3, Sqrt3]:
    """Apply the shear taking the equilateral gasket onto the right-angle one.

    Exact in Q[sqrt(3)]: the apex (1/2, sqrt(3)/2) lands on (0, 1) with no
    rounding anywhere.
    """
    x, y = pt
    return x + _T_XY * y, _T_YY * y


def transform_from_right_angle(pt: Tuple[Sqrt3, Sqrt3]) -> Tuple[Sqrt3, Sqrt3]:
    """Exact inverse of :func:`transform_to_right_angle`."""
    x, y = pt
    return x + _TI_XY * y, _TI_YY * y


# ---------------------------------------------------------------------------
# Exact points, cells and lines in right-angle coordinates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactPoint:
    x: Fraction
    y: Fraction

    @staticmethod
    def of(x, y) -> "ExactPoint":
        return ExactPoint(Fraction(x), Fraction(y))


# Translation parts of the three half-scale maps of the right-angle gasket.
_CELL_SHIFTS = ((0, 0), (1, 0), (0, 1))


@dataclass(frozen=True)
class TriangleCell:
    """Convex hull of a level-n cylinder of the right-angle gasket.

    ``word`` is the ternary address; the vertices are the images of
    (0,0), (1,0), (0,1) under the corresponding map composition, so all
    coordinates have denominator dividing 2**n.
    """

    vertices: Tuple[ExactPoint, ExactPoint, ExactPoint]
    word: Tuple[int, ...]

    @staticmethod
    def root() -> "TriangleCell":
        return TriangleCell(
            (ExactPoint.of(0, 0), ExactPoint.of(1, 0), ExactPoint.of(0, 1)), ()
        )

    def child(self, i: int) -> "TriangleCell":
        if i not in (0, 1, 2):
            raise ValidationError(f"child index must be 0, 1 or 2, got {i}")
        tx, ty = _CELL_SHIFTS[i]
        verts = tuple(
            ExactPoint((v.x + tx) / 2, (v.y + ty) / 2) for v in self.vertices
        )
        return TriangleCell(verts, self.word + (i,))

    @property
    def level(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class RationalLine:
    """The locus y = intercept + slope*x with exact rational coefficients.

    The intercept is the projection coordinate of the line; for a line that
    actually meets the gasket it lies in [-slope, 1], but the predicate below
    is total, so out-of-range lines are allowed and simply miss.
    """

    slope: Fraction
    intercept: Fraction

    @staticmethod
    def of(slope, intercept) -> "RationalLine":
        return RationalLine(Fraction(slope), Fraction(intercept))

    @staticmethod
    def for_slope(spec: SlopeSpec, intercept) -> "RationalLine":
        return RationalLine(spec.tan_right, Fraction(intercept))

    def meets_projection(self, spec: SlopeSpec) -> bool:
        lo, hi = spec.projection_range
        return lo <= self.intercept <= hi

    def side_of(self, pt: ExactPoint) -> int:
        """Sign of y - intercept - slope*x at pt (exact)."""
        v = pt.y - self.intercept - self.slope * pt.x
        return (v > 0) - (v < 0)


def line_hits_triangle(line: RationalLine, cell: TriangleCell) -> bool:
    """Exact closed intersection test between a line and a triangle cell.

    The closed triangle meets the closed line iff the affine form
    y - a - slope*x does not take the same strict sign at all three vertices;
    tangential (vertex or edge) contact therefore counts as a hit.
    """
    s0 = line.side_of(cell.vertices[0])
    s1 = line.side_of(cell.vertices[1])
    s2 = line.side_of(cell.vertices[2])
    return not (s0 > 0 and s1 > 0 and s2 > 0) and not (s0 < 0 and s1 < 0 and s2 < 0)
