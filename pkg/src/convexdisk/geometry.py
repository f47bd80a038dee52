"""Segment geometry, uniform samplers, convex-position predicates, and the
closed-form baselines for squares, triangles and the bi-pointed triangle.

The circular segment SEG(theta, R) is the convex hull of the arc
{R e^(i nu), |nu| <= theta/2}: the part of the disk of radius R to the
right of the vertical chord x = R cos(theta/2).  Its chord endpoints
w1 = R e^(-i theta/2), w2 = R e^(i theta/2) are the "special border"
extremities that get appended to the random points in the bi-pointed model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

from .errors import DomainError

TWO_PI = 2.0 * math.pi

# Shewchuk-style static filter constant for the float orientation test
_ORIENT_EPS = 3.3306690738754716e-16


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class SegmentSpec:
    """Circular segment with arc angle theta in (0, 2*pi] and radius R.

    The chord is the vertical line x = R cos(theta/2); the arc lies to its
    right.  theta = 2*pi gives the full disk (the chord degenerates)."""

    theta: float
    radius: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.theta <= TWO_PI:
            raise DomainError(f"segment angle {self.theta} outside (0, 2*pi]")
        if self.radius <= 0.0:
            raise DomainError("segment radius must be positive")

    @property
    def chord_x(self) -> float:
        return self.radius * math.cos(0.5 * self.theta)

    @property
    def half_chord(self) -> float:
        return self.radius * math.sin(0.5 * self.theta)

    @property
    def w1(self) -> Point:
        return Point(self.chord_x, -self.half_chord)

    @property
    def w2(self) -> Point:
        return Point(self.chord_x, self.half_chord)

    @property
    def area(self) -> float:
        return segment_area(self.theta, self.radius)

    def bounding_box(self):
        """(x_lo, x_hi, y_lo, y_hi) of the segment."""
        y_max = self.radius if self.theta > math.pi else self.half_chord
        return (self.chord_x, self.radius, -y_max, y_max)

    def contains(self, p: Point) -> bool:
        return (p.x * p.x + p.y * p.y <= self.radius ** 2
                and p.x >= self.chord_x)


def segment_area(theta: float, radius: float) -> float:
    """|SEG(theta, R)| = R^2/2 (theta - sin theta)."""
    if not 0.0 < theta <= TWO_PI:
        raise DomainError(f"segment angle {theta} outside (0, 2*pi]")
    if radius <= 0.0:
        raise DomainError("segment radius must be positive")
    return 0.5 * radius * radius * (theta - math.sin(theta))


def unit_area_radius(theta: float) -> float:
    """R_theta = sqrt(2/(theta - sin theta)); SEG(theta, R_theta) has area 1."""
    if not 0.0 < theta <= TWO_PI:
        raise DomainError(f"segment angle {theta} outside (0, 2*pi]")
    return math.sqrt(2.0 / (theta - math.sin(theta)))


def chord_length(theta: float) -> float:
    """Chord length of the unit-area segment: 2 R_theta sin(theta/2)."""
    return 2.0 * unit_area_radius(theta) * math.sin(0.5 * theta)


def family_geometry(theta: float, phi: float):
    """Geometry of the nested family sharing SEG_theta's chord.

    Returns (center, radius, area_ratio) of the member with arc angle phi:

        center     O[phi] = (L_theta/2)(cot(theta/2) - cot(phi/2))
        radius     R[phi] = R_theta sin(theta/2)/sin(phi/2)
        area       |SEG[phi]| = (sin(theta/2)/sin(phi/2))^2
                                * (phi - sin phi)/(theta - sin theta)

    relative to the unit-area outer member."""
    if not 0.0 < theta < TWO_PI:
        raise DomainError(f"family angle {theta} outside (0, 2*pi)")
    if not 0.0 < phi <= theta:
        raise DomainError(f"member angle {phi} outside (0, theta]")
    r_theta = unit_area_radius(theta)
    half_l = r_theta * math.sin(0.5 * theta)
    center = half_l * (1.0 / math.tan(0.5 * theta) - 1.0 / math.tan(0.5 * phi))
    radius = r_theta * math.sin(0.5 * theta) / math.sin(0.5 * phi)
    ratio = (math.sin(0.5 * theta) / math.sin(0.5 * phi)) ** 2 \
        * (phi - math.sin(phi)) / (theta - math.sin(theta))
    return center, radius, ratio


# ---------------------------------------------------------------------------
# samplers (scalar API; the Monte-Carlo engine has batched twins)
# ---------------------------------------------------------------------------

def sample_disk(radius: float, rng) -> Point:
    """Uniform point in the disk of given radius (polar inverse-CDF)."""
    r = radius * math.sqrt(rng.random())
    ang = TWO_PI * rng.random()
    return Point(r * math.cos(ang), r * math.sin(ang))


def sample_circle(radius: float, rng) -> Point:
    """Uniform point on the circle of given radius."""
    ang = TWO_PI * rng.random()
    return Point(radius * math.cos(ang), radius * math.sin(ang))


def sample_segment(spec: SegmentSpec, rng) -> Point:
    """Uniform point in a circular segment by bounding-box rejection.

    Worst-case acceptance is about 39% (theta -> 2*pi); correctness is
    obvious, and sampling is not the bottleneck."""
    x_lo, x_hi, y_lo, y_hi = spec.bounding_box()
    r2 = spec.radius ** 2
    while True:
        x = x_lo + (x_hi - x_lo) * rng.random()
        y = y_lo + (y_hi - y_lo) * rng.random()
        if x * x + y * y <= r2:
            return Point(x, y)


def sample_triangle(rng) -> Point:
    """Uniform point in the triangle (0,0), (1,0), (0,1)."""
    u = rng.random()
    v = rng.random()
    if u + v > 1.0:
        u, v = 1.0 - u, 1.0 - v
    return Point(u, v)


def sample_square(rng) -> Point:
    """Uniform point in the unit square."""
    return Point(rng.random(), rng.random())


# ---------------------------------------------------------------------------
# convex-position predicates
# ---------------------------------------------------------------------------

def orientation(p: Point, q: Point, r: Point) -> int:
    """Sign of the signed area of (p, q, r): +1 left turn, -1 right, 0
    collinear.  Float fast path with a static error filter; near-degenerate
    cases fall back to exact rational arithmetic (floats are dyadic)."""
    detleft = (q[0] - p[0]) * (r[1] - p[1])
    detright = (q[1] - p[1]) * (r[0] - p[0])
    det = detleft - detright
    detsum = abs(detleft) + abs(detright)
    if abs(det) > _ORIENT_EPS * detsum:
        return 1 if det > 0 else -1
    ax, ay = Fraction(p[0]), Fraction(p[1])
    bx, by = Fraction(q[0]), Fraction(q[1])
    cx, cy = Fraction(r[0]), Fraction(r[1])
    exact = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if exact > 0:
        return 1
    return -1 if exact < 0 else 0


def _hull_vertices(points: Sequence[Point]) -> list:
    """Strict convex hull (Andrew's monotone chain): collinear points on an
    edge are dropped, so a collinear middle point never counts as a vertex."""
    pts = sorted(set((float(p[0]), float(p[1])) for p in points))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and orientation(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and orientation(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def hull_vertex_count(points: Sequence[Point]) -> int:
    """Number of input points that are vertices of the convex hull."""
    if not points:
        raise DomainError("need at least one point")
    return len(_hull_vertices(points))


def convex_position(points: Sequence[Point]) -> bool:
    """True iff every input point is a strict vertex of the convex hull.

    Duplicates and collinear middle points make this False; those are
    probability-zero events in all the sampling models, so only the
    convention needs fixing."""
    if not points:
        raise DomainError("need at least one point")
    if len(set((float(p[0]), float(p[1])) for p in points)) < len(points):
        return False
    return hull_vertex_count(points) == len(points)


# ---------------------------------------------------------------------------
# closed-form baselines
# ---------------------------------------------------------------------------

def valtr_square(n: int) -> Fraction:
    """P(convex position) for n uniform points in a parallelogram:
    (binom(2n-2, n-1)/n!)^2."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return Fraction(math.comb(2 * n - 2, n - 1), math.factorial(n)) ** 2


def valtr_triangle(n: int) -> Fraction:
    """P(convex position) for n uniform points in a triangle:
    2^n (3n-3)! / ((n-1)!^3 (2n)!)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return Fraction(2 ** n * math.factorial(3 * n - 3),
                    math.factorial(n - 1) ** 3 * math.factorial(2 * n))


def barany_bipointed_triangle(n: int) -> Fraction:
    """P(A, B and n uniform points of triangle ABC are in convex position):
    2^n / (n! (n+1)!)."""
    if n < 0:
        raise DomainError("n must be >= 0")
    return Fraction(2 ** n, math.factorial(n) * math.factorial(n + 1))


_COMPOSITION_LIMIT = 20


@lru_cache(maxsize=None)
def compositions(n: int, m: int) -> tuple:
    """All ordered tuples of m positive integers summing to n."""
    if n > _COMPOSITION_LIMIT:
        raise DomainError(
            f"composition enumeration capped at n = {_COMPOSITION_LIMIT}")
    if m <= 0 or m > n:
        return ()
    if m == 1:
        return ((n,),)
    out = []
    for first in range(1, n - m + 2):
        for rest in compositions(n - first, m - 1):
            out.append((first,) + rest)
    return tuple(out)


def buchta_bipointed_triangle(n: int, m: int) -> Fraction:
    """P(exactly m of the n triangle points join A, B on the hull):
    sum over compositions C of n into m parts of
    2^m prod_i C_i / (S_i (1 + S_i)) with S_i the partial sums."""
    if n < 1 or not 1 <= m <= n:
        raise DomainError("need n >= 1 and 1 <= m <= n")
    total = Fraction(0)
    for comp in compositions(n, m):
        prod = Fraction(1)
        partial = 0
        for c in comp:
            partial += c
            prod *= Fraction(c, partial * (1 + partial))
        total += prod
    return total * 2 ** m
