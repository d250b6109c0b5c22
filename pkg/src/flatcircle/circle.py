"""Circle points, arcs and the distance conventions used throughout.

Distances follow the usual conventions for points and intervals on the
circle: ``|x-y|`` is the shortest-arc distance, ``|(x,I)|`` the distance
from a point to the closer endpoint of an interval, ``|(x,I]|`` to the
farther one (i.e. closer + |I|), and similarly for pairs of intervals with
the four open/closed bracket combinations.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpf

from .errors import InvalidParams, OverlappingIntervals, PointInsideInterval
from .precision import PrecisionContext, frac


@dataclass(frozen=True)
class CirclePoint:
    """A point of R/Z, stored as an mpf in [0, 1)."""

    value: mpf

    @staticmethod
    def make(x, ctx: PrecisionContext) -> "CirclePoint":
        with ctx:
            return CirclePoint(frac(mpmath.mpf(x)))

    def lift_above(self, base: mpf) -> mpf:
        """The representative of this point in [base, base + 1)."""
        return base + frac(self.value - base)


@dataclass(frozen=True)
class Arc:
    """An oriented arc running counterclockwise from ``left`` to ``right``.

    Orientation-aware on purpose: partition gaps are arcs between dynamically
    adjacent objects and need not be the shortest arc between their
    endpoints.
    """

    left: CirclePoint
    right: CirclePoint

    @staticmethod
    def ordered(left: CirclePoint, right: CirclePoint) -> "Arc":
        return Arc(left, right)

    @staticmethod
    def shortest(x: CirclePoint, y: CirclePoint) -> "Arc":
        """The shortest arc between two points (ties resolved ccw from x)."""
        d = frac(y.value - x.value)
        if d <= mpf(1) / 2:
            return Arc(x, y)
        return Arc(y, x)

    @property
    def length(self) -> mpf:
        return frac(self.right.value - self.left.value)

    def contains(self, p: CirclePoint, closed: bool = False) -> bool:
        t = frac(p.value - self.left.value)
        if closed:
            return t <= self.length or t == 0
        return 0 < t < self.length

    def contains_arc(self, other: "Arc", slack: mpf = mpf(0)) -> bool:
        """Whether ``other`` lies inside the closure of this arc."""
        t = frac(other.left.value - self.left.value)
        if t > self.length + slack and (1 - t) > slack:
            return False
        start = t if t <= self.length + slack else t - 1
        return start + other.length <= self.length + slack

    def midpoint(self) -> CirclePoint:
        return CirclePoint(frac(self.left.value + self.length / 2))


def shortest_dist(x: CirclePoint, y: CirclePoint, ctx: PrecisionContext) -> mpf:
    """min(|x-y|, 1-|x-y|): the natural metric on R/Z, in [0, 1/2]."""
    with ctx:
        d = abs(frac(x.value) - frac(y.value))
        return min(d, 1 - d)


def point_interval_dist(x: CirclePoint, interval: Arc, mode: str,
                        ctx: PrecisionContext) -> mpf:
    """|(x, I)| for mode='closer', |(x, I]| for mode='farther'."""
    if mode not in ("closer", "farther"):
        raise InvalidParams(f"unknown mode {mode!r}")
    if interval.contains(x):
        raise PointInsideInterval(f"point {x.value} lies in the open interval")
    with ctx:
        d = min(shortest_dist(x, interval.left, ctx),
                shortest_dist(x, interval.right, ctx))
        if mode == "farther":
            d = d + interval.length
        return d


_GAP_MODES = ("open-open", "closed-open", "open-closed", "closed-closed")


def interval_gap_dist(i: Arc, j: Arc, mode: str, ctx: PrecisionContext) -> mpf:
    """|(I,J)|, |[I,J)|, |(I,J]| or |[I,J]| depending on ``mode``.

    The closed variants add |I| and/or |J| to the closest-endpoint distance.
    """
    if mode not in _GAP_MODES:
        raise InvalidParams(f"unknown mode {mode!r}")
    with ctx:
        gap_after_i = frac(j.left.value - i.right.value)
        gap_after_j = frac(i.left.value - j.right.value)
        total = gap_after_i + gap_after_j + i.length + j.length
        if abs(total - 1) > mpmath.mpf(2) ** (16 - ctx.bits):
            raise OverlappingIntervals(
                f"arcs overlap (coverage defect {total - 1})")
        d = min(gap_after_i, gap_after_j)
        if mode.startswith("closed"):
            d = d + i.length
        if mode.endswith("closed"):
            d = d + j.length
        return d
