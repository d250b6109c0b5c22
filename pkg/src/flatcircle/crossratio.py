"""Cross-ratios and distortion audits.

For a < b < c < d in circular order (lifted to one fundamental domain),

    Cr(a,b,c,d)   = |b-a||d-c| / (|c-a||d-b|)
    Poin(a,b,c,d) = |d-a||b-c| / (|c-a||d-b|)

Diffeomorphisms with negative Schwarzian expand Cr; the audits below
record how much a chain of images distorts these quantities and what the
classical bounded-distortion statements look like on concrete orbits.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpf

from .circle import Arc, CirclePoint
from .errors import (DegenerateQuadruple, FlatIntervalHit, InvalidParams,
                     NotDiffeomorphic, PointInsideInterval)
from .maps import FlatCircleMap
from .precision import PrecisionContext, frac


@dataclass(frozen=True)
class CrossRatioQuadruple:
    """Four circle points in strict circular order a < b < c < d."""

    a: CirclePoint
    b: CirclePoint
    c: CirclePoint
    d: CirclePoint

    def lifted(self) -> tuple[mpf, mpf, mpf, mpf]:
        """Increasing real representatives with d - a < 1."""
        xa = self.a.value
        xb = self.b.lift_above(xa)
        xc = self.c.lift_above(xb)
        xd = self.d.lift_above(xc)
        if xd - xa >= 1:
            raise DegenerateQuadruple(
                "points do not sit in one fundamental domain in order")
        if not xa < xb < xc < xd:
            raise DegenerateQuadruple("points not in strict circular order")
        return xa, xb, xc, xd

    def map_forward(self, m: FlatCircleMap) -> "CrossRatioQuadruple":
        return CrossRatioQuadruple(*(m.eval_circle(p) for p in
                                     (self.a, self.b, self.c, self.d)))


def cr(q: CrossRatioQuadruple) -> mpf:
    xa, xb, xc, xd = q.lifted()
    return (xb - xa) * (xd - xc) / ((xc - xa) * (xd - xb))


def poin(q: CrossRatioQuadruple) -> mpf:
    xa, xb, xc, xd = q.lifted()
    return (xd - xa) * (xc - xb) / ((xc - xa) * (xd - xb))


@dataclass(frozen=True)
class ChainAudit:
    log_ratios: tuple[mpf, ...]   # log Cr(step i) - log Cr(step 0)
    multiplicity: int             # max overlap count of the outer arcs
    max_cumulative: mpf


def chain_audit(m: FlatCircleMap, q0: CrossRatioQuadruple,
                steps: int) -> ChainAudit:
    """Push a quadruple forward and record the cross-ratio drift.

    The inner arcs (b_i, c_i) must stay clear of the flat interval.
    """
    with m.ctx:
        quads = [q0]
        for _ in range(steps):
            quads.append(quads[-1].map_forward(m))
        for i, q in enumerate(quads[:-1]):
            inner = Arc.ordered(q.b, q.c)
            if _arcs_overlap(inner, m.flat):
                raise FlatIntervalHit(f"inner arc at step {i} meets the "
                                      f"flat interval")
        base = mpmath.ln(cr(quads[0]))
        ratios = tuple(mpmath.ln(cr(q)) - base for q in quads)
        outers = [Arc.ordered(q.a, q.d) for q in quads[:-1]]
        mult = max(sum(1 for o in outers if o.contains(point, closed=True))
                   for point in [o2.midpoint() for o2 in outers])
        return ChainAudit(ratios, mult, max(ratios))


def _arcs_overlap(x: Arc, y: Arc) -> bool:
    return (x.contains(y.left) or x.contains(y.right) or
            y.contains(x.left) or y.contains(x.right) or
            x.left.value == y.left.value)


@dataclass(frozen=True)
class PoinRecord:
    poin_start: mpf
    poin_end: mpf
    sum_lengths: mpf   # sum of |f^i([a, b))|
    tau: mpf           # max of |f^i((c, d])|

    def empirical_modulus(self) -> mpf:
        """sigma-hat: the smallest modulus explaining the observed drift."""
        if self.sum_lengths == 0:
            return mpmath.mpf(0)
        drift = -mpmath.ln(self.poin_end / self.poin_start)
        return max(mpmath.mpf(0), drift / self.sum_lengths)


def poin_distortion_record(m: FlatCircleMap, t: Arc, j: Arc,
                           n: int) -> PoinRecord:
    """Distortion of Poin along f^n for the quadruple (t.left, j, t.right).

    Requires f^n to be a diffeomorphism on t, i.e. no image of t before
    step n may cover the flat interval.
    """
    tol = mpmath.mpf(2) ** (-(m.ctx.bits // 2))
    if not (t.contains_arc(j) and t.length < 1 - tol):
        raise InvalidParams("inner arc must sit inside the outer arc")
    with m.ctx:
        quad = CrossRatioQuadruple(t.left, j.left, j.right, t.right)
        start = poin(quad)
        sum_ab = mpmath.mpf(0)
        tau = mpmath.mpf(0)
        for i in range(n):
            outer = Arc.ordered(quad.a, quad.d)
            if _meets_flat(outer, m.flat):
                raise NotDiffeomorphic(
                    f"image {i} of the outer arc meets the flat interval")
            sum_ab += Arc.ordered(quad.a, quad.b).length
            tau = max(tau, Arc.ordered(quad.c, quad.d).length)
            quad = quad.map_forward(m)
        return PoinRecord(start, poin(quad), sum_ab, tau)


def _meets_flat(outer: Arc, flat: Arc) -> bool:
    # touching at endpoints is fine; covering the open flat interval is not
    return (outer.contains(flat.left) or outer.contains(flat.right) or
            flat.contains(outer.midpoint()))


@dataclass(frozen=True)
class TripleRecord:
    lhs: mpf            # |f(z)-f(y)| / |f(z)-f(x)|
    rhs: mpf            # |z-y| / |z-x|

    @property
    def implied_k(self) -> mpf:
        return self.lhs / self.rhs


def triple_ratio_check(m: FlatCircleMap, x: CirclePoint, y: CirclePoint,
                  z: CirclePoint) -> TripleRecord:
    """Both sides of |f(z)-f(y)|/|f(z)-f(x)| <= K |z-y|/|z-x|.

    The triple runs counterclockwise from x through y to z, with x the
    point closest to the flat interval; the arc (x, z) must avoid U.
    """
    if m.flat.contains(x) or m.flat.contains(y) or m.flat.contains(z):
        raise PointInsideInterval("triple meets the flat interval")
    span = Arc.ordered(x, z)
    if not span.contains(y):
        raise InvalidParams("y must lie between x and z")
    if _meets_flat(span, m.flat):
        raise NotDiffeomorphic("the arc (x, z) covers the flat interval")
    with m.ctx:
        fx, fy, fz = (m.eval_circle(p) for p in (x, y, z))
        lhs = Arc.ordered(fy, fz).length / Arc.ordered(fx, fz).length
        rhs = Arc.ordered(y, z).length / Arc.ordered(x, z).length
        return TripleRecord(lhs, rhs)
