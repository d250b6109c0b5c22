"""Dynamical partitions generated by the backward orbit of the flat interval.

The first q_n + q_{n+1} preimages of U cut the circle into "gaps".  Gaps
flanked by preimages whose indices differ by q_n are the long gaps I_i^n
(i < q_{n+1}); those whose flank indices differ by q_{n+1} are the short
gaps I_i^{n+1} (i < q_n).  Each long gap splits under the next partition
into a_{n+2} deeper preimages, a_{n+2} long gaps and one short gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from .circle import Arc, CirclePoint
from .errors import (InsufficientData, OrbitHitsFlat, PrecisionExhausted,
                     StructureViolation)
from .maps import FlatCircleMap, MapParams
from .precision import PrecisionContext, frac
from .rotation import Convergents


@dataclass(frozen=True)
class FlatOrbit:
    """Forward orbit of the flat interval: points f(U), f^2(U), ..."""

    points: tuple[CirclePoint, ...]

    def point(self, i: int) -> CirclePoint:
        """The point f^i(U), i >= 1."""
        if not 1 <= i <= len(self.points):
            raise InsufficientData(f"orbit point {i} not computed")
        return self.points[i - 1]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class PreimageSet:
    """Backward orbit of the flat interval: intervals U, f^-1(U), ..."""

    intervals: tuple[Arc, ...]

    def interval(self, i: int) -> Arc:
        """The interval f^{-i}(U), i >= 0."""
        if not 0 <= i < len(self.intervals):
            raise InsufficientData(f"preimage {i} not computed")
        return self.intervals[i]

    def __len__(self) -> int:
        return len(self.intervals)


@dataclass(frozen=True)
class Gap:
    """A component of the complement of the first preimages.

    ``kind`` is "long" or "short"; ``index`` is the i of I_i^level.  The
    flanking preimage indices satisfy ``abs(left_flank - right_flank)`` =
    q_level of the partition.
    """

    kind: str
    index: int
    level: int
    arc: Arc
    left_flank: int
    right_flank: int

    @property
    def length(self) -> mpf:
        return self.arc.length


@dataclass(frozen=True)
class DynamicalPartition:
    level: int
    preimage_count: int
    gaps: tuple[Gap, ...]

    def long_gaps(self) -> tuple[Gap, ...]:
        return tuple(g for g in self.gaps if g.kind == "long")

    def short_gaps(self) -> tuple[Gap, ...]:
        return tuple(g for g in self.gaps if g.kind == "short")

    def gap(self, kind: str, index: int) -> Gap:
        for g in self.gaps:
            if g.kind == kind and g.index == index:
                return g
        raise InsufficientData(f"no {kind} gap with index {index}")

    def max_gap_length(self) -> mpf:
        return max(g.length for g in self.gaps)

    def min_gap_length(self) -> mpf:
        return min(g.length for g in self.gaps)


def flat_orbit(m: FlatCircleMap, count: int, preims: PreimageSet | None = None,
               max_doublings: int = 4) -> FlatOrbit:
    """The points f(U), ..., f^count(U), with a precision escalation retry.

    If an orbit point lands suspiciously close to U (within 2^(-bits/2))
    the computation restarts at doubled precision; a point certifiably
    inside the open flat interval means the rotation number is rational
    or the tuning failed.
    """
    if count < 1:
        raise InsufficientData("orbit needs at least one point")
    ctx = m.ctx
    for _ in range(max_doublings + 1):
        mm = FlatCircleMap(m.params, ctx)
        flat = mm.flat
        guard = mpmath.mpf(2) ** (-(ctx.bits // 2))
        points: list[CirclePoint] = []
        suspicious = False
        with ctx:
            x = mm.critical_value()
            for _ in range(count):
                points.append(x)
                t = frac(x.value - flat.left.value)
                if guard < t < flat.length - guard:
                    raise OrbitHitsFlat(
                        f"orbit point {len(points)} lies inside the flat "
                        f"interval; rotation number looks rational")
                if t < flat.length + guard or t > 1 - guard:
                    suspicious = True
                    break
                x = mm.eval_circle(x)
        if not suspicious:
            return FlatOrbit(tuple(points))
        ctx = ctx.doubled()
    raise PrecisionExhausted(
        "orbit keeps grazing the flat interval after precision escalation")


def preimages(m: FlatCircleMap, count: int,
              base: PreimageSet | None = None) -> PreimageSet:
    """U, f^-1(U), ..., f^-count(U); ``base`` is extended if given."""
    if count < 1:
        raise InsufficientData("need at least one preimage")
    intervals = list(base.intervals) if base is not None else [m.flat]
    with m.ctx:
        # the inverse branch loses a few extra bits near the singularity
        # when ell < 2, so leave ~32 bits of headroom
        tol = mpmath.mpf(2) ** (32 - m.ctx.bits)
        while len(intervals) <= count:
            nxt = m.pullback(intervals[-1])
            for end, src in ((nxt.left, intervals[-1].left),
                             (nxt.right, intervals[-1].right)):
                err = abs(frac(m.eval_circle(end).value - src.value +
                               mpf(1) / 2) - mpf(1) / 2)
                if err > tol:
                    raise PrecisionExhausted(
                        f"preimage endpoint roundtrip error {err}")
            intervals.append(nxt)
    return PreimageSet(tuple(intervals))


def build_partition(m: FlatCircleMap, n: int, conv: Convergents,
                    preims: PreimageSet | None = None) -> DynamicalPartition:
    """The partition generated by the first q_{n+1} + q_n preimages."""
    qn, qn1 = conv.q[n], conv.q[n + 1]
    need = qn1 + qn - 1
    if preims is None:
        preims = preimages(m, need)
    if len(preims) < need + 1:
        raise InsufficientData(
            f"partition level {n} needs {need + 1} preimages, "
            f"have {len(preims)}")
    with m.ctx:
        order = sorted(range(need + 1),
                       key=lambda i: preims.interval(i).left.value)
        gaps: list[Gap] = []
        for pos, i in enumerate(order):
            j = order[(pos + 1) % len(order)]
            arc = Arc.ordered(preims.interval(i).right,
                              preims.interval(j).left)
            diff = abs(i - j)
            if diff == qn:
                kind, level = "long", n
            elif diff == qn1:
                kind, level = "short", n + 1
            else:
                raise StructureViolation(
                    f"adjacent preimages {i}, {j} differ by {diff}; "
                    f"expected {qn} or {qn1}")
            gaps.append(Gap(kind, min(i, j), level, arc, i, j))
        part = DynamicalPartition(n, need + 1, tuple(gaps))
        n_long, n_short = len(part.long_gaps()), len(part.short_gaps())
        if n_long != qn1 or n_short != qn:
            raise StructureViolation(
                f"gap counts ({n_long} long, {n_short} short) do not match "
                f"(q_{n + 1}, q_{n}) = ({qn1}, {qn})")
        total = mpmath.fsum([g.length for g in gaps] +
                            [preims.interval(i).length
                             for i in range(need + 1)])
        if abs(total - 1) > mpmath.mpf(2) ** (16 - m.ctx.bits):
            raise StructureViolation(f"coverage defect {total - 1}")
    return part


@dataclass(frozen=True)
class SplitReport:
    """Per-gap verdicts for the long-gap splitting rule."""

    checked: int
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_structure(pn: DynamicalPartition, pn1: DynamicalPartition,
                       conv: Convergents) -> SplitReport:
    """Check that every long gap of level n splits as

        I_i^n = U_j f^{-(i + q_n + j q_{n+1})}(U)   (j = 1..a_{n+2})
              u U_j I^{n+1}_{i + q_n + j q_{n+1}}   (j = 0..a_{n+2}-1)
              u I_i^{n+2}

    and that every short gap of level n reappears as a long gap of n+1.
    """
    n = pn.level
    if pn1.level != n + 1:
        raise InsufficientData("need two consecutive partition levels")
    qn, qn1 = conv.q[n], conv.q[n + 1]
    a_next = conv.a(n + 2)
    failures: list[str] = []
    checked = 0
    next_long = {g.index: g for g in pn1.long_gaps()}
    next_short = {g.index: g for g in pn1.short_gaps()}
    for g in pn.long_gaps():
        checked += 1
        i = g.index
        want_long = [i + qn + j * qn1 for j in range(a_next)]
        pieces = []
        for idx in want_long:
            child = next_long.get(idx)
            if child is None:
                failures.append(f"I_{i}^{n}: missing long child {idx}")
                continue
            pieces.append(child.arc)
        short_child = next_short.get(i)
        if short_child is None:
            failures.append(f"I_{i}^{n}: missing short child {i}")
        else:
            pieces.append(short_child.arc)
        tol = mpmath.mpf(2) ** (16 - mpmath.mp.prec)
        total = mpmath.fsum(p.length for p in pieces)
        bad = [p for p in pieces if not g.arc.contains_arc(p, slack=tol)]
        if bad:
            failures.append(f"I_{i}^{n}: {len(bad)} children escape the gap")
        # the defect is exactly the new preimages cut out of the gap
        if total > g.length + tol:
            failures.append(f"I_{i}^{n}: children longer than the parent")
    for g in pn.short_gaps():
        checked += 1
        parent = next_long.get(g.index)
        if parent is None or abs(parent.length - g.length) > 0:
            failures.append(
                f"I_{g.index}^{n + 1}: short gap not carried to level "
                f"{n + 1} as a long gap")
    return SplitReport(checked, tuple(failures))


def split_defect(pn: DynamicalPartition, pn1: DynamicalPartition,
                 preims: PreimageSet, conv: Convergents) -> mpf:
    """Max over long gaps of |gap| - (children + new preimages): ~0."""
    n = pn.level
    qn, qn1 = conv.q[n], conv.q[n + 1]
    a_next = conv.a(n + 2)
    next_long = {g.index: g for g in pn1.long_gaps()}
    next_short = {g.index: g for g in pn1.short_gaps()}
    worst = mpmath.mpf(0)
    for g in pn.long_gaps():
        i = g.index
        lengths = [next_long[i + qn + j * qn1].length for j in range(a_next)]
        lengths.append(next_short[i].length)
        lengths += [preims.interval(i + qn + j * qn1).length
                    for j in range(1, a_next + 1)]
        worst = max(worst, abs(g.length - mpmath.fsum(lengths)))
    return worst


def order_check(orbit: FlatOrbit, rho: Fraction, count: int | None = None) -> bool:
    """Whether the circular order of f^i(U) matches that of i*rho mod 1."""
    count = len(orbit) if count is None else min(count, len(orbit))
    if count <= 2:
        return True
    if rho.denominator <= count:
        raise InsufficientData(
            "rational approximation too coarse: collisions i*rho mod 1")
    real = sorted(range(1, count + 1), key=lambda i: orbit.point(i).value)
    rigid = sorted(range(1, count + 1), key=lambda i: (i * rho) % 1)
    # same circular order = same sorted sequence up to rotation
    k = rigid.index(real[0])
    return real == rigid[k:] + rigid[:k]


def flank_ratio_statistic(part: DynamicalPartition, preims: PreimageSet) -> mpf:
    """min over gaps of max(flanking preimage length) / gap length.

    One of the two preimages adjacent to any gap is comparable to it; the
    per-level minimum of this ratio should stabilize above 0.
    """
    best = None
    for g in part.gaps:
        j = max(preims.interval(g.left_flank).length,
                preims.interval(g.right_flank).length)
        r = j / g.length
        best = r if best is None else min(best, r)
    return best


def partition_rows(part: DynamicalPartition, preims: PreimageSet):
    """Rows (index, type, left, right, length) for CSV export."""
    rows = []
    for i in range(part.preimage_count):
        arc = preims.interval(i)
        rows.append((i, "preimage", arc.left.value, arc.right.value,
                     arc.length))
    for g in sorted(part.gaps, key=lambda g: (g.kind, g.index)):
        rows.append((g.index, f"{g.kind}-gap-level-{g.level}",
                     g.arc.left.value, g.arc.right.value, g.length))
    return rows
