"""Halving measure on nested gaps, Frostman exponent, box dimension.

A probability measure is built level by level on a selected family of
gaps: a carried short gap keeps its mass; a long gap passes half its mass
to each of its two spatially extreme children in the next partition.
Masses then halve at least every other level, so gaps whose lengths decay
no faster than lambda_1^n carry a Frostman exponent
alpha = log_{lambda_1}(1/sqrt(2)) > 0, a lower bound witness for the
Hausdorff dimension of the non-wandering set.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import mpmath
from mpmath import mpf

from .errors import (InsufficientLevels, InvalidEigenvalues,
                     StructureViolation)
from .partition import DynamicalPartition, Gap
from .precision import frac
from .rotation import Convergents
from .stats import LineFit, linfit


@dataclass(frozen=True)
class MeasureNode:
    tree_level: int          # 0-based; partition level is tree_level + 1
    gap: Gap
    mass: mpf
    origin: str              # "root", "carry" or "split"


@dataclass(frozen=True)
class MeasureTree:
    levels: tuple[tuple[MeasureNode, ...], ...]

    def level(self, t: int) -> tuple[MeasureNode, ...]:
        return self.levels[t]

    def depth(self) -> int:
        return len(self.levels)

    def level_mass(self, t: int) -> mpf:
        return mpmath.fsum(node.mass for node in self.levels[t])


def _children_in(parent: Gap, part: DynamicalPartition) -> list[Gap]:
    tol = mpmath.mpf(2) ** (16 - mpmath.mp.prec)
    kids = [g for g in part.gaps if parent.arc.contains_arc(g.arc, slack=tol)]
    kids.sort(key=lambda g: frac(g.arc.left.value - parent.arc.left.value))
    return kids


def build_measure_tree(partitions: dict, conv: Convergents) -> MeasureTree:
    """Levels of (gap, mass) pairs; partitions keyed by level 1..N."""
    ns = sorted(partitions)
    if ns != list(range(1, len(ns) + 1)):
        raise StructureViolation("partitions must be keyed 1..N")
    root_gap = partitions[1].gap("long", 0)
    levels = [(MeasureNode(0, root_gap, mpf(1), "root"),)]
    for n in ns[1:]:
        part = partitions[n]
        nxt: list[MeasureNode] = []
        for node in levels[-1]:
            if node.gap.kind == "short":
                # a short gap of P_{n-1} is a long gap of P_n, same index
                carried = part.gap("long", node.gap.index)
                nxt.append(MeasureNode(n - 1, carried, node.mass, "carry"))
                continue
            kids = _children_in(node.gap, part)
            if len(kids) < 2:
                raise StructureViolation(
                    f"long gap I_{node.gap.index}^{node.gap.level} has "
                    f"{len(kids)} children in the next partition")
            for child in (kids[0], kids[-1]):
                nxt.append(MeasureNode(n - 1, child, node.mass / 2, "split"))
        levels.append(tuple(nxt))
    return MeasureTree(tuple(levels))


def mass_bound_holds(tree: MeasureTree) -> bool:
    """mass <= (1/2)^(t/2) per node, t the 0-based tree level; exact."""
    for t, level in enumerate(tree.levels):
        bound = mpmath.mpf(2) ** (-mpf(t) / 2)
        if any(node.mass > bound for node in level):
            return False
    return True


@dataclass(frozen=True)
class FrostmanReport:
    lambda1_fit: float
    lambda2_fit: float
    lambda1_envelope: float
    alpha: float
    max_mass_ratio: float       # max mu(I)/|I|^alpha over tree gaps
    covering_constant: float    # fitted C2 over sampled arbitrary intervals
    levels_used: int

    @property
    def ok(self) -> bool:
        return self.alpha > 0 and self.max_mass_ratio <= 1


def frostman_check(tree: MeasureTree, samples: int = 200,
                   seed: int = 5) -> FrostmanReport:
    """Fit lambda_1, lambda_2 from per-level gap lengths, then verify
    mu(I) <= |I|^alpha per gap with the conservative envelope exponent."""
    depth = tree.depth()
    if depth < 6:
        raise InsufficientLevels("need at least six tree levels")
    mins = [float(min(n.gap.length for n in lvl)) for lvl in tree.levels]
    maxs = [float(max(n.gap.length for n in lvl)) for lvl in tree.levels]
    half = depth // 2
    ts = list(range(half, depth))
    l1_fit = math.exp(linfit(ts, [math.log(v) for v in mins[half:]]).slope)
    l2_fit = math.exp(linfit(ts, [math.log(v) for v in maxs[half:]]).slope)
    # the envelope guarantees |I| >= lambda1^t for every computed gap
    l1_env = min(mins[t] ** (1.0 / t) for t in range(1, depth))
    alpha = math.log(1 / math.sqrt(2)) / math.log(l1_env)
    worst = 0.0
    # the root carries mass 1 by construction; the bound starts one level in
    for level in tree.levels[1:]:
        for node in level:
            worst = max(worst, float(node.mass) / float(node.gap.length)
                        ** alpha)
    # two-cover bound on arbitrary intervals: mu(I) <= C2 |I|^alpha
    rng = random.Random(seed)
    deepest = tree.levels[-1]
    c2 = 0.0
    for _ in range(samples):
        i, j = sorted(rng.sample(range(len(deepest)), 2))
        lo = float(deepest[i].gap.arc.left.value)
        hi = float(deepest[j].gap.arc.right.value)
        if hi <= lo:
            continue
        mu = sum(float(n.mass) for n in deepest
                 if lo <= float(n.gap.arc.left.value) and
                 float(n.gap.arc.right.value) <= hi)
        c2 = max(c2, mu / (hi - lo) ** alpha)
    return FrostmanReport(l1_fit, l2_fit, l1_env, alpha, worst, c2, depth)


@dataclass(frozen=True)
class BoxDimEstimate:
    estimate: float
    fit: LineFit
    counts: tuple[tuple[float, int], ...]   # (delta, N(delta))

    @property
    def confidence_band(self) -> float:
        # crude: residual spread of the log-log fit as a slope uncertainty
        return max(0.0, 1.0 - self.fit.r2)


def box_dimension(segments, k_min: int = 3, k_max: int = 11,
                  ) -> BoxDimEstimate:
    """Box-counting estimate for a union of segments in [0, 1).

    ``segments`` are (left, right) pairs, right possibly < left for arcs
    wrapping through 0 (they are split).  Dyadic scales 2^-k are capped so
    boxes never undercut the smallest segment.
    """
    spans = []
    min_len = 1.0
    for lo, hi in segments:
        lo, hi = float(lo), float(hi)
        if hi < lo:
            spans.append((lo, 1.0))
            spans.append((0.0, hi))
            length = (1.0 - lo) + hi
        else:
            spans.append((lo, hi))
            length = hi - lo
        if length > 0:
            min_len = min(min_len, length)
    cap = int(math.floor(math.log2(1.0 / min_len))) if min_len < 1 else k_max
    k_hi = min(k_max, max(cap, k_min + 2))
    counts = []
    for k in range(k_min, k_hi + 1):
        delta = 2.0 ** -k
        boxes = set()
        for lo, hi in spans:
            first = int(lo / delta)
            last = int(hi / delta) if hi < 1.0 else (1 << k) - 1
            boxes.update(range(first, last + 1))
        counts.append((delta, len(boxes)))
    fit = linfit([math.log(1 / d) for d, _ in counts],
                 [math.log(n) for _, n in counts])
    return BoxDimEstimate(fit.slope, fit, tuple(counts))


def gap_segments(part: DynamicalPartition):
    """The closed gaps of a partition as (left, right) pairs: a cover of
    the non-wandering set at that partition's resolution."""
    return [(g.arc.left.value, g.arc.right.value) for g in part.gaps]


@dataclass(frozen=True)
class EdgeRatioReport:
    first_min: float
    last_min: float
    per_level_first: dict
    per_level_last: dict


def edge_ratio_report(partitions: dict) -> EdgeRatioReport:
    """The first and last gap of each long-gap split, relative to the
    parent: both ratios should stay bounded away from zero for bounded
    geometry."""
    ns = sorted(partitions)
    per_first, per_last = {}, {}
    for n in ns[1:]:
        prev, part = partitions[n - 1], partitions[n]
        firsts, lasts = [], []
        for g in prev.long_gaps():
            kids = _children_in(g, part)
            if len(kids) < 2:
                continue
            firsts.append(float(kids[0].length / g.length))
            lasts.append(float(kids[-1].length / g.length))
        if firsts:
            per_first[n] = min(firsts)
            per_last[n] = min(lasts)
    if not per_first:
        raise InsufficientLevels("no long-gap splits available")
    return EdgeRatioReport(min(per_first.values()), min(per_last.values()),
                           per_first, per_last)


@dataclass(frozen=True)
class CherryReport:
    ell: mpf
    hypothesis_flag: bool       # |lambda2| >= 3 lambda1
    frostman: FrostmanReport
    box: BoxDimEstimate
    quasi_minimal_dimension: float   # 1 + dim(Omega), the product reduction

    @property
    def exceeds_one(self) -> bool:
        return self.quasi_minimal_dimension > 1


def cherry_ell(lambda1, lambda2) -> mpf:
    """The critical exponent of the return map of a Cherry flow whose
    saddle has eigenvalues lambda1 > 0 > lambda2."""
    l1, l2 = mpmath.mpf(lambda1), mpmath.mpf(lambda2)
    if not (l1 > 0 > l2):
        raise InvalidEigenvalues(
            f"need lambda1 > 0 > lambda2, got ({l1}, {l2})")
    return abs(l2) / l1


def cherry_report(lambda1, lambda2, tree: MeasureTree,
                  part_deepest: DynamicalPartition) -> CherryReport:
    """Dimension report for the Cherry flow with the given saddle
    eigenvalues, given a pipeline run at ell = |lambda2|/lambda1."""
    ell = cherry_ell(lambda1, lambda2)
    flag = abs(mpmath.mpf(lambda2)) >= 3 * mpmath.mpf(lambda1)
    fr = frostman_check(tree)
    box = box_dimension(gap_segments(part_deepest))
    dim = 1.0 + max(fr.alpha, 0.0)
    return CherryReport(ell, flag, fr, box, dim)
