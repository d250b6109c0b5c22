"""End-to-end orchestration: tune -> partition -> scalings -> recurrence
-> dimension.  Shared by the CLI, the experiment scripts and the tests."""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
from mpmath import mpf

from .circle import CirclePoint
from .dimension import (BoxDimEstimate, FrostmanReport, MeasureTree,
                        box_dimension, build_measure_tree, frostman_check,
                        gap_segments)
from .errors import InsufficientLevels, InvalidParams
from .maps import FlatCircleMap, MapParams
from .partition import (DynamicalPartition, FlatOrbit, PreimageSet,
                        build_partition, flank_ratio_statistic, flat_orbit,
                        preimages)
from .precision import PrecisionContext
from .recurrence import RecurrenceData, check_recursion
from .rotation import ContinuedFraction, Convergents, convergents, \
    tune_parameter
from .scalings import ScalingSeries, compute_scalings


@dataclass
class PipelineResult:
    ell: mpf
    ctx: PrecisionContext
    params: MapParams
    map: FlatCircleMap
    target: ContinuedFraction
    conv: Convergents
    n_max: int
    orbit: FlatOrbit | None = None
    preims: PreimageSet | None = None
    partitions: dict = field(default_factory=dict)
    scalings: ScalingSeries | None = None
    recurrence: RecurrenceData | None = None
    tree: MeasureTree | None = None
    frostman: FrostmanReport | None = None
    box: BoxDimEstimate | None = None

    def flank_ratio_running_min(self) -> list:
        """Cumulative min over levels of the preimage/gap adjacency ratio."""
        out, cur = [], None
        for n in sorted(self.partitions):
            v = flank_ratio_statistic(self.partitions[n], self.preims)
            cur = v if cur is None else min(cur, v)
            out.append(cur)
        return out


def tune_map(template: MapParams, target: ContinuedFraction, depth: int,
             ctx: PrecisionContext) -> MapParams:
    return tune_parameter(template, target, depth, ctx)


def default_template(ell, ctx: PrecisionContext,
                     a="0.0", b="0.1", c="0.5") -> MapParams:
    with ctx:
        return MapParams(CirclePoint.make(mpf(a), ctx),
                         CirclePoint.make(mpf(b), ctx),
                         ctx.mpf(ell), ctx.mpf(c))


def run_pipeline(template: MapParams, target: ContinuedFraction,
                 n_max: int, ctx: PrecisionContext,
                 depth: int | None = None,
                 stages: tuple = ("partition", "scalings", "recurrence",
                                  "dimension"),
                 tuned: MapParams | None = None) -> PipelineResult:
    """Tune to the target prefix and run the requested analysis stages.

    The tuning depth defaults to n_max + 5 so the geometry at the top
    analysed levels is insensitive to the finite rotation bracket.
    """
    depth = n_max + 5 if depth is None else depth
    if depth > len(target):
        raise InvalidParams(
            f"tuning depth {depth} exceeds target prefix {len(target)}")
    if n_max + 2 > depth:
        raise InvalidParams("need depth >= n_max + 2 for the scalings")
    conv = convergents(target)
    if tuned is None:
        tuned = tune_parameter(template, target, depth, ctx)
    m = FlatCircleMap(tuned, ctx)
    res = PipelineResult(tuned.ell, ctx, tuned, m, target, conv, n_max)
    if not stages:
        return res
    res.preims = preimages(m, conv.q[n_max + 2])
    res.orbit = flat_orbit(m, conv.q[n_max])
    if "partition" in stages:
        for n in range(1, n_max + 1):
            res.partitions[n] = build_partition(m, n, conv, res.preims)
    if "scalings" in stages:
        res.scalings = compute_scalings(res.orbit, res.preims, conv,
                                        n_max, ctx)
    if "recurrence" in stages and res.scalings is not None:
        res.recurrence = check_recursion(res.scalings, tuned.ell, conv)
    if "dimension" in stages and res.partitions:
        res.tree = build_measure_tree(res.partitions, conv)
        try:
            res.frostman = frostman_check(res.tree)
        except InsufficientLevels:
            res.frostman = None
        deepest = res.partitions[max(res.partitions)]
        res.box = box_dimension(gap_segments(deepest))
    return res
