"""Scaling ratios of the critical orbit geometry.

All ratios compare distances between the flat interval U, its forward
orbit points f^{q_n}(U) and its preimages f^{-i}(U), with the bracket
conventions of :mod:`flatcircle.circle`:

    tau_n   = |(U, q_n)| / |(U, q_{n-2})|          (degeneracy indicator)
    alpha_n = |(-q_n, U)| / |[-q_n, U)|
    k_n     = |(U, q_n)| / |(U, -q_{n-1})|
    sigma_n = |(U, q_n)| / |(U, q_{n-1})|
    s_n     = |[-q_{n-2}, U]| / |U|
    beta_n(i)  = |(-q_n-(a_{n+2}-i)q_{n+1}, U)| / |[same, U)|
    gamma_n(i) = |[-q_n-(a_{n+2}-i)q_{n+1}, U)| / |(-q_n-(a_{n+2}-i-1)q_{n+1}, U)|

with the shorthands beta_n = beta_n(a_{n+2}-1) and nu_n = -ln beta_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
from mpmath import mpf

from .circle import interval_gap_dist, point_interval_dist
from .errors import InsufficientData
from .partition import FlatOrbit, PreimageSet
from .precision import PrecisionContext
from .rotation import Convergents


@dataclass(frozen=True)
class ScalingSeries:
    n_min: int
    n_max: int
    conv: Convergents
    tau: dict = field(default_factory=dict)
    alpha: dict = field(default_factory=dict)
    k: dict = field(default_factory=dict)
    sigma: dict = field(default_factory=dict)
    s: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)     # keyed (n, i)
    gamma: dict = field(default_factory=dict)    # keyed (n, i)
    gap_comparability: dict = field(default_factory=dict)

    def beta_short(self, n: int) -> mpf:
        return self.beta[(n, self.conv.a(n + 2) - 1)]

    def nu(self, n: int) -> mpf:
        return -mpmath.ln(self.beta_short(n))

    def ns(self):
        return range(self.n_min, self.n_max + 1)


def compute_scalings(orbit: FlatOrbit, preims: PreimageSet,
                     conv: Convergents, n_max: int,
                     ctx: PrecisionContext) -> ScalingSeries:
    """All scaling sequences for n in [2, n_max]."""
    if n_max < 2:
        raise InsufficientData("need n_max >= 2")
    if n_max + 2 > len(conv.q) - 1:
        raise InsufficientData("continued-fraction prefix too short")
    if conv.q[n_max] > len(orbit):
        raise InsufficientData(
            f"orbit has {len(orbit)} points, need {conv.q[n_max]}")
    deepest = conv.q[n_max + 2]
    if deepest >= len(preims):
        raise InsufficientData(
            f"have {len(preims)} preimages, need {deepest + 1}")
    u = preims.interval(0)
    series = ScalingSeries(2, n_max, conv)

    def d_point(qi: int) -> mpf:
        # |(U, q_i)|
        return point_interval_dist(orbit.point(qi), u, "closer", ctx)

    def d_gap(i: int, mode: str) -> mpf:
        # |(-i, U)| and bracket variants; first slot is the preimage
        return interval_gap_dist(preims.interval(i), u, mode, ctx)

    with ctx:
        for n in series.ns():
            q = conv.q
            series.tau[n] = d_point(q[n]) / d_point(q[n - 2])
            series.sigma[n] = d_point(q[n]) / d_point(q[n - 1])
            series.alpha[n] = (d_gap(q[n], "open-open") /
                               d_gap(q[n], "closed-open"))
            series.k[n] = d_point(q[n]) / d_gap(q[n - 1], "open-open")
            series.s[n] = d_gap(q[n - 2], "closed-closed") / u.length
            a_next = conv.a(n + 2)
            for i in range(a_next):
                idx = q[n] + (a_next - i) * q[n + 1]
                series.beta[(n, i)] = (d_gap(idx, "open-open") /
                                       d_gap(idx, "closed-open"))
                idx2 = q[n] + (a_next - i - 1) * q[n + 1]
                series.gamma[(n, i)] = (d_gap(idx, "closed-open") /
                                        d_gap(idx2, "open-open"))
            # gap-to-preimage comparability at the return preimage
            ret = q[n] + q[n + 1]
            series.gap_comparability[n] = (preims.interval(ret).length /
                                         d_gap(ret, "closed-open"))
    return series


def scaling_rows(series: ScalingSeries):
    """Rows (n, a_n, q_n, tau, alpha, k, sigma, s, beta, gamma) for export."""
    rows = []
    for n in series.ns():
        a_next = series.conv.a(n + 2)
        rows.append((n, series.conv.a(n), series.conv.q[n],
                     series.tau[n], series.alpha[n], series.k[n],
                     series.sigma[n], series.s[n],
                     series.beta[(n, a_next - 1)],
                     series.gamma[(n, a_next - 1)]))
    return rows
