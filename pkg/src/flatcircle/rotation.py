"""Continued fractions, convergents, rotation-number tools, tuning.

Rotation targets are finite continued-fraction prefixes: the partition
combinatorics depends only on the prefix, so tuning aims the parameter into
the open interval between the last two convergents, which pins the first
``depth`` partial quotients exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from .errors import InvalidParams, PrecisionExhausted, TuningFailed
from .maps import FlatCircleMap, MapParams
from .precision import PrecisionContext, frac


@dataclass(frozen=True)
class ContinuedFraction:
    partial_quotients: tuple

    def __post_init__(self):
        if not self.partial_quotients:
            raise InvalidParams("empty continued fraction")
        if any(int(a) < 1 or int(a) != a for a in self.partial_quotients):
            raise InvalidParams("partial quotients must be integers >= 1")

    def __len__(self):
        return len(self.partial_quotients)

    @staticmethod
    def parse(text: str) -> "ContinuedFraction":
        return ContinuedFraction(tuple(int(s) for s in text.split(",") if s.strip()))

    def to_csv(self) -> str:
        return ",".join(str(a) for a in self.partial_quotients)


def preset(name: str, length: int = 20) -> ContinuedFraction:
    """Prefab rotation targets used in the experiments."""
    if name == "golden":
        return ContinuedFraction((1,) * length)
    if name == "silver":
        return ContinuedFraction((2,) * length)
    if name == "doubling":
        return ContinuedFraction(tuple(2 ** i for i in range(length)))
    if name == "ten":
        return ContinuedFraction((10,) * length)
    raise InvalidParams(f"unknown preset {name!r}")


@dataclass(frozen=True)
class Convergents:
    """Convergent table p_n/q_n, n = 0..N, with q_{n+1} = a_{n+1} q_n + q_{n-1}."""

    quotients: tuple
    p: tuple
    q: tuple

    def a(self, n: int) -> int:
        return self.quotients[n - 1]

    def fraction(self, n: int) -> Fraction:
        return Fraction(self.p[n], self.q[n])

    def value(self) -> Fraction:
        return self.fraction(len(self.quotients))


def convergents(cf: ContinuedFraction) -> Convergents:
    p = [0, 1]
    q = [1, cf.partial_quotients[0]]
    for a in cf.partial_quotients[1:]:
        p.append(a * p[-1] + p[-2])
        q.append(a * q[-1] + q[-2])
    return Convergents(tuple(cf.partial_quotients), tuple(p), tuple(q))


@dataclass(frozen=True)
class RotationBound:
    lower: mpf
    upper: mpf
    iterations: int


def rotation_bound(m, iterations: int, ctx: PrecisionContext | None = None) -> RotationBound:
    """Bracket [(F^n(0)-1)/n, (F^n(0)+1)/n] intersected over checkpoints."""
    if iterations < 1:
        raise InvalidParams("iterations must be >= 1")
    ctx = ctx or m.ctx
    with ctx:
        x0 = mpmath.mpf(0)
        x = x0
        lower, upper = mpmath.mpf(-2), mpmath.mpf(2)
        checkpoint = 1
        for n in range(1, iterations + 1):
            x = m.eval_lift(x)
            if n == checkpoint or n == iterations:
                lower = max(lower, (x - x0 - 1) / n)
                upper = min(upper, (x - x0 + 1) / n)
                checkpoint *= 2
        return RotationBound(lower, upper, iterations)


def _iterate_displacement(m, x0: mpf, q: int, p: int) -> mpf:
    x = x0
    for _ in range(q):
        x = m.eval_lift(x)
    return x - x0 - p


def compare_rotation(m: FlatCircleMap, p: int, q: int,
                     grid_start: int = 64, grid_cap: int = 2 ** 14) -> str:
    """'above', 'below' or 'equal-or-locked' for rho(f) versus p/q.

    Probes are the flat-interval endpoints, the critical value and a uniform
    grid; monotonicity of F^q certifies the sign between adjacent grid points
    whenever F^q(x_i) - x_{i+1} - p keeps the sign, so the grid doubles only
    while the test stays inconclusive.
    """
    if q < 1:
        raise InvalidParams("q must be >= 1")
    ctx = m.ctx
    with ctx:
        base = [m.params.a.value, m.params.b.value, frac(m.c)]
        grid = grid_start
        while True:
            xs = sorted(set(base + [mpmath.mpf(i) / grid for i in range(grid)]))
            vals = [_iterate_displacement(m, x, q, p) for x in xs]
            signs = [ctx.certify_sign(v) for v in vals]
            if 0 in signs:
                if grid >= grid_cap:
                    raise PrecisionExhausted(
                        f"sign of F^{q} - id - {p} not certifiable")
                grid *= 2
                continue
            if min(signs) < 0 < max(signs):
                return "equal-or-locked"
            n = len(xs)
            if signs[0] > 0:
                # on [x_i, x_{i+1}]: F^q(x) - x - p >= F^q(x_i) - x_{i+1} - p
                nxt = [xs[i + 1] if i + 1 < n else xs[0] + 1 for i in range(n)]
                if grid >= grid_cap or all(vals[i] > nxt[i] - xs[i] for i in range(n)):
                    return "above"
            else:
                # on [x_{i-1}, x_i]: F^q(x) - x - p <= F^q(x_i) - x_{i-1} - p
                prv = [xs[i - 1] if i > 0 else xs[-1] - 1 for i in range(n)]
                if grid >= grid_cap or all(vals[i] < prv[i] - xs[i] for i in range(n)):
                    return "below"
            grid *= 2


def _mediant(r1: Fraction, r2: Fraction) -> Fraction:
    return Fraction(r1.numerator + r2.numerator, r1.denominator + r2.denominator)


def tune_parameter(template: MapParams, target: ContinuedFraction, depth: int,
                   ctx: PrecisionContext) -> MapParams:
    """Pick c so that rho(F_c) lies strictly between the depth-1 and depth
    convergents of the target.

    Nested bisection in c using single-point displacement signs: for a
    monotone degree-one lift, F^q(x0) - x0 - p > 0 at any x0 certifies
    rho >= p/q and < 0 certifies rho <= p/q, and both displacements are
    monotone in c.  Stages sweep the convergent pairs in order so each
    bisection starts from the previous bracket.
    """
    if depth > len(target):
        raise InvalidParams("depth exceeds the target prefix length")
    if depth <= 0:
        return template
    conv = convergents(target)
    with ctx:
        b = template.b.value
        probe = frac(b + (1 - template.flat_interval().length) / 2)
        lo, hi = b, b + 1  # rho = 0 and 1 at the bracket ends
        c_mid = None
        for k in range(1, depth + 1):
            r_lo, r_hi = sorted((conv.fraction(k - 1), conv.fraction(k)))
            if k == depth:
                # last stage: mediants pin rho strictly between the pair;
                # earlier stages keep the full pair so the bands stay nested
                mid_frac = _mediant(r_lo, r_hi)
                r_lo = _mediant(r_lo, mid_frac)
                r_hi = _mediant(mid_frac, r_hi)
            lo, hi, c_mid = _bisect_stage(template, ctx, probe, lo, hi, r_lo, r_hi)
        return MapParams(template.a, template.b, template.ell, c_mid)


def _bisect_stage(template: MapParams, ctx: PrecisionContext, probe: mpf,
                  lo: mpf, hi: mpf, r_lo: Fraction, r_hi: Fraction):
    """Shrink [lo, hi] until its midpoint has rho certified in [r_lo, r_hi]."""
    min_width = mpmath.mpf(2) ** (8 - ctx.bits)
    while hi - lo > min_width:
        mid = (lo + hi) / 2
        m = FlatCircleMap(
            MapParams(template.a, template.b, template.ell, mid), ctx)
        d_lo = _iterate_displacement(m, probe, r_lo.denominator, r_lo.numerator)
        if d_lo <= 0:          # rho(mid) <= r_lo: move up
            lo = mid
            continue
        d_hi = _iterate_displacement(m, probe, r_hi.denominator, r_hi.numerator)
        if d_hi >= 0:          # rho(mid) >= r_hi: move down
            hi = mid
            continue
        return lo, hi, mid     # r_lo <= rho(mid) <= r_hi, strictly inside
    raise TuningFailed(
        f"bisection bracket collapsed below precision near c = {lo}")

def final_bracket(target: ContinuedFraction, depth: int) -> tuple:
    """The rational interval [r_lo, r_hi] certified by tune_parameter."""
    conv = convergents(target)
    r_a, r_b = sorted((conv.fraction(depth - 1), conv.fraction(depth)))
    mid = _mediant(r_a, r_b)
    return _mediant(r_a, mid), _mediant(mid, r_b)


def certify_bracket(m: FlatCircleMap, r_lo: Fraction, r_hi: Fraction,
                    probe=None) -> bool:
    """Single-probe displacement certificate for r_lo <= rho(m) <= r_hi."""
    with m.ctx:
        if probe is None:
            probe = frac(m.b + (1 - m.flat_len) / 2)
        d_lo = _iterate_displacement(m, probe, r_lo.denominator,
                                     r_lo.numerator)
        d_hi = _iterate_displacement(m, probe, r_hi.denominator,
                                     r_hi.numerator)
        return d_lo > 0 and d_hi < 0
