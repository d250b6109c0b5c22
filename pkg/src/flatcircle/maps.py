"""Circle maps in normal form with a flat interval.

The increasing branch is ``F(x) = c + Phi((x - b)/L)`` on ``[b, b + L]``
(``L = 1 - |U|``) and ``F`` is the constant ``c`` on the flat interval.
``Phi`` is the normalized two-sided power profile

    Phi'(t) = t^(l-1) (1-t)^(l-1) / N(l),   N(l) = B(l, l),

which vanishes to order exactly ``l - 1`` at both endpoints, so the map
has the prescribed singularity ``x^l`` at the boundary of the flat piece.

``Phi`` is the regularized incomplete beta I_t(l, l).  Three evaluation
routes are used depending on ``l``: an exact polynomial for integer ``l``,
an arcsine-based raising recurrence for half-integer ``l``, and a power
series otherwise.  All three agree to working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from .circle import Arc, CirclePoint
from .errors import FlatValue, InvalidEigenvalues, InvalidParams, PrecisionExhausted
from .precision import PrecisionContext, frac


# ---------------------------------------------------------------------------
# boundary profile


class _PolyProfile:
    """Phi for integer l: a polynomial with exact rational coefficients."""

    def __init__(self, ell: int, ctx: PrecisionContext):
        n = ell - 1
        norm = Fraction(math.factorial(n) * math.factorial(n),
                        math.factorial(2 * n + 1))
        # Phi(t) = t^ell * sum_k coeff[k] t^k
        coeffs = [Fraction(math.comb(n, k) * (-1) ** k, ell + k) / norm
                  for k in range(n + 1)]
        with ctx:
            self.ell = mpmath.mpf(ell)
            self.inv_norm = mpmath.mpf(norm.denominator) / norm.numerator
            self.coeffs = [mpmath.mpf(c.numerator) / c.denominator
                           for c in coeffs]
        self._int_ell = ell

    def phi(self, t: mpf) -> mpf:
        acc = mpmath.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc * t ** self._int_ell

    def dphi(self, t: mpf) -> mpf:
        return (t * (1 - t)) ** (self._int_ell - 1) * self.inv_norm


class _HalfIntegerProfile:
    """Phi for l = m + 1/2 via the incomplete-beta raising recurrences.

    Starting from I_t(1/2, 1/2) = (2/pi) asin(sqrt(t)), each step raises one
    parameter:  I(a+1, b) = I(a, b) - t^a (1-t)^b / (a B(a, b)).
    """

    def __init__(self, ell, ctx: PrecisionContext):
        with ctx:
            self.ell = mpmath.mpf(ell)
            m = int(mpmath.nint(self.ell - mpmath.mpf(1) / 2))
            half = mpmath.mpf(1) / 2
            steps = []  # (a, b, 1/(a*B(a,b)), sign) applied in order
            a, b = half, half
            for _ in range(m):
                steps.append((a, b, -1 / (a * mpmath.beta(a, b)), "a"))
                a = a + 1
                steps.append((a, b, 1 / (b * mpmath.beta(a, b)), "b"))
                b = b + 1
            self.steps = steps
            self.inv_norm = 1 / mpmath.beta(self.ell, self.ell)

    def phi(self, t: mpf) -> mpf:
        if t <= 0:
            return mpmath.mpf(0)
        if t >= 1:
            return mpmath.mpf(1)
        val = 2 / mpmath.pi * mpmath.asin(mpmath.sqrt(t))
        for a, b, coef, _which in self.steps:
            val = val + coef * t ** a * (1 - t) ** b
        return val

    def dphi(self, t: mpf) -> mpf:
        if t <= 0 or t >= 1:
            return mpmath.mpf(0)
        return (t * (1 - t)) ** (self.ell - 1) * self.inv_norm


class _SeriesProfile:
    """Generic l > 1: symmetric power series for the incomplete beta.

    B(t; l, l) = t^l sum_k (1-l)_k / (k! (l+k)) t^k for t <= 1/2, with the
    reflection Phi(1-t) = 1 - Phi(t) covering the other half.
    """

    def __init__(self, ell, ctx: PrecisionContext):
        self.ctx = ctx
        with ctx:
            self.ell = mpmath.mpf(ell)
            self.inv_norm = 1 / mpmath.beta(self.ell, self.ell)

    def _series(self, t: mpf) -> mpf:
        # assumes 0 < t <= 1/2
        tol = mpmath.mpf(2) ** (-self.ctx.bits - 8)
        acc = 1 / self.ell
        poch = mpmath.mpf(1)
        tk = mpmath.mpf(1)
        k = 0
        while True:
            k += 1
            poch = poch * (k - self.ell) / k
            tk = tk * t
            term = poch * tk / (self.ell + k)
            acc = acc + term
            if abs(term) < tol * abs(acc) and k > 4:
                break
            if k > 100000:
                raise PrecisionExhausted("profile series did not converge")
        return acc * t ** self.ell * self.inv_norm

    def phi(self, t: mpf) -> mpf:
        if t <= 0:
            return mpmath.mpf(0)
        if t >= 1:
            return mpmath.mpf(1)
        if t <= mpmath.mpf(1) / 2:
            return self._series(t)
        return 1 - self._series(1 - t)

    def dphi(self, t: mpf) -> mpf:
        if t <= 0 or t >= 1:
            return mpmath.mpf(0)
        return (t * (1 - t)) ** (self.ell - 1) * self.inv_norm


def make_profile(ell, ctx: PrecisionContext):
    with ctx:
        e = mpmath.mpf(ell)
        if e <= 1:
            raise InvalidParams(f"critical exponent must exceed 1, got {e}")
        if e == mpmath.floor(e):
            return _PolyProfile(int(e), ctx)
        if 2 * e == mpmath.floor(2 * e):
            return _HalfIntegerProfile(e, ctx)
        return _SeriesProfile(e, ctx)


# ---------------------------------------------------------------------------
# map family


@dataclass(frozen=True)
class MapParams:
    """Flat interval (a, b), critical exponent and height of the plateau."""

    a: CirclePoint
    b: CirclePoint
    ell: mpf
    c: mpf  # lift value of the plateau; only c mod 1 matters on the circle

    def flat_interval(self) -> Arc:
        return Arc.ordered(self.a, self.b)

    def validate(self):
        u = self.flat_interval().length
        if not 0 < u < 1:
            raise InvalidParams(f"flat interval width {u} outside (0, 1)")
        if not self.ell > 1:
            raise InvalidParams(f"critical exponent {self.ell} must be > 1")


class FlatCircleMap:
    """Immutable class-L map in normal form; evaluation via the lift."""

    def __init__(self, params: MapParams, ctx: PrecisionContext):
        params.validate()
        self.params = params
        self.ctx = ctx
        with ctx:
            self.b = mpmath.mpf(params.b.value)
            self.flat_len = params.flat_interval().length
            self.branch_len = 1 - self.flat_len  # L
            self.c = mpmath.mpf(params.c)
        self.profile = make_profile(params.ell, ctx)
        self.flat = params.flat_interval()

    # -- lift -------------------------------------------------------------

    def eval_lift(self, x) -> mpf:
        with self.ctx:
            x = mpmath.mpf(x)
            k = mpmath.floor(x - self.b)
            y = x - k  # in [b, b+1)
            t = (y - self.b) / self.branch_len
            if t >= 1:
                return self.c + 1 + k
            return self.c + self.profile.phi(t) + k

    def eval_circle(self, p: CirclePoint) -> CirclePoint:
        with self.ctx:
            return CirclePoint(frac(self.eval_lift(p.value)))

    def derivative(self, x) -> mpf:
        with self.ctx:
            x = mpmath.mpf(x)
            y = x - mpmath.floor(x - self.b)
            t = (y - self.b) / self.branch_len
            if t >= 1:
                return mpmath.mpf(0)
            return self.profile.dphi(t) / self.branch_len

    # -- inverse ----------------------------------------------------------

    def invert_profile(self, w: mpf) -> mpf:
        """The unique t in [0,1] with Phi(t) = w, to working precision."""
        with self.ctx:
            if w <= 0:
                return mpmath.mpf(0)
            if w >= 1:
                return mpmath.mpf(1)
            lo, hi = mpmath.mpf(0), mpmath.mpf(1)
            # coarse bisection to get a Newton-safe bracket
            for _ in range(48):
                mid = (lo + hi) / 2
                if self.profile.phi(mid) < w:
                    lo = mid
                else:
                    hi = mid
            t = (lo + hi) / 2
            tol = mpmath.mpf(2) ** (4 - self.ctx.bits)
            dmin = mpmath.mpf(2) ** (-(self.ctx.bits // 4))
            for _ in range(self.ctx.bits):
                d = self.profile.dphi(t)
                if d < dmin:
                    break
                step = (self.profile.phi(t) - w) / d
                t_new = t - step
                if not lo <= t_new <= hi:
                    t_new = (lo + hi) / 2
                if self.profile.phi(t_new) < w:
                    lo = t_new
                else:
                    hi = t_new
                if abs(t_new - t) < tol * max(t, tol):
                    return t_new
                t = t_new
            # pure bisection fallback near the flat endpoints
            while hi - lo > tol * max(lo, tol):
                mid = (lo + hi) / 2
                if self.profile.phi(mid) < w:
                    lo = mid
                else:
                    hi = mid
            return (lo + hi) / 2

    def inverse_branch(self, y: CirclePoint, side: str | None = None) -> CirclePoint:
        """Preimage on the increasing branch (b, a+1); FlatValue at y = c."""
        with self.ctx:
            w = frac(y.value - self.c)
            if w == 0:
                if side == "right":
                    return self.params.b
                if side == "left":
                    return self.params.a
                raise FlatValue("y equals the critical value; request a side")
            t = self.invert_profile(w)
            return CirclePoint(frac(self.b + t * self.branch_len))

    def pullback(self, arc: Arc) -> Arc:
        """f^{-1} of an arc not containing the critical value in its interior."""
        return Arc.ordered(self.inverse_branch(arc.left, side="left"),
                           self.inverse_branch(arc.right, side="right"))

    def critical_value(self) -> CirclePoint:
        with self.ctx:
            return CirclePoint(frac(self.c))

    def with_c(self, c) -> "FlatCircleMap":
        p = self.params
        return FlatCircleMap(MapParams(p.a, p.b, p.ell, self.ctx.mpf(c)), self.ctx)

    # -- serialization ----------------------------------------------------

    def to_text(self) -> str:
        from .reporting import mpf_to_hex
        p = self.params
        lines = [
            f"a = {mpf_to_hex(p.a.value)}",
            f"b = {mpf_to_hex(p.b.value)}",
            f"ell = {mpf_to_hex(p.ell)}",
            f"c = {mpf_to_hex(p.c)}",
            f"precision_bits = {self.ctx.bits}",
        ]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "FlatCircleMap":
        from .reporting import hex_to_mpf
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
        ctx = PrecisionContext(int(kv["precision_bits"]))
        with ctx:
            params = MapParams(CirclePoint(hex_to_mpf(kv["a"])),
                               CirclePoint(hex_to_mpf(kv["b"])),
                               hex_to_mpf(kv["ell"]), hex_to_mpf(kv["c"]))
        return FlatCircleMap(params, ctx)


def build_map(params: MapParams, ctx: PrecisionContext) -> FlatCircleMap:
    return FlatCircleMap(params, ctx)


class RigidRotation:
    """Rotation lift x -> x + rho; oracle for order and distortion checks."""

    def __init__(self, rho, ctx: PrecisionContext):
        self.ctx = ctx
        with ctx:
            self.rho = mpmath.mpf(rho)

    def eval_lift(self, x) -> mpf:
        with self.ctx:
            return mpmath.mpf(x) + self.rho

    def eval_circle(self, p: CirclePoint) -> CirclePoint:
        with self.ctx:
            return CirclePoint(frac(p.value + self.rho))

    def derivative(self, x) -> mpf:
        return self.ctx.mpf(1)


def from_cherry_eigenvalues(lambda1, lambda2, template: MapParams,
                            ctx: PrecisionContext) -> MapParams:
    """Map saddle eigenvalues to the critical exponent |lambda2|/lambda1."""
    with ctx:
        l1, l2 = mpmath.mpf(lambda1), mpmath.mpf(lambda2)
        if not (l1 > 0 > l2):
            raise InvalidEigenvalues(
                f"need lambda1 > 0 > lambda2, got ({l1}, {l2})")
        return MapParams(template.a, template.b, abs(l2) / l1, template.c)
