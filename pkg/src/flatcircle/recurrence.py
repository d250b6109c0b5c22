"""The recurrence for nu_n = -ln beta_n and its matrix analysis.

The central inequality

    nu_n - (1/l + (1 - l^(-a_{n+1}))/(l - 1)) nu_{n-1} - l^(-a_n) nu_{n-2} <= K1

unrolls into component-wise bounds on v_n = (nu_n, nu_{n-1}) through
products of the nonnegative matrices

    A_l(n) = [[1/l + (1 - l^(-a_{n+1}))/(l - 1), l^(-a_n)], [1, 0]].

Boundedness of nu_n (for l >= 3) follows from decay of the product norms,
which in turn reduces to a case analysis over the classification of each
factor as B (both neighbouring quotients small), U1 (next quotient large)
or U2 (current quotient large).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
from mpmath import mpf

from .errors import InsufficientData, InvalidParams
from .rotation import Convergents
from .scalings import ScalingSeries
from .stats import LineFit, last_quarter_variation, linfit


@dataclass(frozen=True)
class Matrix2:
    """A 2x2 matrix with nonnegative entries."""

    m11: mpf
    m12: mpf
    m21: mpf
    m22: mpf

    def __post_init__(self):
        for v in (self.m11, self.m12, self.m21, self.m22):
            if v < 0:
                raise InvalidParams("matrix entries must be nonnegative")

    def __matmul__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22)

    def norm_inf(self) -> mpf:
        return max(self.m11 + self.m12, self.m21 + self.m22)

    def apply(self, v: tuple) -> tuple:
        return (self.m11 * v[0] + self.m12 * v[1],
                self.m21 * v[0] + self.m22 * v[1])

    def spectral_radius(self) -> mpf:
        tr = self.m11 + self.m22
        det = self.m11 * self.m22 - self.m12 * self.m21
        disc = tr * tr - 4 * det
        if disc >= 0:
            r = mpmath.sqrt(disc)
            return max(abs(tr + r), abs(tr - r)) / 2
        return mpmath.sqrt(det)

    def dominates(self, other: "Matrix2") -> bool:
        return (self.m11 >= other.m11 and self.m12 >= other.m12 and
                self.m21 >= other.m21 and self.m22 >= other.m22)


IDENTITY = Matrix2(mpf(1), mpf(0), mpf(0), mpf(1))


def build_matrix(ell, a_next: int, a_cur: int) -> Matrix2:
    """A_l(n) for quotients a_{n+1} = a_next, a_n = a_cur."""
    ell = mpmath.mpf(ell)
    if ell <= 1 or a_next < 1 or a_cur < 1:
        raise InvalidParams("need l > 1 and positive quotients")
    top_left = 1 / ell + (1 - ell ** (-a_next)) / (ell - 1)
    return Matrix2(top_left, ell ** mpf(-a_cur), mpf(1), mpf(0))


def estimate_matrix(ell, a_next: int, a_cur: int, M: int = 10) -> Matrix2:
    """The sharper envelope used in the product analysis.

    When both neighbouring quotients are below M the top-left coefficient
    improves to (1 - l^(-a_{n+1}))/(l - 1); otherwise the generic form
    applies.  Products of these envelopes decay geometrically for l >= 3,
    which is what bounds nu_n.
    """
    ell = mpmath.mpf(ell)
    if a_next < M and a_cur < M:
        top_left = (1 - ell ** (-a_next)) / (ell - 1)
        return Matrix2(top_left, ell ** mpf(-a_cur), mpf(1), mpf(0))
    return build_matrix(ell, a_next, a_cur)


def classify(a_values, M: int) -> tuple[str, ...]:
    """Label each index j by its quotients: U2 if a_j >= M (takes
    precedence so products terminate in a U2), U1 if a_{j+1} >= M, else B.

    ``a_values[j]`` = a_j; the last index has no successor and never gets U1.
    """
    if M <= 1:
        raise InvalidParams("threshold M must exceed 1")
    labels = []
    for j, a in enumerate(a_values):
        a_next = a_values[j + 1] if j + 1 < len(a_values) else 0
        if a >= M:
            labels.append("U2")
        elif a_next >= M:
            labels.append("U1")
        else:
            labels.append("B")
    return tuple(labels)


def product_norm(matrices) -> mpf:
    """||M_n ... M_i||_inf for the list [M_i, ..., M_n]."""
    ms = list(matrices)
    if not ms:
        raise InsufficientData("empty matrix product")
    prod = ms[0]
    for m in ms[1:]:
        prod = m @ prod
    return prod.norm_inf()


# --- the worst-case envelope matrices of the case analysis (l >= 3) -------

W = Matrix2(mpf(1) / 2, mpf(1) / 3, mpf(1), mpf(0))


def u1_envelope(b: mpf) -> Matrix2:
    # a_{j+1} >= M makes the top-left at most 1/l + 1/(l-1) <= 5/6
    return Matrix2(mpf(5) / 6, b, mpf(1), mpf(0))


def u2_envelope(b: mpf, eps: mpf) -> Matrix2:
    # a_j >= M makes the top-right entry l^(-a_j) <= eps
    return Matrix2(mpf(1) / 3 + (1 - b) / 2, eps, mpf(1), mpf(0))


@dataclass(frozen=True)
class BoundsReport:
    rho_w: mpf
    worst_u1u2: mpf
    worst_u2u2: mpf
    worst_chain_excess: mpf     # max over chains of norm / bound; <= 1 iff ok
    norm_eps_drift: mpf         # continuity of the U2 norms in eps
    samples: int

    @property
    def ok(self) -> bool:
        # 8/9 is attained exactly at b = 1/l; allow rounding at the endpoint
        tol = mpf(2) ** -40
        return (self.rho_w < 1 and self.worst_u1u2 <= mpf(8) / 9 + tol and
                self.worst_u2u2 <= mpf(5) / 6 + tol and
                self.worst_chain_excess <= 1 + tol)


def verify_matrix_bounds(ell, samples: int = 1000, M: int = 10,
                        chain_max: int = 12) -> BoundsReport:
    """Worst-case norms over a grid of admissible b values (l >= 3).

    Checks ||U1 U2|| <= 8/9, ||U2 U2|| <= 5/6 in the eps -> 0 limit,
    the U1 B...B U2 chain bounds (8/9)^((n1-2)/2) for even n1 and
    (35/36)^((n1-1)/2) for odd n1, and the spectral radius of W.
    """
    ell = mpmath.mpf(ell)
    if ell < 3:
        raise InvalidParams("the case analysis assumes l >= 3")
    lo = mpmath.mpf(0)
    step = (1 / ell) / samples
    worst_u1u2 = mpf(0)
    worst_u2u2 = mpf(0)
    zero = mpf(0)
    for k in range(1, samples + 1):
        b = lo + k * step
        u1u2 = u1_envelope(b) @ u2_envelope(b, zero)
        u2u2 = u2_envelope(b, zero) @ u2_envelope(b, zero)
        worst_u1u2 = max(worst_u1u2, u1u2.norm_inf())
        worst_u2u2 = max(worst_u2u2, u2u2.norm_inf())
    # U1 B^(n1-2) U2 chains at the worst admissible b
    b_worst = 1 / ell
    worst_excess = mpf(0)
    for n1 in range(2, chain_max + 1):
        chain = [u2_envelope(b_worst, zero)]
        chain += [W] * (n1 - 2)
        chain.append(u1_envelope(b_worst))
        norm = product_norm(chain)
        if n1 % 2 == 0:
            bound = (mpf(8) / 9) ** ((n1 - 2) / mpf(2))
        else:
            bound = (mpf(35) / 36) ** ((n1 - 1) / mpf(2))
        worst_excess = max(worst_excess, norm / bound)
    # continuity in eps: compare the eps = l^(-M) norms with the limit
    eps = ell ** mpf(-M)
    drift = mpf(0)
    while eps > mpf(2) ** -64:
        u1u2 = u1_envelope(b_worst) @ u2_envelope(b_worst, eps)
        drift = max(drift, u1u2.norm_inf() - worst_u1u2)
        eps /= 2
    return BoundsReport(W.spectral_radius(), worst_u1u2, worst_u2u2,
                        worst_excess, drift, samples)


@dataclass(frozen=True)
class RecurrenceData:
    ell: mpf
    nu: dict
    matrices: dict              # n -> A_l(n)
    residuals: dict             # n -> r_n
    k1: mpf                     # max residual: the measured K1
    residual_variation: float   # last-quarter variation of r_n
    product_norm_fit: LineFit   # log ||prod_{j=i}^n A(j)|| vs n - i
    implied_constants: dict = field(default_factory=dict)


def check_recursion(series: ScalingSeries, ell, conv: Convergents,
                    M: int = 10) -> RecurrenceData:
    """Residuals of the nu recurrence plus the lower-bound implied
    constants:

        r_n  = nu_n - (1/l + (1-l^(-a_{n+1}))/(l-1)) nu_{n-1}
                    - l^(-a_n) nu_{n-2}
        K(k_n)     from k_n     >= K beta_{n-1}^((1-l^(-a_{n+1}-1))/(1-1/l))
        K(alpha_n) from alpha_n >= K beta_{n-1}^(l(1-l^(-a_{n+1}))/(l-1))
                                     * beta_{n-2}^(l^(1-a_n))
        K(beta_n)  from beta_n  >= K beta_{n-1}^(1/l) alpha_n^(1/l)
    """
    ell = mpmath.mpf(ell)
    ns = [n for n in series.ns() if n - 2 >= series.n_min]
    if len(ns) < 3:
        raise InsufficientData("need nu_n for at least five levels")
    nu = {n: series.nu(n) for n in series.ns()}
    matrices = {}
    residuals = {}
    implied = {"k": {}, "alpha": {}, "beta": {}}
    for n in ns:
        a_next, a_cur = conv.a(n + 1), conv.a(n)
        mat = build_matrix(ell, a_next, a_cur)
        matrices[n] = mat
        coeff = mat.m11
        residuals[n] = nu[n] - coeff * nu[n - 1] - mat.m12 * nu[n - 2]
        beta1 = series.beta_short(n - 1)
        beta2 = series.beta_short(n - 2)
        expo_k = (1 - ell ** mpf(-a_next - 1)) / (1 - 1 / ell)
        implied["k"][n] = series.k[n] / beta1 ** expo_k
        expo_a = ell * (1 - ell ** mpf(-a_next)) / (ell - 1)
        implied["alpha"][n] = (series.alpha[n] /
                               (beta1 ** expo_a *
                                beta2 ** (ell ** mpf(1 - a_cur))))
        implied["beta"][n] = (series.beta_short(n) /
                              (beta1 * series.alpha[n]) ** (1 / ell))
    k1 = max(residuals.values())
    variation = last_quarter_variation([residuals[n] for n in ns])
    # product-norm decay with the sharper envelopes:
    # ||prod_{j=i}^n A(j)|| vs window length
    envelopes = {n: estimate_matrix(ell, conv.a(n + 1), conv.a(n), M)
                 for n in ns}
    n_top = ns[-1]
    xs, ys = [], []
    for i in ns:
        if i >= n_top:
            break
        norm = product_norm([envelopes[j] for j in range(i, n_top + 1)])
        xs.append(n_top - i)
        ys.append(mpmath.ln(norm))
    fit = linfit(xs, ys)
    return RecurrenceData(ell, nu, matrices, residuals, k1, variation,
                          fit, implied)


@dataclass(frozen=True)
class AppendixComponents:
    """The sigma-free ingredients of the alpha_n upper bound."""

    s: dict                     # s_n
    sigma: dict                 # sigma_n
    sum_c: dict                 # n -> sum_{k=1}^{q_{n-2}-1} |f^(-k)(U)|
    sum_k: dict                 # (n, i) -> the K_{i,n} orbit sum
    tau_max: dict               # (n, i) -> tau_{i,n}
    rho_max: dict               # n -> rho_n
    m_tilde: dict               # n -> M-tilde with the fitted C_n stand-in
    containment_failures: tuple
    total_sum_by_level: dict    # n -> sum_i sum_k; should decay geometrically


def appendix_components(series: ScalingSeries, preims, orbit, partitions,
                        conv: Convergents, n_max: int, ctx, ell,
                        sigma_hat: float = 1.0) -> AppendixComponents:
    """Every measurable ingredient of the alpha_n upper bound.

    ``sigma_hat`` stands in for the abstract distortion modulus when
    forming C_n = exp(sigma(rho_n) * sum); the sums and maxima themselves
    are exact. Uses f^j(f^(-i)(U)) = f^(-(i-j))(U) to turn each orbit sum
    into a partial sum of preimage lengths.
    """
    from .circle import point_interval_dist

    s, sig, sum_c, sum_k = {}, {}, {}, {}
    tau_max, rho_max, m_tilde, totals = {}, {}, {}, {}
    failures = []
    with ctx:
        for n in series.ns():
            if n > n_max:
                break
            s[n] = series.s[n]
            sig[n] = series.sigma[n]
            q = conv.q
            if q[n - 2] - 1 >= len(preims) or q[n] >= len(preims):
                raise InsufficientData("preimage set too small")
            sum_c[n] = mpmath.fsum(preims.interval(k).length
                                   for k in range(1, q[n - 2]))
            a_n = conv.a(n)
            total = mpmath.mpf(0)
            for i in range(a_n):
                start = q[n] - i * q[n - 1] - 1
                idxs = range(max(start - q[n - 1] + 2, 0), start + 1)
                sk = mpmath.fsum(preims.interval(k).length for k in idxs)
                sum_k[(n, i)] = sk
                total += sk
                if q[n - 1] >= 2 and i * q[n - 1] + q[n - 1] - 1 <= len(orbit):
                    tau_max[(n, i)] = max(
                        point_interval_dist(
                            orbit.point(i * q[n - 1] + 1 + j),
                            preims.interval(q[n - 1] - 1 - j),
                            "farther", ctx)
                        for j in range(q[n - 1] - 1))
            totals[n] = total
            if (q[n - 2] >= 2 and
                    a_n * q[n - 1] + q[n - 2] - 1 <= len(orbit)):
                from .circle import Arc
                rho_max[n] = max(
                    Arc.ordered(orbit.point(a_n * q[n - 1] + 1 + j),
                                orbit.point(1 + j)).length
                    for j in range(q[n - 2] - 1))
            # containment: the total K-sum fits inside one gap of P_{n-2}
            if n - 2 in partitions:
                if totals[n] > partitions[n - 2].max_gap_length():
                    failures.append(
                        f"n={n}: K-sums exceed the largest gap of the "
                        f"level-{n - 2} partition")
            if n - 2 >= series.n_min and n in rho_max:
                c_hat = mpmath.exp(sigma_hat * rho_max[n] * sum_c[n])
                m_tilde[n] = _m_tilde(series, n, c_hat, mpmath.mpf(ell))
    return AppendixComponents(s, sig, sum_c, sum_k, tau_max, rho_max,
                              m_tilde, tuple(failures), totals)


def _m_tilde(series: ScalingSeries, n: int, c_hat: mpf, ell: mpf) -> mpf:
    """s_{n-1}^2 (2/l) / (1 + sqrt(1 - 2(l-1)/l C s_{n-1} alpha_{n-1}))
    / (1 - alpha_{n-2}) * sigma_n / sigma_{n-2}, radicand clamped at 0."""
    radicand = 1 - (2 * (ell - 1) / ell) * c_hat * series.s[n - 1] * \
        series.alpha[n - 1]
    root = mpmath.sqrt(max(radicand, mpmath.mpf(0)))
    return (series.s[n - 1] ** 2 * (2 / ell) / (1 + root) /
            (1 - series.alpha[n - 2]) *
            series.sigma[n] / series.sigma[n - 2])
