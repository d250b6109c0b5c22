import mpmath
import pytest

from flatcircle.errors import InsufficientData
from flatcircle.scalings import compute_scalings, scaling_rows


def test_series_range(small_run):
    s = small_run.scalings
    assert s.n_min == 2
    assert s.n_max == small_run.n_max
    assert list(s.ns()) == list(range(2, small_run.n_max + 1))


def test_all_ratios_positive(small_run):
    s = small_run.scalings
    for n in s.ns():
        for d in (s.tau, s.alpha, s.k, s.sigma, s.s):
            assert d[n] > 0


def test_tau_below_one(small_run):
    # |(0, q_n)| < |(0, q_{n-2})|: the distances to U shrink along
    # denominator times
    s = small_run.scalings
    assert all(s.tau[n] < 1 for n in s.ns())


def test_beta_gamma_grids(small_run):
    s = small_run.scalings
    for n in s.ns():
        a_next = s.conv.a(n + 2)
        for i in range(a_next):
            assert 0 < s.beta[(n, i)] < 1
            assert s.gamma[(n, i)] > 0


def test_beta_short_is_last_index(small_run):
    s = small_run.scalings
    for n in s.ns():
        a_next = s.conv.a(n + 2)
        assert s.beta_short(n) == s.beta[(n, a_next - 1)]


def test_nu_is_log_of_beta(small_run):
    s = small_run.scalings
    with small_run.ctx:
        for n in s.ns():
            assert abs(s.nu(n) + mpmath.ln(s.beta_short(n))) < 1e-40


def test_alpha_dominates_tau_for_steep_maps(small_run):
    # for ell >= 3 the closed-interval ratio exceeds the open one
    s = small_run.scalings
    assert all(s.alpha[n] > s.tau[n] for n in s.ns())


def test_sigma_chain_consistency(small_run, ctx):
    # tau_n = sigma_n * sigma_{n-1} by definition of the one-step ratios
    s = small_run.scalings
    with ctx:
        for n in s.ns():
            if n - 1 in s.sigma:
                assert abs(s.tau[n] - s.sigma[n] * s.sigma[n - 1]) < 1e-40


def test_rows_align_with_ns(small_run):
    rows = scaling_rows(small_run.scalings)
    assert [r[0] for r in rows] == list(small_run.scalings.ns())
    assert all(len(r) == 10 for r in rows)


def test_too_few_levels_rejected(small_run, ctx):
    with pytest.raises(InsufficientData):
        compute_scalings(small_run.orbit, small_run.preims, small_run.conv,
                         1, ctx)
