import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatcircle.stats import (last_quarter_variation, linfit, log_decay_fit,
                              stabilized)


def test_linfit_exact_line():
    xs = [0, 1, 2, 3, 4]
    ys = [2 * x + 1 for x in xs]
    fit = linfit(xs, ys)
    assert math.isclose(fit.slope, 2)
    assert math.isclose(fit.intercept, 1)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.predict(10) == pytest.approx(21)


def test_linfit_constant_data():
    fit = linfit([0, 1, 2], [5, 5, 5])
    assert fit.slope == pytest.approx(0)
    assert fit.r2 == 1.0


def test_linfit_noisy_r2_below_one():
    fit = linfit([0, 1, 2, 3], [0, 2, 1, 3])
    assert 0 < fit.r2 < 1


@given(st.floats(-3, -0.1), st.floats(0.1, 10))
def test_log_decay_fit_recovers_rate(rate, c):
    values = [c * math.exp(rate * n) for n in range(10)]
    fit = log_decay_fit(values)
    assert fit.slope == pytest.approx(rate, rel=1e-6)
    assert fit.r2 == pytest.approx(1.0)


def test_log_decay_fit_custom_xs():
    xs = [2, 4, 6]
    values = [math.exp(-x) for x in xs]
    fit = log_decay_fit(values, xs)
    assert fit.slope == pytest.approx(-1.0)


def test_stabilized_flat_tail():
    values = [5.0, 3.0, 1.2, 1.0, 1.01, 1.0, 0.99, 1.0]
    assert stabilized(values)


def test_not_stabilized_when_still_moving():
    values = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]
    assert not stabilized(values)


def test_last_quarter_variation():
    values = [9.0] * 12 + [1.0, 1.0, 1.0, 1.2]
    v = last_quarter_variation(values)
    assert 0 < v < 0.25


def test_last_quarter_variation_constant():
    assert last_quarter_variation([3.0] * 8) == 0
