import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatcircle.circle import (Arc, CirclePoint, interval_gap_dist,
                               point_interval_dist, shortest_dist)
from flatcircle.errors import (InvalidParams, OverlappingIntervals,
                               PointInsideInterval)
from flatcircle.precision import PrecisionContext

CTX = PrecisionContext(bits=128)

unit = st.floats(0, 1, exclude_max=True, allow_nan=False)


def pt(x):
    return CirclePoint.make(x, CTX)


@given(unit)
def test_make_normalizes(x):
    with CTX:
        p = CirclePoint.make(mpmath.mpf(x) + 3, CTX)
        assert 0 <= p.value < 1
        assert abs(p.value - mpmath.mpf(x)) < CTX.eps * 8


def test_lift_above():
    with CTX:
        p = pt("0.2")
        lifted = p.lift_above(mpmath.mpf("0.5"))
        assert lifted == mpmath.mpf("1.2")
        assert pt("0.7").lift_above(mpmath.mpf("0.5")) == mpmath.mpf("0.7")


def test_arc_length_wraps():
    with CTX:
        a = Arc.ordered(pt("0.9"), pt("0.1"))
        assert abs(a.length - mpmath.mpf("0.2")) < 1e-30


def test_arc_contains():
    a = Arc.ordered(pt("0.9"), pt("0.1"))
    assert a.contains(pt("0.95"))
    assert a.contains(pt("0.05"))
    assert not a.contains(pt("0.5"))
    assert not a.contains(pt("0.9"))
    assert a.contains(pt("0.9"), closed=True)


def test_arc_shortest_picks_short_side():
    a = Arc.shortest(pt("0.1"), pt("0.8"))
    assert a.length <= mpmath.mpf("0.5")


def test_midpoint_inside():
    a = Arc.ordered(pt("0.9"), pt("0.2"))
    assert a.contains(a.midpoint())


@given(unit, unit)
def test_shortest_dist_symmetric(x, y):
    d1 = shortest_dist(pt(x), pt(y), CTX)
    d2 = shortest_dist(pt(y), pt(x), CTX)
    assert d1 == d2
    assert 0 <= d1 <= 0.5


def test_point_interval_dist_modes():
    with CTX:
        interval = Arc.ordered(pt("0.4"), pt("0.6"))
        closer = point_interval_dist(pt("0.3"), interval, "closer", CTX)
        farther = point_interval_dist(pt("0.3"), interval, "farther", CTX)
        assert abs(closer - mpmath.mpf("0.1")) < 1e-30
        assert abs(farther - mpmath.mpf("0.3")) < 1e-30


def test_point_inside_interval_raises():
    interval = Arc.ordered(pt("0.4"), pt("0.6"))
    with pytest.raises(PointInsideInterval):
        point_interval_dist(pt("0.5"), interval, "closer", CTX)


def test_point_interval_dist_bad_mode():
    interval = Arc.ordered(pt("0.4"), pt("0.6"))
    with pytest.raises(InvalidParams):
        point_interval_dist(pt("0.3"), interval, "nearest", CTX)


def test_interval_gap_dist_all_modes():
    with CTX:
        i = Arc.ordered(pt("0.1"), pt("0.2"))
        j = Arc.ordered(pt("0.5"), pt("0.7"))
        # gaps: (0.2, 0.5) of length 0.3 and (0.7, 1.1) of length 0.4
        d = {m: interval_gap_dist(i, j, m, CTX) for m in
             ("open-open", "closed-open", "open-closed", "closed-closed")}
        assert abs(d["open-open"] - mpmath.mpf("0.3")) < 1e-30
        assert abs(d["closed-open"] - mpmath.mpf("0.4")) < 1e-30
        assert abs(d["open-closed"] - mpmath.mpf("0.5")) < 1e-30
        assert abs(d["closed-closed"] - mpmath.mpf("0.6")) < 1e-30


def test_interval_gap_dist_rejects_overlap():
    i = Arc.ordered(pt("0.1"), pt("0.5"))
    j = Arc.ordered(pt("0.4"), pt("0.7"))
    with pytest.raises(OverlappingIntervals):
        interval_gap_dist(i, j, "open-open", CTX)
