import json
import os

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatcircle.errors import InvalidParams
from flatcircle.precision import PrecisionContext
from flatcircle.reporting import (fmt_decimal, hex_to_mpf, mpf_to_hex,
                                  svg_line_chart, write_csv, write_json)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_hex_roundtrip_floats(x):
    assert hex_to_mpf(mpf_to_hex(x)) == mpmath.mpf(x)


def test_hex_roundtrip_high_precision():
    with PrecisionContext(bits=512):
        v = mpmath.mpf(2) ** mpmath.mpf("0.5")
        assert hex_to_mpf(mpf_to_hex(v)) == v
        # stays exact even when the ambient precision is low afterwards
    assert hex_to_mpf(mpf_to_hex(v)) == v


def test_hex_zero():
    assert mpf_to_hex(0.0) == "0x0p+0"
    assert hex_to_mpf("0x0p+0") == 0


def test_hex_rejects_non_finite():
    with pytest.raises(InvalidParams):
        mpf_to_hex(mpmath.inf)
    with pytest.raises(InvalidParams):
        hex_to_mpf("not-a-hex")


def test_fmt_decimal_no_ambient_rounding():
    with PrecisionContext(bits=256):
        v = mpmath.mpf(1) / 3
    # formatting outside any context must not truncate to 53 bits
    assert fmt_decimal(v, 40).startswith("0.333333333333333333333333333")


def test_write_csv_pairs_hex_columns(tmp_path):
    path = str(tmp_path / "t.csv")
    with PrecisionContext(bits=128):
        rows = [(1, mpmath.mpf("0.5"), "x"), (2, mpmath.mpf("0.25"), "y")]
    write_csv(path, ("n", "val", "tag"), rows)
    lines = open(path).read().splitlines()
    assert lines[0] == "n,val,val_hex,tag"
    assert "0x1p-1" in lines[1]


def test_write_csv_deterministic(tmp_path):
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    rows = [(i, float(i) / 7) for i in range(5)]
    write_csv(a, ("i", "v"), rows)
    write_csv(b, ("i", "v"), rows)
    assert open(a, "rb").read() == open(b, "rb").read()


def test_write_json_sorted_and_tagged(tmp_path):
    path = str(tmp_path / "t.json")
    write_json(path, {"b": mpmath.mpf("0.5"), "a": 1})
    obj = json.loads(open(path).read())
    assert list(obj) == ["a", "b"]
    assert obj["b"] == {"dec": "0.5", "hex": "0x1p-1"}


def test_svg_chart_deterministic(tmp_path):
    series = {"one": [(0, 0.0), (1, 1.0)], "two": [(0, 1.0), (1, 0.5)]}
    a, b = str(tmp_path / "a.svg"), str(tmp_path / "b.svg")
    svg_line_chart(a, series, "t", "x", "y")
    svg_line_chart(b, series, "t", "x", "y")
    data = open(a, "rb").read()
    assert data == open(b, "rb").read()
    assert data.startswith(b"<svg") or b"<svg" in data[:200]


def test_atomic_write_leaves_no_tmp(tmp_path):
    path = str(tmp_path / "t.json")
    write_json(path, {"k": 1})
    assert os.listdir(tmp_path) == ["t.json"]
