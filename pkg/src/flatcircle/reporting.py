"""Deterministic output: lossless number serialization, CSV/JSON writers
and dependency-free SVG line charts.

Numbers are written as exact hex mantissa/exponent pairs next to a
human-readable decimal; identical inputs always produce identical bytes
(no timestamps, no environment-dependent formatting).
"""

from __future__ import annotations

import json
import math
import os
from typing import Iterable

import mpmath
from mpmath import mpf

from .errors import InvalidParams


def _to_mpf_exact(x) -> mpf:
    # re-converting an mpf rounds it to the ambient precision; never do that
    if isinstance(x, mpf):
        return x
    bits = x.bit_length() if isinstance(x, int) else 64
    with mpmath.workprec(max(64, bits)):
        return mpmath.mpf(x)


def mpf_to_hex(x) -> str:
    """Exact textual form m*2^e, e.g. '0x1999ap-20'; '-' prefix for < 0."""
    v = _to_mpf_exact(x)
    sign, man, exp, _ = v._mpf_
    if man == 0:
        if v == 0:
            return "0x0p+0"
        raise InvalidParams(f"cannot serialize non-finite value {v}")
    return f"{'-' if sign else ''}0x{man:x}p{exp:+d}"


def hex_to_mpf(s: str) -> mpf:
    s = s.strip()
    neg = s.startswith("-")
    if neg:
        s = s[1:]
    if not s.startswith("0x") or "p" not in s:
        raise InvalidParams(f"malformed hex float {s!r}")
    man_str, _, exp_str = s[2:].partition("p")
    man, exp = int(man_str, 16), int(exp_str)
    with mpmath.workprec(max(64, man.bit_length())):
        v = mpmath.ldexp(mpmath.mpf(man), exp)
    return -v if neg else v


def fmt_decimal(x, digits: int = 17) -> str:
    if isinstance(x, int):
        return str(x)
    return mpmath.nstr(_to_mpf_exact(x), digits)


def _atomic_write(path: str, data: str):
    tmp = path + ".tmp"
    with open(tmp, "w") as f:
        f.write(data)
    os.replace(tmp, path)


def write_csv(path: str, header: Iterable[str], rows: Iterable[Iterable]):
    """Numeric cells get two columns: '<name>' (decimal) and '<name>_hex'."""
    rows = [list(r) for r in rows]
    header = list(header)
    numeric = [any(isinstance(r[i], (mpf, float)) for r in rows)
               for i in range(len(header))] if rows else [False] * len(header)
    out_header, lines = [], []
    for name, is_num in zip(header, numeric):
        out_header.append(name)
        if is_num:
            out_header.append(name + "_hex")
    lines.append(",".join(out_header))
    for r in rows:
        cells = []
        for v, is_num in zip(r, numeric):
            if is_num:
                cells.append(fmt_decimal(v))
                cells.append(mpf_to_hex(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    _atomic_write(path, "\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, mpf):
        return {"dec": fmt_decimal(obj), "hex": mpf_to_hex(obj)}
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return obj
    return obj


def write_json(path: str, obj):
    _atomic_write(path, json.dumps(_jsonable(obj), sort_keys=True,
                                   indent=2) + "\n")


# ---------------------------------------------------------------------------
# SVG charts

_W, _H, _PAD = 640, 440, 60
_COLORS = ("#1f6feb", "#d73a49", "#2da44e", "#bf8700", "#8250df")


def svg_line_chart(path: str, series: dict, title: str,
                   xlabel: str = "", ylabel: str = ""):
    """series: name -> list of (x, y) pairs; deterministic byte output."""
    pts_all = [(float(x), float(y))
               for pts in series.values() for x, y in pts]
    if not pts_all:
        raise InvalidParams("nothing to plot")
    xs = [p[0] for p in pts_all]
    ys = [p[1] for p in pts_all]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def sx(x):
        return _PAD + (x - x0) / (x1 - x0) * (_W - 2 * _PAD)

    def sy(y):
        return _H - _PAD - (y - y0) / (y1 - y0) * (_H - 2 * _PAD)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
        f'height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W // 2}" y="24" text-anchor="middle" '
        f'font-size="15">{title}</text>',
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" '
        f'y2="{_H - _PAD}" stroke="black"/>',
        f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" '
        f'stroke="black"/>',
        f'<text x="{_W // 2}" y="{_H - 16}" text-anchor="middle" '
        f'font-size="12">{xlabel}</text>',
        f'<text x="18" y="{_H // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 18 {_H // 2})">{ylabel}</text>',
        f'<text x="{_PAD}" y="{_H - _PAD + 16}" font-size="10">'
        f'{x0:.4g}</text>',
        f'<text x="{_W - _PAD}" y="{_H - _PAD + 16}" text-anchor="end" '
        f'font-size="10">{x1:.4g}</text>',
        f'<text x="{_PAD - 6}" y="{_H - _PAD}" text-anchor="end" '
        f'font-size="10">{y0:.4g}</text>',
        f'<text x="{_PAD - 6}" y="{_PAD + 4}" text-anchor="end" '
        f'font-size="10">{y1:.4g}</text>',
    ]
    for idx, name in enumerate(sorted(series)):
        pts = sorted((float(x), float(y)) for x, y in series[name])
        color = _COLORS[idx % len(_COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        parts.append(f'<polyline fill="none" stroke="{color}" '
                     f'stroke-width="1.5" points="{coords}"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" '
                         f'r="2.5" fill="{color}"/>')
        parts.append(f'<text x="{_W - _PAD + 4}" '
                     f'y="{_PAD + 14 * idx + 10}" font-size="11" '
                     f'fill="{color}">{name}</text>')
    parts.append("</svg>")
    _atomic_write(path, "\n".join(parts) + "\n")
