"""Small statistics helpers: least-squares line fits and stabilization flags.

Trend checks run on floats; the quantities fitted here are diagnostics,
not certified bounds, so double precision is enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InsufficientData


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r2: float

    def predict(self, x: float) -> float:
        return self.slope * x + self.intercept


def linfit(xs, ys) -> LineFit:
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    n = len(xs)
    if n < 2 or len(ys) != n:
        raise InsufficientData("need at least two points to fit a line")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    if sxx == 0:
        raise InsufficientData("degenerate abscissae")
    slope = sxy / sxx
    intercept = my - slope * mx
    syy = sum((y - my) ** 2 for y in ys)
    if syy == 0:
        return LineFit(slope, intercept, 1.0)
    ss_res = sum((y - (slope * x + intercept)) ** 2
                 for x, y in zip(xs, ys))
    return LineFit(slope, intercept, 1.0 - ss_res / syy)


def log_decay_fit(values, xs=None) -> LineFit:
    """Fit log(value) vs index; slope < 0 means exponential decay."""
    ys = [math.log(float(v)) for v in values]
    if xs is None:
        xs = range(len(ys))
    return linfit(list(xs), ys)


def stabilized(values, window_frac: float = 0.25, tol: float = 0.2) -> bool:
    """Whether the last-quarter variation of the sequence is below tol."""
    vals = [float(v) for v in values]
    if len(vals) < 4:
        raise InsufficientData("too few values for a stabilization check")
    k = max(2, int(math.ceil(len(vals) * window_frac)))
    tail = vals[-k:]
    lo, hi = min(tail), max(tail)
    scale = max(abs(lo), abs(hi))
    if scale == 0:
        return True
    return (hi - lo) / scale < tol


def last_quarter_variation(values) -> float:
    vals = [float(v) for v in values]
    k = max(2, int(math.ceil(len(vals) * 0.25)))
    tail = vals[-k:]
    scale = max(abs(min(tail)), abs(max(tail)))
    if scale == 0:
        return 0.0
    return (max(tail) - min(tail)) / scale
