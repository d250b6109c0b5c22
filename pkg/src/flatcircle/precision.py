"""Precision management for all extended-real arithmetic.

Every quantity in the package is an ``mpmath.mpf`` produced under an
explicit :class:`PrecisionContext`.  Operations that do arithmetic open the
context with ``with ctx:`` so the working mantissa is always stated by the
caller, never inherited from ambient global state by accident.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpf

from .errors import InvalidParams


@dataclass(frozen=True)
class PrecisionContext:
    """A fixed binary working precision (round-to-nearest-even)."""

    bits: int = 512

    def __post_init__(self):
        if self.bits < 8:
            raise InvalidParams(f"mantissa_bits must be >= 8, got {self.bits}")
        object.__setattr__(self, "_guards", [])

    def __enter__(self):
        guard = mpmath.workprec(self.bits)
        self._guards.append(guard)
        return guard.__enter__()

    def __exit__(self, *exc):
        return self._guards.pop().__exit__(*exc)

    def mpf(self, x) -> mpf:
        with self:
            return mpmath.mpf(x)

    @property
    def eps(self) -> mpf:
        return self.mpf(2) ** (-self.bits)

    def doubled(self) -> "PrecisionContext":
        return PrecisionContext(2 * self.bits)

    def certify_sign(self, value: mpf, margin_bits: int | None = None) -> int:
        """Return -1/0/+1; 0 means the sign is below the certification margin."""
        margin = self.mpf(2) ** (margin_bits if margin_bits is not None
                                 else -(self.bits // 2))
        if value > margin:
            return 1
        if value < -margin:
            return -1
        return 0


def frac(x: mpf) -> mpf:
    """Fractional part in [0, 1)."""
    f = x - mpmath.floor(x)
    # x - floor(x) can round up to exactly 1 for tiny negative x
    return f if f < 1 else mpmath.mpf(0)
