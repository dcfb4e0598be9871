"""Closed rational intervals for depth-truncated quantities."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable


def frac_str(x: Fraction | int) -> str:
    """Render a rational as "p/q" (or "p" for integers)."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_frac(s: str) -> Fraction:
    return Fraction(s)


@dataclass(frozen=True)
class CertifiedValue:
    """A closed interval [lo, hi] of rationals known to contain a true value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, x) -> "CertifiedValue":
        return cls(Fraction(x), Fraction(x))

    @classmethod
    def hull(cls, values: Iterable["CertifiedValue"]) -> "CertifiedValue":
        vs = list(values)
        return cls(min(v.lo for v in vs), max(v.hi for v in vs))

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, CertifiedValue):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= Fraction(x) <= self.hi

    def intersects(self, other: "CertifiedValue") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other):
        if isinstance(other, CertifiedValue):
            return CertifiedValue(self.lo + other.lo, self.hi + other.hi)
        return CertifiedValue(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, CertifiedValue):
            ends = [a * b for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
            return CertifiedValue(min(ends), max(ends))
        k = Fraction(other)
        return CertifiedValue(self.lo * k, self.hi * k) if k >= 0 else CertifiedValue(self.hi * k, self.lo * k)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, CertifiedValue):
            if other.lo <= 0 <= other.hi:
                raise ZeroDivisionError("interval denominator contains 0")
            return self * CertifiedValue(1 / other.hi, 1 / other.lo)
        return self * (1 / Fraction(other))

    def to_json(self) -> dict:
        return {"lo": frac_str(self.lo), "hi": frac_str(self.hi)}

    def __str__(self) -> str:
        if self.is_exact:
            return f"{frac_str(self.lo)} (~{float(self.lo):.6g})"
        return f"[{frac_str(self.lo)}, {frac_str(self.hi)}] (~[{float(self.lo):.6g}, {float(self.hi):.6g}])"


ZERO = CertifiedValue(0, 0)


def interval_sum(values: Iterable[CertifiedValue]) -> CertifiedValue:
    lo = hi = Fraction(0)
    for v in values:
        lo += v.lo
        hi += v.hi
    return CertifiedValue(lo, hi)
