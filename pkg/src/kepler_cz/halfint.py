"""Exact half-integers backed by a doubled integer."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True, order=True)
class HalfInteger:
    """A number in (1/2)Z, stored as ``twice`` = 2 * value."""

    twice: int

    @classmethod
    def of(cls, value) -> "HalfInteger":
        frac = Fraction(value)
        doubled = frac * 2
        if doubled.denominator != 1:
            raise ValueError(f"{value!r} is not a half-integer")
        return cls(int(doubled))

    @classmethod
    def from_signature_sum(cls, endpoint_sigs: int, interior_sigs: int) -> "HalfInteger":
        # endpoints carry weight 1/2, interior crossings weight 1
        return cls(endpoint_sigs + 2 * interior_sigs)

    def as_fraction(self) -> Fraction:
        return Fraction(self.twice, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __add__(self, other):
        if isinstance(other, int):
            other = HalfInteger(2 * other)
        if not isinstance(other, HalfInteger):
            return NotImplemented
        return HalfInteger(self.twice + other.twice)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            other = HalfInteger(2 * other)
        if not isinstance(other, HalfInteger):
            return NotImplemented
        return HalfInteger(self.twice - other.twice)

    def __neg__(self):
        return HalfInteger(-self.twice)

    def __eq__(self, other):
        if isinstance(other, HalfInteger):
            return self.twice == other.twice
        if isinstance(other, (int, Fraction)):
            return Fraction(self.twice, 2) == other
        return NotImplemented

    def __hash__(self):
        return hash(Fraction(self.twice, 2))

    def __float__(self):
        return self.twice / 2

    def __int__(self):
        if not self.is_integer:
            raise ValueError(f"{self} is not an integer")
        return self.twice // 2

    def __str__(self):
        return str(self.as_fraction())

    def __repr__(self):
        return f"HalfInteger({self})"
