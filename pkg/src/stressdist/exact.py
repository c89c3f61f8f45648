"""Exact bookkeeping: rationals times explicit powers of pi."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions and decimal strings like "1/24" to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {x!r} exactly to a rational")


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def fraction_str(x: Fraction) -> str:
    """Render as "p/q" (or "p" for integers)."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def decimal_str(x) -> str:
    """Render with 17 significant digits."""
    if isinstance(x, Fraction):
        return _fraction_decimal(x)
    return f"{float(x):.17g}"


def _fraction_decimal(x: Fraction, digits: int = 17) -> str:
    # float() would lose digits for large integers such as M_8
    if x == 0:
        return "0"
    if x.denominator == 1 and len(str(abs(x.numerator))) <= digits:
        return str(x.numerator)
    return f"{float(x):.{digits}g}"


@dataclass(frozen=True)
class PiMonomial:
    """The exact number ``coef * pi**power``."""

    coef: Fraction
    power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coef", as_fraction(self.coef))
        object.__setattr__(self, "power", int(self.power))

    def __mul__(self, other):
        if isinstance(other, PiMonomial):
            return PiMonomial(self.coef * other.coef, self.power + other.power)
        if is_exact(other):
            return PiMonomial(self.coef * other, self.power)
        return float(self) * other

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PiMonomial):
            return PiMonomial(self.coef / other.coef, self.power - other.power)
        if is_exact(other):
            return PiMonomial(self.coef / other, self.power)
        return float(self) / other

    def __rtruediv__(self, other):
        if is_exact(other):
            return PiMonomial(Fraction(other) / self.coef, -self.power)
        return other / float(self)

    def __pow__(self, n: int):
        return PiMonomial(self.coef**n, self.power * n)

    def __neg__(self):
        return PiMonomial(-self.coef, self.power)

    def __float__(self):
        return float(self.coef) * math.pi**self.power

    def __str__(self):
        c = fraction_str(self.coef)
        if self.coef == 0 or self.power == 0:
            return c
        return f"{c}·π^{self.power}"

    @classmethod
    def parse(cls, text: str) -> "PiMonomial":
        """Inverse of ``str()``: accepts "p/q" or "p/q·π^k"."""
        if "·π^" in text:
            c, k = text.split("·π^")
            return cls(Fraction(c), int(k))
        return cls(Fraction(text), 0)


ONE = PiMonomial(Fraction(1), 0)
