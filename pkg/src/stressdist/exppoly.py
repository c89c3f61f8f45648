"""Exact exponential polynomials on the half-line.

An :class:`ExpPoly` is a finite sum ``sum c * x**p * exp(-a * x)`` over
``x > 0`` with rational ``c`` and ``a``. The class is closed under the
operations the Wick cycle integrals need: products, multiplication by
powers, integration over ``(0, inf)`` and integration against a kernel in
``|x - y|`` or ``x + y`` whose own profile is an ExpPoly.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial


class ExpPoly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        for (p, a), c in (terms or {}).items():
            self._add(int(p), Fraction(a), Fraction(c))

    def _add(self, p, a, c):
        if c == 0:
            return
        key = (p, a)
        v = self.terms.get(key, 0) + c
        if v == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = v

    @classmethod
    def monomial(cls, power=0, decay=0, coeff=1) -> "ExpPoly":
        return cls({(power, decay): coeff})

    def copy(self) -> "ExpPoly":
        out = ExpPoly()
        out.terms = dict(self.terms)
        return out

    def __repr__(self):
        parts = [f"{c}*x^{p}*e^(-{a}x)" for (p, a), c in sorted(self.terms.items())]
        return "ExpPoly(" + (" + ".join(parts) or "0") + ")"

    def __eq__(self, other):
        return isinstance(other, ExpPoly) and self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        out = self.copy()
        for (p, a), c in other.terms.items():
            out._add(p, a, c)
        return out

    def __mul__(self, other) -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            other = Fraction(other)
            out = ExpPoly()
            out.terms = {k: c * other for k, c in self.terms.items() if c * other}
            return out
        out = ExpPoly()
        for (p1, a1), c1 in self.terms.items():
            for (p2, a2), c2 in other.terms.items():
                out._add(p1 + p2, a1 + a2, c1 * c2)
        return out

    __rmul__ = __mul__

    def times_power(self, p: int) -> "ExpPoly":
        out = ExpPoly()
        out.terms = {(q + p, a): c for (q, a), c in self.terms.items()}
        return out

    def times_exp(self, b) -> "ExpPoly":
        """Multiply by ``exp(-b x)``."""
        b = Fraction(b)
        out = ExpPoly()
        out.terms = {(q, a + b): c for (q, a), c in self.terms.items()}
        return out

    def __call__(self, x: float) -> float:
        import math

        return sum(float(c) * x**p * math.exp(-float(a) * x) for (p, a), c in self.terms.items())

    def integral(self) -> Fraction:
        """Exact ``integral_0^inf``; every decay must be positive."""
        total = Fraction(0)
        for (p, a), c in self.terms.items():
            if a <= 0:
                raise ValueError("integral over (0, inf) diverges: nonpositive decay")
            total += c * factorial(p) / a ** (p + 1)
        return total

    def convolve_abs(self, kernel: "ExpPoly") -> "ExpPoly":
        """``y -> integral_0^inf self(x) kernel(|x - y|) dx`` as an ExpPoly in ``y``."""
        out = ExpPoly()
        for (q, a), c in self.terms.items():
            for (j, b), kc in kernel.terms.items():
                cc = c * kc
                # x < y: (y-x)^j e^{-b(y-x)}; expand (y-x)^j
                for i in range(j + 1):
                    co = cc * comb(j, i) * (-1) ** i
                    for (r, d), v in _lower_incomplete(q + i, a - b).items():
                        out._add(r + j - i, d + b, co * v)
                # x > y: (x-y)^j e^{-b(x-y)}
                for i in range(j + 1):
                    co = cc * comb(j, i) * (-1) ** (j - i)
                    for (r, d), v in _upper_incomplete(q + i, a + b).items():
                        out._add(r + j - i, d - b, co * v)
        return out


def _lower_incomplete(r: int, c: Fraction) -> dict:
    """``integral_0^y x^r e^{-c x} dx`` as ExpPoly terms in ``y``."""
    if c == 0:
        return {(r + 1, Fraction(0)): Fraction(1, r + 1)}
    pre = Fraction(factorial(r)) / c ** (r + 1)
    out = {(0, Fraction(0)): pre}
    for i in range(r + 1):
        key = (i, c)
        out[key] = out.get(key, 0) - pre * c**i / factorial(i)
    return out


def _upper_incomplete(r: int, c: Fraction) -> dict:
    """``integral_y^inf x^r e^{-c x} dx`` for ``c > 0``."""
    pre = Fraction(factorial(r)) / c ** (r + 1)
    return {(i, c): pre * c**i / factorial(i) for i in range(r + 1)}


def separable_sum_kernel(profile: ExpPoly) -> list:
    """Split ``profile(x + y)`` into ``sum_a u_a(x) v_a(y)``.

    Returns a list of ``(u_a, v_a)`` ExpPoly pairs.
    """
    pairs = []
    for (j, b), c in sorted(profile.terms.items()):
        for i in range(j + 1):
            u = ExpPoly.monomial(i, b, c * comb(j, i))
            v = ExpPoly.monomial(j - i, b, 1)
            pairs.append((u, v))
    return pairs
