"""Exact arithmetic foundation: integer roots, rationals, Q[sqrt 2], reference digits.

Python ints are the unbounded naturals and :class:`fractions.Fraction` is the
always-reduced rational type.  Nothing in here touches floating point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "Rational",
    "Comparison",
    "QuadraticRational",
    "SQRT2",
    "isqrt",
    "floor_digit",
    "compare_to_sqrt2",
    "sqrt2_digit_reference",
    "sqrt2_enclosure",
    "pi_enclosure",
    "pi_digit_reference",
    "arctan_inverse_scaled",
]

Rational = Fraction


class Comparison(enum.Enum):
    LESS = -1
    GREATER = 1


def isqrt(v: int) -> int:
    """Return ``floor(sqrt(v))`` for a non-negative integer."""
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError("isqrt expects an int")
    return math.isqrt(v)


def floor_digit(x: Fraction | int, n: int) -> int:
    """Digit ``n`` of a non-negative rational: ``floor(10**n * x) mod 10``.

    Digit 0 is the integer part, digit ``n >= 1`` the n-th decimal place.
    """
    if n < 0:
        raise ValueError("digit index must be >= 0")
    x = Fraction(x)
    if x < 0:
        raise ValueError("digit extraction is defined for x >= 0")
    return (x.numerator * 10**n // x.denominator) % 10


def compare_to_sqrt2(x: Fraction | int) -> Comparison:
    x = Fraction(x)
    if x <= 0:
        raise ValueError("compare_to_sqrt2 requires x > 0")
    lhs = x.numerator * x.numerator
    rhs = 2 * x.denominator * x.denominator
    # sqrt(2) is irrational, so equality would be an arithmetic bug
    assert lhs != rhs
    return Comparison.GREATER if lhs > rhs else Comparison.LESS


@dataclass(frozen=True, slots=True)
class QuadraticRational:
    """The exact number ``a + b*sqrt(2)`` with rational ``a`` and ``b``."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    @classmethod
    def coerce(cls, other) -> "QuadraticRational":
        if isinstance(other, QuadraticRational):
            return other
        if isinstance(other, (int, Fraction)):
            return cls(Fraction(other), Fraction(0))
        return NotImplemented

    def __add__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return QuadraticRational(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self) -> "QuadraticRational":
        return QuadraticRational(-self.a, -self.b)

    def __sub__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return QuadraticRational(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        a, b, c, d = self.a, self.b, other.a, other.b
        return QuadraticRational(a * c + 2 * b * d, a * d + b * c)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticRational":
        return QuadraticRational(self.a, -self.b)

    def norm(self) -> Fraction:
        """Field norm ``a**2 - 2*b**2``; zero only for the zero element."""
        return self.a * self.a - 2 * self.b * self.b

    def __truediv__(self, other):
        other = self.coerce(other)
        if other is NotImplemented:
            return other
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q[sqrt 2]")
        num = self * other.conjugate()
        return QuadraticRational(num.a / n, num.b / n)

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0 or sa == sb:
            return sa if sa else sb
        if sa == 0:
            return sb
        # opposite signs: the term of larger magnitude wins
        return sa if a * a > 2 * b * b else sb

    def __abs__(self) -> "QuadraticRational":
        return -self if self.sign() < 0 else self

    def __eq__(self, other) -> bool:
        other = self.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __lt__(self, other) -> bool:
        return (self - other).sign() < 0

    def __le__(self, other) -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - other).sign() >= 0

    def __repr__(self) -> str:
        return f"QuadraticRational({self.a}, {self.b})"

    def __str__(self) -> str:
        return f"{self.a} + {self.b}*sqrt(2)"


SQRT2 = QuadraticRational(0, 1)


def sqrt2_digit_reference(n: int) -> int:
    """Digit ``n`` of sqrt(2) from a single integer square root."""
    if n < 0:
        raise ValueError("digit index must be >= 0")
    v = 2 * 10 ** (2 * n)
    r = math.isqrt(v)
    assert r * r != v, "2*10^(2n) can never be a perfect square"
    return r % 10


def sqrt2_enclosure(digits: int) -> tuple[Fraction, Fraction]:
    """Rational ``lo < sqrt(2) < hi`` with ``hi - lo = 10**-digits``."""
    scale = 10**digits
    r = math.isqrt(2 * scale * scale)
    return Fraction(r, scale), Fraction(r + 1, scale)


def arctan_inverse_scaled(x: int, scale: int) -> tuple[int, int]:
    """Fixed-point ``scale * arctan(1/x)`` with a rigorous error bound.

    Returns ``(value, err)`` such that ``|value - scale*arctan(1/x)| <= err``.
    Each truncated power is short of its exact value by less than 2 and each
    truncated term by less than 3; the alternating tail after the last
    nonzero power is bounded by 2.
    """
    if x < 2:
        raise ValueError("series needs x >= 2")
    x2 = x * x
    power = scale // x
    total = 0
    k = 0
    while power:
        term = power // (2 * k + 1)
        total = total - term if k & 1 else total + term
        power //= x2
        k += 1
    return total, 3 * k + 2


@lru_cache(maxsize=64)
def pi_enclosure(digits: int) -> tuple[Fraction, Fraction]:
    """Certified rational bounds ``lo < pi < hi`` with ``hi - lo < 10**-digits``.

    Machin: ``pi = 16*arctan(1/5) - 4*arctan(1/239)`` in fixed point.
    """
    if digits < 0:
        raise ValueError("digits must be >= 0")
    guard = 8 + len(str(digits))
    scale = 10 ** (digits + guard)
    a5, e5 = arctan_inverse_scaled(5, scale)
    a239, e239 = arctan_inverse_scaled(239, scale)
    centre = 16 * a5 - 4 * a239
    err = 16 * e5 + 4 * e239 + 1
    lo, hi = Fraction(centre - err, scale), Fraction(centre + err, scale)
    assert hi - lo < Fraction(1, 10**digits)
    return lo, hi


def _pi_digit_at(n: int, digits: int) -> int | None:
    lo, hi = pi_enclosure(digits)
    shift = 10**n
    d_lo = lo.numerator * shift // lo.denominator
    d_hi = hi.numerator * shift // hi.denominator
    return d_lo % 10 if d_lo == d_hi else None


def pi_digit_reference(n: int) -> int:
    """Digit ``n`` of pi (digit 0 is 3) from the Machin enclosure.

    Precision grows until the enclosure pins ``floor(10**n * pi)``; the digit
    is then recomputed at twice the precision and must agree.
    """
    if n < 0:
        raise ValueError("digit index must be >= 0")
    guard = 10
    while True:
        digit = _pi_digit_at(n, n + guard)
        if digit is not None:
            break
        guard *= 2
    again = _pi_digit_at(n, 2 * (n + guard))
    assert again == digit, "pi digit unstable under doubled precision"
    return digit
