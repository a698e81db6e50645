"""Outward-rounded interval scalars over exact rationals.

Everything combinatorial in this package (class sizes, probabilities,
tight ratios) is an exact ``fractions.Fraction``.  The only irrational
quantities are square roots and the constants e and 2*pi appearing in the
analytic pre-factor formulas.  Those are carried as closed intervals
[lo, hi] with rational endpoints that certifiably contain the true value:

* field operations (+, -, *, /) on rational endpoints are computed exactly,
  so they introduce no rounding at all;
* sqrt, e and pi are enclosed to a requested number of bits, rounding
  outward by construction.

A comparison between a rational and an interval (or two intervals) is
therefore either certified or declared inconclusive; raising the bit count
can only shrink intervals and turn inconclusive comparisons into certified
ones, never flip a certified answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

DEFAULT_BITS = 128
MAX_BITS = 1024

Rational = Union[int, Fraction]


def sqrt_bounds(x: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Enclose sqrt(x) for a nonnegative rational x within 2^-bits relative error.

    Uses sqrt(p/q) = sqrt(p*q)/q and an integer square root of the scaled
    radicand, so both endpoints are exact rationals.
    """
    if x < 0:
        raise ValueError("square root of negative rational")
    if x == 0:
        return Fraction(0), Fraction(0)
    p, q = x.numerator, x.denominator
    radicand = p * q
    scale = 1 << bits
    m = math.isqrt(radicand * scale * scale)
    lo = Fraction(m, q * scale)
    if m * m == radicand * scale * scale:
        return lo, lo
    return lo, Fraction(m + 1, q * scale)


@lru_cache(maxsize=None)
def e_bounds(bits: int) -> tuple[Fraction, Fraction]:
    """Enclose Euler's number by a Taylor partial sum plus a tail bound."""
    m = 2
    while math.factorial(m + 1) < (1 << (bits + 3)):
        m += 1
    partial = sum(Fraction(1, math.factorial(i)) for i in range(m + 1))
    return partial, partial + Fraction(2, math.factorial(m + 1))


def _atan_inv_bounds(x: int, bits: int) -> tuple[Fraction, Fraction]:
    # arctan(1/x) via its alternating series; the truth lies between any two
    # consecutive partial sums.
    assert x >= 2
    total = Fraction(0)
    j = 0
    power = x  # x^(2j+1)
    while True:
        term = Fraction(1, (2 * j + 1) * power)
        if term.denominator > (1 << (bits + 6)) * term.numerator:
            signed_next = term if j % 2 == 0 else -term
            return (total, total + signed_next) if signed_next > 0 else (total + signed_next, total)
        total += term if j % 2 == 0 else -term
        j += 1
        power *= x * x


@lru_cache(maxsize=None)
def pi_bounds(bits: int) -> tuple[Fraction, Fraction]:
    """Enclose pi with Machin's formula pi = 16*atan(1/5) - 4*atan(1/239)."""
    lo5, hi5 = _atan_inv_bounds(5, bits)
    lo239, hi239 = _atan_inv_bounds(239, bits)
    return 16 * lo5 - 4 * hi239, 16 * hi5 - 4 * lo239


def _decimal_floor(x: Fraction, places: int) -> str:
    scaled = x * 10**places
    n = scaled.numerator // scaled.denominator
    return _place_point(n, places)


def _decimal_ceil(x: Fraction, places: int) -> str:
    scaled = x * 10**places
    n = -((-scaled.numerator) // scaled.denominator)
    return _place_point(n, places)


def _place_point(n: int, places: int) -> str:
    sign = "-" if n < 0 else ""
    digits = str(abs(n)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}" if places else f"{sign}{digits}"


@dataclass(frozen=True)
class IntervalScalar:
    """Closed interval [lo, hi] of exact rationals; lo <= hi always holds.

    ``bits`` records the enclosure precision used for the irrational pieces
    that fed the interval; rationals embed exactly with lo == hi.
    """

    lo: Fraction
    hi: Fraction
    bits: int = DEFAULT_BITS

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"inverted interval [{self.lo}, {self.hi}]")

    @staticmethod
    def exact(value: Rational, bits: int = DEFAULT_BITS) -> "IntervalScalar":
        f = Fraction(value)
        return IntervalScalar(f, f, bits)

    @staticmethod
    def euler_e(bits: int = DEFAULT_BITS) -> "IntervalScalar":
        lo, hi = e_bounds(bits)
        return IntervalScalar(lo, hi, bits)

    @staticmethod
    def two_pi(bits: int = DEFAULT_BITS) -> "IntervalScalar":
        lo, hi = pi_bounds(bits)
        return IntervalScalar(2 * lo, 2 * hi, bits)

    # -- field operations (exact on rational endpoints) --

    def _coerce(self, other: "IntervalScalar | Rational") -> "IntervalScalar":
        if isinstance(other, IntervalScalar):
            return other
        return IntervalScalar.exact(other, self.bits)

    def __add__(self, other: "IntervalScalar | Rational") -> "IntervalScalar":
        o = self._coerce(other)
        return IntervalScalar(self.lo + o.lo, self.hi + o.hi, min(self.bits, o.bits))

    __radd__ = __add__

    def __neg__(self) -> "IntervalScalar":
        return IntervalScalar(-self.hi, -self.lo, self.bits)

    def __sub__(self, other: "IntervalScalar | Rational") -> "IntervalScalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Rational) -> "IntervalScalar":
        return self._coerce(other) - self

    def __mul__(self, other: "IntervalScalar | Rational") -> "IntervalScalar":
        o = self._coerce(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return IntervalScalar(min(products), max(products), min(self.bits, o.bits))

    __rmul__ = __mul__

    def __truediv__(self, other: "IntervalScalar | Rational") -> "IntervalScalar":
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        quotients = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return IntervalScalar(min(quotients), max(quotients), min(self.bits, o.bits))

    def __rtruediv__(self, other: Rational) -> "IntervalScalar":
        return self._coerce(other) / self

    def __pow__(self, k: int) -> "IntervalScalar":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        if k == 0:
            return IntervalScalar.exact(1, self.bits)
        a, b = self.lo**k, self.hi**k
        lo, hi = min(a, b), max(a, b)
        if k % 2 == 0 and self.lo < 0 < self.hi:
            lo = Fraction(0)
        return IntervalScalar(lo, hi, self.bits)

    def sqrt(self, bits: Optional[int] = None) -> "IntervalScalar":
        b = bits if bits is not None else self.bits
        lo, _ = sqrt_bounds(self.lo, b)
        _, hi = sqrt_bounds(self.hi, b)
        return IntervalScalar(lo, hi, b)

    # -- certified queries --

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value: Rational) -> bool:
        return self.lo <= value <= self.hi

    def certainly_le(self, other: "IntervalScalar | Rational") -> Optional[bool]:
        """True/False when "self <= other" is certified either way, else None."""
        o = self._coerce(other)
        if self.hi <= o.lo:
            return True
        if self.lo > o.hi:
            return False
        return None

    def certainly_ge(self, other: "IntervalScalar | Rational") -> Optional[bool]:
        o = self._coerce(other)
        return o.certainly_le(self)

    def to_json(self, places: int = 40) -> dict:
        return {
            "lo": _decimal_floor(self.lo, places),
            "hi": _decimal_ceil(self.hi, places),
            "bits": self.bits,
        }

    @staticmethod
    def from_json(obj: dict) -> "IntervalScalar":
        return IntervalScalar(Fraction(obj["lo"]), Fraction(obj["hi"]), int(obj["bits"]))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"IntervalScalar({float(self.lo):.12g}, {float(self.hi):.12g}, bits={self.bits})"


def escalate_bits(bits: int, cap: int = MAX_BITS) -> Optional[int]:
    """Next precision to try after an inconclusive comparison, None at the cap."""
    return bits * 2 if bits * 2 <= cap else None
