"""Rational interval arithmetic with outward rounding.

Every certified quantity in the package is carried as a :class:`BoundInterval`
whose endpoints are exact :class:`fractions.Fraction` values.  Operations that
cannot be done exactly (square roots, trigonometric functions, the value of pi)
round their endpoints outward, so the true value is always enclosed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]

_DECIMAL_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_RATIONAL_RE = re.compile(r"^[+-]?\d+/\d+$")

# pi to 80 decimals, truncated; the enclosure is [PI_DIGITS, PI_DIGITS + 10^-80]
_PI_DIGITS = (
    "3.14159265358979323846264338327950288419716939937510"
    "582097494459230781640628620899862"
)


def parse_rational(text) -> Fraction:
    """Convert ``text`` to an exact Fraction.

    Accepts ints, Fractions, ``"p/q"`` strings and decimal strings (converted
    exactly, so ``"0.1"`` is 1/10).  Floats are converted exactly as binary
    fractions.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        if not math.isfinite(text):
            raise ValueError(f"non-finite value {text!r}")
        return Fraction(text)
    s = str(text).strip()
    if _RATIONAL_RE.match(s):
        num, den = s.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    if _DECIMAL_RE.match(s):
        return Fraction(s)
    raise ValueError(f"not a rational or decimal number: {text!r}")


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return parse_rational(x)


def floor_div(q: Fraction) -> int:
    return q.numerator // q.denominator


def ceil_div(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def sqrt_bounds(q: Rational, bits: int = 96) -> tuple[Fraction, Fraction]:
    """Dyadic lower and upper bounds of sqrt(q) with about ``bits`` fractional bits."""
    q = as_fraction(q)
    if q < 0:
        raise ValueError("sqrt of a negative number")
    if q == 0:
        return Fraction(0), Fraction(0)
    # keep relative precision for small arguments
    shift = bits + max(0, -(q.numerator.bit_length() - q.denominator.bit_length()) // 2 + 1)
    scale = 1 << (2 * shift)
    n_lo = floor_div(q * scale)
    r_lo = math.isqrt(n_lo)
    n_hi = ceil_div(q * scale)
    r_hi = math.isqrt(n_hi)
    if r_hi * r_hi < n_hi:
        r_hi += 1
    den = 1 << shift
    return Fraction(r_lo, den), Fraction(r_hi, den)


def round_down(q: Fraction, digits: int) -> Fraction:
    scale = 10**digits
    return Fraction(floor_div(q * scale), scale)


def round_up(q: Fraction, digits: int) -> Fraction:
    scale = 10**digits
    return Fraction(ceil_div(q * scale), scale)


def decimal_str(q: Fraction, digits: int, direction: str) -> str:
    """Fixed-point decimal string of ``q`` rounded toward ``direction`` ('down'/'up')."""
    r = round_down(q, digits) if direction == "down" else round_up(q, digits)
    scale = 10**digits
    n = r.numerator * (scale // r.denominator)
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, scale)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


def _coerce(x) -> "BoundInterval":
    if isinstance(x, BoundInterval):
        return x
    return BoundInterval.point(x)


@dataclass(frozen=True)
class BoundInterval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_fraction(self.lo), as_fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{float(lo)}, {float(hi)}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "BoundInterval":
        x = as_fraction(x)
        return cls(x, x)

    @classmethod
    def hull(cls, *items) -> "BoundInterval":
        items = [_coerce(i) for i in items]
        return cls(min(i.lo for i in items), max(i.hi for i in items))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, BoundInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, float):
            return float(self.lo) <= x <= float(self.hi) or self.lo <= Fraction(x) <= self.hi
        return self.lo <= as_fraction(x) <= self.hi

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def __add__(self, other):
        o = _coerce(other)
        return BoundInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return BoundInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        o = _coerce(other)
        prods = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return BoundInterval(min(prods), max(prods))

    __rmul__ = __mul__

    def recip(self) -> "BoundInterval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return BoundInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * _coerce(other).recip()

    def __rtruediv__(self, other):
        return _coerce(other) * self.recip()

    def square(self) -> "BoundInterval":
        if self.lo >= 0:
            return BoundInterval(self.lo * self.lo, self.hi * self.hi)
        if self.hi <= 0:
            return BoundInterval(self.hi * self.hi, self.lo * self.lo)
        return BoundInterval(0, max(self.lo * self.lo, self.hi * self.hi))

    def abs(self) -> "BoundInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return BoundInterval(0, max(-self.lo, self.hi))

    def sqrt(self, bits: int = 96) -> "BoundInterval":
        if self.lo < 0:
            raise ValueError("sqrt of an interval with negative part")
        return BoundInterval(sqrt_bounds(self.lo, bits)[0], sqrt_bounds(self.hi, bits)[1])

    def max(self, other) -> "BoundInterval":
        o = _coerce(other)
        return BoundInterval(max(self.lo, o.lo), max(self.hi, o.hi))

    def min(self, other) -> "BoundInterval":
        o = _coerce(other)
        return BoundInterval(min(self.lo, o.lo), min(self.hi, o.hi))

    def intersect(self, other) -> "BoundInterval":
        o = _coerce(other)
        return BoundInterval(max(self.lo, o.lo), min(self.hi, o.hi))

    def simplify(self, bits: int = 128) -> "BoundInterval":
        """Outward-round both endpoints to dyadic rationals with ``bits`` fractional bits."""
        scale = 1 << bits
        return BoundInterval(
            Fraction(floor_div(self.lo * scale), scale),
            Fraction(ceil_div(self.hi * scale), scale),
        )

    def decimal(self, digits: int = 9) -> tuple[str, str]:
        return decimal_str(self.lo, digits, "down"), decimal_str(self.hi, digits, "up")

    def __float__(self) -> float:
        return float(self.mid)

    def __repr__(self) -> str:
        lo, hi = self.decimal(12)
        return f"BoundInterval[{lo}, {hi}]"


def _pi_enclosure() -> BoundInterval:
    lo = Fraction(_PI_DIGITS)
    return BoundInterval(lo, lo + Fraction(1, 10**80))


PI = _pi_enclosure()


def pi_series(digits: int = 60) -> BoundInterval:
    """Independent pi enclosure from Machin's formula (used to check ``PI``)."""

    def arctan_inv(n: int, terms: int) -> BoundInterval:
        # alternating series: partial sums bracket the limit
        s = Fraction(0)
        for k in range(terms):
            s += Fraction((-1) ** k, (2 * k + 1) * n ** (2 * k + 1))
        nxt = Fraction(1, (2 * terms + 1) * n ** (2 * terms + 1))
        return BoundInterval(s - nxt, s) if terms % 2 else BoundInterval(s, s + nxt)

    terms = digits // 1 + 5
    return 16 * arctan_inv(5, terms) - 4 * arctan_inv(239, terms)


def _taylor_sin_cos(x: Fraction, tol: Fraction) -> tuple[BoundInterval, BoundInterval]:
    ax = abs(x)
    s = Fraction(0)
    c = Fraction(0)
    term = Fraction(1)  # x^n / n!
    n = 0
    while True:
        if n % 4 == 0:
            c += term
        elif n % 4 == 1:
            s += term
        elif n % 4 == 2:
            c -= term
        else:
            s -= term
        n += 1
        term = term * x / n
        # Lagrange remainder of either series is bounded by |x|^n / n!
        if abs(term) < tol and n > 2 * ax:
            break
    r = abs(term)
    return BoundInterval(s - r, s + r), BoundInterval(c - r, c + r)


def _clip_unit(iv: BoundInterval) -> BoundInterval:
    return BoundInterval(max(iv.lo, -1), min(iv.hi, 1)) if iv.lo <= 1 and iv.hi >= -1 else iv


def sin_cos(x, tol: Fraction = Fraction(1, 2**100)) -> tuple[BoundInterval, BoundInterval]:
    """Enclosures of (sin x, cos x) for a rational or interval argument."""
    if isinstance(x, BoundInterval):
        m = x.mid
        r = x.width / 2
        s, c = _taylor_sin_cos(m, tol / 2)
        # sin and cos are 1-Lipschitz
        return _clip_unit(s + BoundInterval(-r, r)), _clip_unit(c + BoundInterval(-r, r))
    s, c = _taylor_sin_cos(as_fraction(x), tol)
    return _clip_unit(s), _clip_unit(c)
