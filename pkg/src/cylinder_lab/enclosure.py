"""Directed-rounding enclosures for reciprocal sums.

All bounds are computed with 128-bit mpfr arithmetic, rounding the lower
bound down and the upper bound up at every operation, so an enclosure is
a mathematical guarantee rather than an estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2

__all__ = ["PRECISION", "Enclosure", "sum_reciprocal_powers", "power_sum_bounds"]

PRECISION = 128

def _ctx_down():
    return gmpy2.context(precision=PRECISION, round=gmpy2.RoundDown)


def _ctx_up():
    return gmpy2.context(precision=PRECISION, round=gmpy2.RoundUp)


def _down(f):
    # A fresh context per call keeps directed rounding thread-safe.
    with _ctx_down():
        return f()


def _up(f):
    with _ctx_up():
        return f()


def _mpfr_down(x: Fraction):
    with _ctx_down():
        return gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator))


def _mpfr_up(x: Fraction):
    with _ctx_up():
        return gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator))


@dataclass(frozen=True)
class Enclosure:
    """A closed interval [lower, upper] certified to contain the value."""

    lower: object
    upper: object

    @staticmethod
    def zero() -> "Enclosure":
        return Enclosure(gmpy2.mpfr(0), gmpy2.mpfr(0))

    @staticmethod
    def of_fraction(x: Fraction) -> "Enclosure":
        return Enclosure(_mpfr_down(x), _mpfr_up(x))

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(
            _down(lambda: self.lower + other.lower),
            _up(lambda: self.upper + other.upper),
        )

    def scale(self, factor: int) -> "Enclosure":
        if factor < 0:
            raise ValueError("only nonnegative scaling is supported")
        return Enclosure(
            _down(lambda: self.lower * factor),
            _up(lambda: self.upper * factor),
        )

    def width(self):
        return _up(lambda: self.upper - self.lower)

    def midpoint(self):
        return _down(lambda: (self.lower + self.upper) / 2)

    def __str__(self) -> str:
        return f"[{self.lower}, {self.upper}]"


def _pow_term(n: int, delta: Fraction) -> Enclosure:
    """Enclosure of n^(-delta) for n >= 1, 0 < delta <= 1."""
    d_dn, d_up = _mpfr_down(delta), _mpfr_up(delta)
    # n^delta is increasing in delta for n >= 1.
    hi_pow = _up(lambda: gmpy2.mpfr(n) ** d_up)
    lo_pow = _down(lambda: gmpy2.mpfr(n) ** d_dn)
    return Enclosure(_down(lambda: 1 / hi_pow), _up(lambda: 1 / lo_pow))


def sum_reciprocal_powers(values, delta: Fraction) -> Enclosure:
    """Enclosure of sum(n^-delta for n in values)."""
    delta = Fraction(delta)
    total = Enclosure.zero()
    for n in values:
        total = total + _pow_term(int(n), delta)
    return total


def power_sum_bounds(count: int, delta: Fraction, exact_limit: int = 100_000) -> Enclosure:
    """Enclosure of sum_{i=1}^{count} i^(-delta), 1/2 < delta <= 1.

    Small counts are summed term by term; astronomically large counts use
    the integral sandwich (ln(T+1) <= H_T <= 1 + ln T, and its power-law
    analogue for delta < 1).
    """
    delta = Fraction(delta)
    if count <= 0:
        return Enclosure.zero()
    if count <= exact_limit:
        return sum_reciprocal_powers(range(1, count + 1), delta)
    t = gmpy2.mpfr(count)
    if delta == 1:
        lower = _down(lambda: gmpy2.log(t + 1))
        upper = _up(lambda: 1 + gmpy2.log(t))
        return Enclosure(lower, upper)
    one_minus_dn = _mpfr_down(1 - delta)
    one_minus_up = _mpfr_up(1 - delta)
    lower = _down(lambda: ((t + 1) ** one_minus_dn - 1) / one_minus_up)
    upper = _up(lambda: 1 + (t ** one_minus_up - 1) / one_minus_dn)
    return Enclosure(lower, upper)
