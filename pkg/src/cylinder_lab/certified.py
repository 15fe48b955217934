"""Provably correct comparisons against an irrational bracketed by convergents.

A :class:`CertifiedReal` holds a quotient source together with a pair of
consecutive convergents enclosing the value.  Comparisons of orbit
positions against rational thresholds refine the bracket until the order
is decided; refinement can only narrow the enclosure, so a comparison
certified once can never change its answer later.
"""

from __future__ import annotations

from enum import IntEnum, unique
from fractions import Fraction

from .cf import Convergent, PartialQuotientSource, convergents
from .errors import DomainError, UndecidableAtPrecision

__all__ = ["Ordering", "CertifiedReal", "certify_compare", "f_value"]

ONE_HALF = Fraction(1, 2)


@unique
class Ordering(IntEnum):
    BELOW = -1
    EQUAL = 0
    ABOVE = 1


class CertifiedReal:
    """An irrational (or exact rational) alpha with a refinable bracket.

    For infinite sources the bracket at depth n is the open interval
    between the convergents of index n-1 and n; its width 1/(q_{n-1} q_n)
    shrinks strictly under refinement and alpha always lies strictly
    inside.  Finite explicit sources denote exact rationals and are
    compared exactly with no bracket at all.
    """

    def __init__(self, source: PartialQuotientSource, initial_depth: int = 8):
        self.source = source
        self._exact: Fraction | None = None
        if source.is_exact_rational():
            self._exact = source.value()  # type: ignore[attr-defined]
        self._convergents: list[Convergent] = [Convergent(0, 0, 1)]
        if self._exact is None:
            self.refine_to(min_depth(source, initial_depth))

    # -- bracket bookkeeping ------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self._exact is not None

    @property
    def exact_value(self) -> Fraction:
        if self._exact is None:
            raise DomainError("source is not a finite expansion")
        return self._exact

    @property
    def depth(self) -> int:
        return len(self._convergents) - 1

    @property
    def trusted_depth(self) -> int | None:
        return self.source.max_depth

    def refine_to(self, n: int) -> None:
        if n <= self.depth:
            return
        cap = self.trusted_depth
        if cap is not None and n > cap:
            n = cap
        if n > self.depth:
            self._convergents = convergents(self.source, n)

    def convergent(self, n: int) -> Convergent:
        self.refine_to(n)
        return self._convergents[n]

    def bracket(self) -> tuple[Fraction, Fraction]:
        """Current enclosure (lo, hi) with lo < alpha < hi."""
        return self.bracket_at(self.depth)

    def bracket_at(self, n: int) -> tuple[Fraction, Fraction]:
        if n < 1:
            raise DomainError("bracket needs depth >= 1")
        self.refine_to(n)
        a = self._convergents[n - 1].as_fraction()
        b = self._convergents[n].as_fraction()
        # Even-index convergents approach from below, odd-index from above.
        return (a, b) if (n - 1) % 2 == 0 else (b, a)

    # -- certified comparison ----------------------------------------------

    def compare_frac(self, k: int, x: Fraction, threshold: Fraction) -> Ordering:
        """Exact ordering of (x + k*alpha mod 1) against a rational threshold.

        For k >= 1 and irrational alpha the position is irrational while
        the threshold is rational, so EQUAL is impossible and the doubling
        refinement terminates.  Sources with a finite trusted depth may
        instead exhaust their precision, reported as
        :class:`UndecidableAtPrecision` (never a wrong answer).
        """
        if not 0 <= threshold < 1:
            raise DomainError(f"threshold {threshold} must lie in [0,1)")
        if not 0 <= x < 1:
            raise DomainError(f"x = {x} must lie in [0,1)")
        if k < 0:
            raise DomainError(f"k = {k} must be >= 0")
        if self._exact is not None:
            pos = (x + k * self._exact) % 1
            return Ordering((pos > threshold) - (pos < threshold))
        if k == 0:
            return Ordering((x > threshold) - (x < threshold))

        cap = self.trusted_depth
        n = max(self.depth, 2)
        if cap is not None:
            n = min(n, cap)
        while True:
            lo, hi = self.bracket_at(n)
            low_end = x + k * lo
            high_end = x + k * hi
            fl = low_end.numerator // low_end.denominator
            if fl == high_end.numerator // high_end.denominator:
                u = low_end - fl
                v = high_end - fl
                if u >= threshold:
                    return Ordering.ABOVE
                if v <= threshold:
                    return Ordering.BELOW
            if cap is not None and n >= cap:
                raise UndecidableAtPrecision(
                    f"comparison at k={k} undecided at trusted depth {cap}"
                )
            n *= 2
            if cap is not None:
                n = min(n, cap)


def min_depth(source: PartialQuotientSource, wanted: int) -> int:
    depth = source.max_depth
    return wanted if depth is None else min(wanted, depth)


def certify_compare(alpha: CertifiedReal, k: int, x: Fraction, threshold: Fraction) -> Ordering:
    """Module-level face of :meth:`CertifiedReal.compare_frac`."""
    return alpha.compare_frac(k, Fraction(x), Fraction(threshold))


def f_value(alpha: CertifiedReal, k: int, x: Fraction) -> int:
    """The two-interval step function at position x + k*alpha mod 1.

    +1 on the closed interval [0, 1/2] (both endpoints included), -1 on
    its complement.  The closed convention matters: it makes the function
    upper semicontinuous, which the renormalized construction relies on.
    """
    order = certify_compare(alpha, k, Fraction(x), ONE_HALF)
    return 1 if order is not Ordering.ABOVE else -1
