"""Shared fixtures and independent oracles.

The oracles here recompute orbit levels from first principles (exact
Fraction positions for rational rotation numbers, integer quadratic
arithmetic for the inverse golden ratio) so kernel results are checked
against arithmetic that shares no code with the implementation.
"""

from __future__ import annotations

import math
from fractions import Fraction

import pytest

from cylinder_lab.cf import ExplicitSource, PeriodicSource, expand_real
from cylinder_lab.certified import CertifiedReal


@pytest.fixture
def golden() -> CertifiedReal:
    """alpha = [1,1,1,...] = (sqrt(5)-1)/2."""
    return CertifiedReal(PeriodicSource([], [1]))


@pytest.fixture
def silver() -> CertifiedReal:
    """alpha = [2,2,2,...] = sqrt(2)-1."""
    return CertifiedReal(PeriodicSource([], [2]))


def rational_alpha(p: int, q: int) -> CertifiedReal:
    return CertifiedReal(expand_real(Fraction(p, q)))


def oracle_levels_rational(alpha: Fraction, x: Fraction, n: int, from_alpha=False) -> list[int]:
    """Levels by literal Fraction arithmetic: +1 iff position in [0, 1/2]."""
    levels = []
    lev = 0
    for k in range(1, n + 1):
        t = k if from_alpha else k - 1
        pos = (x + t * alpha) % 1
        lev += 1 if pos <= Fraction(1, 2) else -1
        levels.append(lev)
    return levels


def _golden_sign(k: int) -> int:
    """Sign of f at k*(sqrt(5)-1)/2 mod 1 by integer quadratic comparisons.

    pos = (k sqrt5 - k)/2 - m with m = floor(k*alpha); pos <= 1/2 iff
    k*sqrt5 <= k + 2m + 1 iff 5k^2 <= (k + 2m + 1)^2 (right side positive).
    """
    # floor(k*alpha) = floor((k*sqrt5 - k)/2): largest m with 2m + k <= k sqrt5.
    s = math.isqrt(5 * k * k)  # floor(k sqrt5); k sqrt5 irrational for k >= 1
    m = (s - k) // 2
    rhs = k + 2 * m + 1
    return 1 if 5 * k * k <= rhs * rhs else -1


def oracle_levels_golden(n: int, from_alpha=True) -> list[int]:
    levels = []
    lev = 0
    for k in range(1, n + 1):
        t = k if from_alpha else k - 1
        lev += _golden_sign(t) if t else 1  # position 0 lies in [0, 1/2]
        levels.append(lev)
    return levels
