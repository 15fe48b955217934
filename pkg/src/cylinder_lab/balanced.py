"""Balanced-time sets, level occupancy and reciprocal-sum enclosures.

A balanced time is a step count at which the orbit has returned to level
zero: equally many of the first n positions landed inside [0, 1/2] as
outside.  Everything here is exact; reciprocal sums are reported as
directed-rounding enclosures so that boundedness claims can be asserted
against analytic bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .certified import CertifiedReal
from .dynamics import scan_orbit
from .enclosure import Enclosure, sum_reciprocal_powers
from .errors import BudgetExceeded, DomainError
from .fileio import atomic_write_text

__all__ = [
    "BalancedSet",
    "LevelOccupancy",
    "balanced_times",
    "reciprocal_sum",
    "level_occupancy",
    "return_frequency_fraction",
    "grid_midpoints",
    "write_balanced_csv",
    "write_occupancy_csv",
    "write_sums_csv",
]

DEFAULT_BUDGET = 10_000_000
STREAMING_THRESHOLD = 1_000_000


@dataclass
class BalancedSet:
    """All balanced times up to a horizon, or a count-only summary."""

    x: object
    horizon: int
    count: int
    times: np.ndarray | None = None

    def __post_init__(self):
        if self.times is not None:
            if len(self.times) != self.count:
                raise DomainError("count disagrees with the stored list")
            if len(self.times) and (
                self.times[0] < 1
                or self.times[-1] > self.horizon
                or (np.diff(self.times) <= 0).any()
            ):
                raise DomainError("balanced times must be strictly increasing in [1, horizon]")


@dataclass
class LevelOccupancy:
    """Exact histogram of the levels after steps 1..horizon."""

    horizon: int
    counts: dict[int, int]

    def total(self) -> int:
        return sum(self.counts.values())

    def support(self) -> tuple[int, int]:
        levels = sorted(self.counts)
        return levels[0], levels[-1]


def balanced_times(
    alpha: CertifiedReal,
    x,
    horizon: int,
    store: bool | None = None,
    budget: int = DEFAULT_BUDGET,
) -> BalancedSet:
    """Exact balanced-time set of the orbit of (x, 0) up to the horizon.

    ``store=None`` switches to count-only streaming above 10^6 steps.
    """
    if horizon > budget:
        raise BudgetExceeded(f"horizon {horizon} exceeds brute-force budget {budget}")
    if store is None:
        store = horizon <= STREAMING_THRESHOLD
    res = scan_orbit(alpha, x, horizon, want_balanced=True)
    times = res["balanced"]
    return BalancedSet(
        x=x,
        horizon=horizon,
        count=len(times),
        times=times if store else None,
    )


def reciprocal_sum(bset: BalancedSet, delta: Fraction = Fraction(1)) -> Enclosure:
    """Enclosure of sum(n^-delta) over the balanced times."""
    delta = Fraction(delta)
    if not Fraction(1, 2) < delta <= 1:
        raise DomainError(f"delta = {delta} must lie in (1/2, 1]")
    if bset.times is None:
        raise DomainError("reciprocal_sum needs a stored time list (store=True)")
    return sum_reciprocal_powers(bset.times, delta)


def _abs_level_bound(alpha: CertifiedReal, horizon: int) -> int:
    """3*A_n for the smallest depth n with q_n >= horizon (a valid level bound)."""
    n = 1
    while alpha.convergent(n).q < horizon:
        n += 1
    total = sum(alpha.source.quotient(i) for i in range(1, n + 1))
    return 3 * total


def level_occupancy(
    alpha: CertifiedReal, x, horizon: int, budget: int = DEFAULT_BUDGET
) -> LevelOccupancy:
    if horizon > budget:
        raise BudgetExceeded(f"horizon {horizon} exceeds brute-force budget {budget}")
    bound = _abs_level_bound(alpha, horizon)
    res = scan_orbit(alpha, x, horizon, hist_bound=bound)
    hist = res["hist"]
    counts = {
        int(level - bound): int(c)
        for level, c in enumerate(hist)
        if c
    }
    return LevelOccupancy(horizon=horizon, counts=counts)


def grid_midpoints(grid_size: int) -> list[Fraction]:
    """The x grid j/G + 1/(2G); midpoints avoid the boundary orbit of 0 and 1/2."""
    if grid_size < 1:
        raise DomainError("grid size must be >= 1")
    return [Fraction(2 * j + 1, 2 * grid_size) for j in range(grid_size)]


def return_frequency_fraction(
    alpha: CertifiedReal,
    n: int,
    grid_size: int,
    budget: int = DEFAULT_BUDGET,
) -> Fraction:
    """Fraction of grid points whose balanced-return frequency within q_n
    steps exceeds 1/(4(6 A_n + 1))."""
    if grid_size < 64:
        raise DomainError("grid size must be >= 64")
    q_n = alpha.convergent(n).q
    if q_n > budget:
        raise BudgetExceeded(f"q_{n} = {q_n} exceeds budget {budget}")
    a_sum = sum(alpha.source.quotient(i) for i in range(1, n + 1))
    threshold = Fraction(1, 4 * (6 * a_sum + 1))
    hits = 0
    for x in grid_midpoints(grid_size):
        bset = balanced_times(alpha, x, q_n, store=False)
        if Fraction(bset.count, q_n) > threshold:
            hits += 1
    return Fraction(hits, grid_size)


def write_balanced_csv(path, bset: BalancedSet) -> None:
    if bset.times is None:
        raise DomainError("no stored times to write")
    lines = ["n"] + [str(int(t)) for t in bset.times]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_occupancy_csv(path, occ: LevelOccupancy) -> None:
    lines = ["level,count"]
    for level in sorted(occ.counts):
        lines.append(f"{level},{occ.counts[level]}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_sums_csv(path, rows) -> None:
    """Rows of (horizon, enclosure, delta)."""
    lines = ["N,lower,upper,delta"]
    for horizon, enc, delta in rows:
        lines.append(f"{horizon},{enc.lower},{enc.upper},{delta}")
    atomic_write_text(path, "\n".join(lines) + "\n")
