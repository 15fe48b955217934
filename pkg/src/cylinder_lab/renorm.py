"""Stack-and-shift renormalization for interleaved rotation numbers.

For alpha = [2a_1, b_1, 2a_2, b_2, ...] the level profile of the orbit of
(alpha, 0) through the even-index convergent denominators has a rigid
recursive structure: the block of length q_{2n+2} consists of repeated
single peaks, each of which stacks translated copies of the q_{2n}-block.
This module computes exact level histograms of those blocks in time
proportional to the number of levels (never the block length), plus the
convergence bounds they certify for reciprocal sums over balanced times.

The attachment bookkeeping the figures leave open is fixed as follows and
validated against brute-force orbits in the test suite: with a = a_{n+1},
the single peak of length q_{2n+1} is

    [block at height 0] [block at 1] ... [block at a-1]      (rising)
    [block at height a, extended by the previous single peak]
    [block at a-1] ... [block at 1]                          (falling)

and the q_{2n+2}-block is b_{n+1} such peaks followed by one q_{2n}-block
at ground level.  Histogram-wise: the peak histogram is the block
histogram placed once at height 0, twice at heights 1..a-1, once at
height a, plus the previous peak histogram at height a.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .cf import ConstructedSource
from .enclosure import Enclosure, power_sum_bounds
from .errors import BudgetExceeded, DomainError, InvalidSchedule
from .fileio import atomic_write_text

__all__ = [
    "CSequence",
    "PeakSchedule",
    "PeakHistogram",
    "peak_histogram",
    "max_hits",
    "zero_hit_window_bound",
    "convergence_bound",
    "ConvergenceBound",
    "generate_schedule",
]

DEFAULT_SUPPORT_LIMIT = 300_000


@dataclass(frozen=True)
class CSequence:
    """A positive summable target sequence c_1, c_2, ... (geometric for now)."""

    kind: str
    ratio: Fraction

    @staticmethod
    def geometric(ratio) -> "CSequence":
        ratio = Fraction(ratio)
        if not 0 < ratio < 1:
            raise DomainError("geometric ratio must lie in (0,1)")
        return CSequence("geometric", ratio)

    def value(self, n: int) -> Fraction:
        if n < 1:
            raise DomainError("c_n is defined for n >= 1")
        return self.ratio**n

    def to_json(self) -> dict:
        return {"kind": self.kind, "ratio": [str(self.ratio.numerator), str(self.ratio.denominator)]}

    @staticmethod
    def from_json(obj: dict) -> "CSequence":
        if obj["kind"] != "geometric":
            raise DomainError(f"unknown c-sequence kind {obj['kind']!r}")
        ratio = obj["ratio"]
        if isinstance(ratio, (list, tuple)):
            return CSequence.geometric(Fraction(int(ratio[0]), int(ratio[1])))
        return CSequence.geometric(Fraction(str(ratio)))


class PeakSchedule:
    """Schedules a_i, b_i for an interleaved rotation number.

    Either fully explicit (lists) or generated on demand from a growth
    rule keyed to a summable target sequence; see :func:`generate_schedule`.
    """

    def __init__(
        self,
        a: list[int] | None = None,
        b: list[int] | None = None,
        bound: int = 1,
        c: CSequence | None = None,
        r: int | None = None,
        delta: Fraction | None = None,
        rule: str | None = None,
    ):
        if bound < 1:
            raise InvalidSchedule("bound M must be >= 1")
        self.bound = bound
        self.c = c
        self.r = r
        self.delta = Fraction(delta) if delta is not None else None
        self.rule = rule
        self._a: list[int] = list(a) if a else []
        self._b: list[int] = list(b) if b else []
        for i, bi in enumerate(self._b, start=1):
            if not 1 <= bi <= bound:
                raise InvalidSchedule(f"b_{i} = {bi} violates 1 <= b_i <= M = {bound}")
        for i, ai in enumerate(self._a, start=1):
            if ai < 1:
                raise InvalidSchedule(f"a_{i} = {ai} must be >= 1")
        # Convergent denominators q_0, q_1, ... of the interleaved stream,
        # grown alongside the schedule.
        self._q: list[int] = [1]
        self._a_sums: list[int] = [0]

    # -- access -------------------------------------------------------------

    def known_pairs(self) -> int:
        return min(len(self._a), len(self._b))

    def ensure(self, n: int) -> None:
        """Make pairs 1..n available, generating by rule when present."""
        while self.known_pairs() < n:
            if self.rule is None:
                raise BudgetExceeded(
                    f"explicit schedule has {self.known_pairs()} pairs, {n} needed"
                )
            self._generate_next()

    def pair(self, i: int) -> tuple[int, int]:
        self.ensure(i)
        return self._a[i - 1], self._b[i - 1]

    def a_sum(self, n: int) -> int:
        """A_n = a_1 + ... + a_n."""
        self.ensure(n)
        while len(self._a_sums) <= n:
            self._a_sums.append(self._a_sums[-1] + self._a[len(self._a_sums) - 1])
        return self._a_sums[n]

    def q(self, m: int) -> int:
        """Denominator q_m of the interleaved quotient stream (q_0 = 1)."""
        if m < 0:
            return 0 if m == -1 else _raise_domain(m)
        self.ensure((m + 1) // 2)
        while len(self._q) <= m:
            k = len(self._q)  # next index to fill
            a_k = 2 * self._a[(k - 1) // 2] if k % 2 == 1 else self._b[k // 2 - 1]
            prev2 = self._q[k - 2] if k >= 2 else 0
            self._q.append(a_k * self._q[k - 1] + prev2)
        return self._q[m]

    def source(self) -> ConstructedSource:
        if self.rule is None:
            return ConstructedSource(self._a, self._b, self.bound)

        def a_rule(i: int) -> int:
            self.ensure(i)
            return self._a[i - 1]

        def b_rule(i: int) -> int:
            self.ensure(i)
            return self._b[i - 1]

        return ConstructedSource(a_rule, b_rule, self.bound)

    # -- generation ---------------------------------------------------------

    def _generate_next(self) -> None:
        i = self.known_pairs() + 1
        if self.rule == "log":
            a_i = self._next_log_entry(i)
        elif self.rule == "delta":
            a_i = self._next_delta_entry(i)
        else:
            raise InvalidSchedule(f"unknown generation rule {self.rule!r}")
        self._a.append(a_i)
        self._b.append(self.bound)

    def _next_log_entry(self, i: int) -> int:
        """Smallest a_i with log(2M A_i)/A_i < c_i (and the polynomial cap)."""
        c_i = self.c.value(i)
        prev_sum = self.a_sum(i - 1)
        total = prev_sum + 1
        while not _log_condition_holds(self.bound, total, c_i):
            total += max(1, total // 8)  # overshoot, then binary search back
        lo, hi = max(prev_sum + 1, total - total // 8 - 1), total
        while lo < hi:
            mid = (lo + hi) // 2
            if _log_condition_holds(self.bound, mid, c_i):
                hi = mid
            else:
                lo = mid + 1
        a_i = lo - prev_sum
        if i >= 2 and self.r is not None and not a_i + 1 < prev_sum**self.r:
            raise InvalidSchedule(
                f"a_{i} = {a_i} cannot satisfy a_i + 1 < A_{i-1}^{self.r}"
            )
        return a_i

    def _next_delta_entry(self, i: int) -> int:
        """Smallest a_i with q_{2i}^(1-delta) / A_i^delta < c_i, exactly."""
        c_i = self.c.value(i)
        prev_sum = self.a_sum(i - 1)
        q_prev = self.q(2 * i - 2)
        q_odd_prev = self.q(2 * i - 3) if i >= 2 else 0

        def ok(a_i: int) -> bool:
            q_odd = 2 * a_i * q_prev + q_odd_prev
            q_even = self.bound * q_odd + q_prev
            return _delta_condition_holds(q_even, prev_sum + a_i, self.delta, c_i)

        hi = 1
        while not ok(hi):
            hi *= 2
        lo = max(1, hi // 2)
        while lo < hi:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid + 1
        return lo

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        obj: dict = {
            "a": [str(a) for a in self._a],
            "b": [str(b) for b in self._b],
            "M": self.bound,
        }
        if self.r is not None:
            obj["r"] = self.r
        if self.c is not None:
            obj["c"] = self.c.to_json()
        if self.delta is not None:
            obj["delta"] = [str(self.delta.numerator), str(self.delta.denominator)]
        if self.rule is not None:
            obj["rule"] = self.rule
        return obj

    def write_json(self, path) -> None:
        atomic_write_text(path, json.dumps(self.to_json(), indent=2) + "\n")

    @staticmethod
    def from_json(obj: dict) -> "PeakSchedule":
        delta = obj.get("delta")
        if delta is not None:
            delta = Fraction(int(delta[0]), int(delta[1]))
        return PeakSchedule(
            a=[int(x) for x in obj.get("a", [])],
            b=[int(x) for x in obj.get("b", [])],
            bound=int(obj["M"]),
            c=CSequence.from_json(obj["c"]) if "c" in obj else None,
            r=obj.get("r"),
            delta=delta,
            rule=obj.get("rule"),
        )


def _raise_domain(m):
    raise DomainError(f"q index {m} out of range")


def _log_condition_holds(bound: int, total: int, c: Fraction) -> bool:
    """Certified check of log(2 M A) / A < c via directed rounding."""
    target = Fraction(c) * total
    for precision in (96, 256, 1024):
        with gmpy2.context(precision=precision, round=gmpy2.RoundUp):
            upper = gmpy2.log(gmpy2.mpfr(2 * bound * total))
            t_up = gmpy2.mpfr(gmpy2.mpq(target.numerator, target.denominator))
        with gmpy2.context(precision=precision, round=gmpy2.RoundDown):
            lower = gmpy2.log(gmpy2.mpfr(2 * bound * total))
            t_dn = gmpy2.mpfr(gmpy2.mpq(target.numerator, target.denominator))
        if upper < t_dn:
            return True
        if lower >= t_up:
            return False
    raise DomainError("log-condition comparison undecided at 1024 bits")


def _delta_condition_holds(q_even: int, total: int, delta: Fraction, c: Fraction) -> bool:
    """Exact check of q^(1-delta) / A^delta < c by clearing denominators."""
    den = delta.denominator
    e1 = den - delta.numerator  # (1-delta) * den
    e2 = delta.numerator  # delta * den
    lhs = q_even**e1 * c.denominator**den
    rhs = c.numerator**den * total**e2
    return lhs < rhs


# -- histograms -------------------------------------------------------------


@dataclass
class PeakHistogram:
    """Exact level histogram of the initial q_{2n}-block of the orbit.

    ``counts[t]`` is the number of steps k in [0, q_{2n}-1] whose level is
    t; the support is exactly {0, ..., A_n} and every level is hit.
    """

    depth: int
    block_length: int
    counts: list[int] = field(repr=False)

    def support_size(self) -> int:
        return len(self.counts)

    def total(self) -> int:
        return sum(self.counts)

    def max_count(self) -> int:
        return max(self.counts)

    def count(self, level: int) -> int:
        if 0 <= level < len(self.counts):
            return self.counts[level]
        return 0

    def write_csv(self, path) -> None:
        lines = ["level,count"]
        for level, c in enumerate(self.counts):
            lines.append(f"{level},{c}")
        atomic_write_text(path, "\n".join(lines) + "\n")


def _hist_recursion(schedule: PeakSchedule, n: int, support_limit: int) -> tuple[list[int], list[int]]:
    """Exact block and peak histograms at depth n (as level-indexed lists)."""
    if schedule.a_sum(n) > support_limit:
        raise BudgetExceeded(
            f"support A_{n} = {schedule.a_sum(n)} exceeds limit {support_limit}; "
            "use the bound recursion"
        )
    block = [1]  # depth 0: single ground-level step
    peak: list[int] = []  # formal depth 0 peak has length q_{-1} = 0
    for i in range(1, n + 1):
        a_i, b_i = schedule.pair(i)
        # New peak: block at heights {0: once, 1..a-1: twice, a: once}
        # plus the previous peak at height a, via prefix sums.
        prefix = [0]
        for c in block:
            prefix.append(prefix[-1] + c)

        def window(t: int) -> int:
            hi = min(t, len(block) - 1)
            lo = max(0, t - a_i)
            if lo > hi:
                return 0
            return prefix[hi + 1] - prefix[lo]

        size = len(block) + a_i  # support 0..A_i
        new_peak = []
        for t in range(size):
            v = 2 * window(t)
            if t < len(block):
                v -= block[t]
            if 0 <= t - a_i < len(block):
                v -= block[t - a_i]
            if 0 <= t - a_i < len(peak):
                v += peak[t - a_i]
            new_peak.append(v)
        new_block = [b_i * v for v in new_peak]
        for t, c in enumerate(block):
            new_block[t] += c
        block, peak = new_block, new_peak
    return block, peak


def peak_histogram(
    schedule: PeakSchedule, n: int, support_limit: int = DEFAULT_SUPPORT_LIMIT
) -> PeakHistogram:
    """Exact histogram of the q_{2n}-block, computed by renormalization."""
    if n < 0:
        raise DomainError("depth must be >= 0")
    block, _ = _hist_recursion(schedule, n, support_limit)
    return PeakHistogram(depth=n, block_length=schedule.q(2 * n), counts=block)


def _max_count_bound(schedule: PeakSchedule, n: int) -> int:
    """Certified upper bound for max_t H_n(t), any schedule size.

    peak_max(i) <= 2 q_{2i-2} + peak_max(i-1) and
    block_max(i) <= b_i * peak_max(i) + block_max(i-1); both follow from
    the stacking structure (every level of the new peak sees the old block
    at most twice, plus the old peak once).
    """
    peak_bound = 0
    block_bound = 1
    for i in range(1, n + 1):
        _, b_i = schedule.pair(i)
        peak_bound = 2 * schedule.q(2 * i - 2) + peak_bound
        block_bound = b_i * peak_bound + block_bound
    return block_bound


def max_count(
    schedule: PeakSchedule, n: int, support_limit: int = DEFAULT_SUPPORT_LIMIT
) -> tuple[int, bool]:
    """(value, exact) where value >= max_t H_n(t), exact when affordable."""
    if schedule.a_sum(n) <= support_limit:
        block, _ = _hist_recursion(schedule, n, support_limit)
        return max(block), True
    return _max_count_bound(schedule, n), False


def max_hits(
    schedule: PeakSchedule, n: int, support_limit: int = DEFAULT_SUPPORT_LIMIT
) -> tuple[int, Fraction]:
    """Maximum level occupancy of the q_{2n}-block and its normalized ratio.

    The ratio max * max(A_n, 1) / q_{2n} is the quantity bounded by a
    schedule-family constant when the a_i grow proportionally to A_{i-1}.
    """
    value, _ = max_count(schedule, n, support_limit)
    a_n = schedule.a_sum(n)
    ratio = Fraction(value * max(a_n, 1), schedule.q(2 * n))
    return value, ratio


def zero_hit_window_bound(
    schedule: PeakSchedule, n: int, support_limit: int = DEFAULT_SUPPORT_LIMIT
) -> int:
    """Bound on zero-level hits in ANY q_{2n}-length window of any orbit.

    Twice the maximal occupancy: a window overlaps at most two of the
    stacked peaks.  When the support is too large for the exact histogram
    this returns twice the certified upper bound, which is still a valid
    window bound.
    """
    value, _ = max_count(schedule, n, support_limit)
    return 2 * value


@dataclass
class ConvergenceBound:
    """Analytic upper bound for sup_x of the balanced reciprocal sum."""

    depth: int
    delta: Fraction
    total: Enclosure
    blocks: list[Enclosure]
    block_over_c: list[Fraction] | None

    def partial_totals(self) -> list[Enclosure]:
        out = []
        acc = Enclosure.zero()
        for b in self.blocks:
            acc = acc + b
            out.append(acc)
        return out


def convergence_bound(
    schedule: PeakSchedule,
    depth: int,
    delta: Fraction = Fraction(1),
    refined: bool = False,
    support_limit: int = DEFAULT_SUPPORT_LIMIT,
) -> ConvergenceBound:
    """Enclosure of an upper bound for sup_x sum over balanced n <= q_{2K+2}
    of n^-delta, summed block by block over k = 0..K.

    Block k covers balanced times in (q_{2k}, q_{2k+2}] via windows
    [i q_{2k}, (i+1) q_{2k}], i = 1..(a_{k+1}+1)*2M, each holding at most
    the zero-hit window bound of depth k.  At most 2 M A_k + 3 of those
    windows actually meet the balanced set; that tighter count is opt-in
    for delta = 1 (``refined``) but mandatory for delta < 1, where the
    full count provably diverges for rapidly growing schedules (one extra
    untruncated window is charged whenever the count is truncated, and
    depth k = 0 always uses the full count since A_0 = 0).
    """
    delta = Fraction(delta)
    if not Fraction(1, 2) < delta <= 1:
        raise DomainError(f"delta = {delta} must lie in (1/2, 1]")
    if depth < 0:
        raise DomainError("depth must be >= 0")
    blocks: list[Enclosure] = []
    ratios: list[Fraction] = [] if schedule.c is not None else None
    total = Enclosure.zero()
    for k in range(depth + 1):
        a_next, _ = schedule.pair(k + 1)
        full_count = (a_next + 1) * 2 * schedule.bound
        meet_count = 2 * schedule.bound * schedule.a_sum(k) + 3
        use_meet = k >= 1 and (refined or delta != 1) and meet_count < full_count
        window_count = meet_count if use_meet else full_count
        z_k = zero_hit_window_bound(schedule, k, support_limit)
        q_2k = schedule.q(2 * k)
        inner = power_sum_bounds(window_count, delta)
        if use_meet:
            inner = inner + Enclosure.of_fraction(Fraction(1))
        q_pow = _reciprocal_power_enclosure(q_2k, delta)
        block = _mul_enclosures(inner, q_pow).scale(z_k)
        blocks.append(block)
        total = total + block
        if ratios is not None and k >= 1:
            c_k = schedule.c.value(k)
            ratios.append(Fraction(float(block.upper)) / c_k if c_k else None)
    return ConvergenceBound(depth=depth, delta=delta, total=total, blocks=blocks, block_over_c=ratios)


def _reciprocal_power_enclosure(q: int, delta: Fraction) -> Enclosure:
    from .enclosure import _down, _mpfr_down, _mpfr_up, _up

    d_dn, d_up = _mpfr_down(delta), _mpfr_up(delta)
    hi_pow = _up(lambda: gmpy2.mpfr(q) ** d_up)
    lo_pow = _down(lambda: gmpy2.mpfr(q) ** d_dn)
    return Enclosure(_down(lambda: 1 / hi_pow), _up(lambda: 1 / lo_pow))


def _mul_enclosures(a: Enclosure, b: Enclosure) -> Enclosure:
    from .enclosure import _down, _up

    # All quantities here are nonnegative.
    return Enclosure(_down(lambda: a.lower * b.lower), _up(lambda: a.upper * b.upper))


def generate_schedule(
    c: CSequence,
    bound: int,
    r: int | None = 2,
    delta: Fraction | None = None,
) -> PeakSchedule:
    """Canonical deterministic schedule: b_i = M and each a_i is the
    smallest entry meeting the growth rule (the log rule by default, the
    delta rule when an exponent in (1/2, 1) is supplied)."""
    if delta is not None:
        delta = Fraction(delta)
        if not Fraction(1, 2) < delta < 1:
            raise DomainError("delta rule needs delta strictly between 1/2 and 1")
        return PeakSchedule(bound=bound, c=c, delta=delta, rule="delta")
    return PeakSchedule(bound=bound, c=c, r=r, rule="log")
