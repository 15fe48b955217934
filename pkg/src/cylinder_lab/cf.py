"""Exact continued-fraction arithmetic.

Partial-quotient sources, convergents, the quotient shift map, and
partial-quotient sums.  All integer arithmetic is arbitrary precision:
the constructed rotation numbers used elsewhere in the package have
superexponentially growing quotients, so fixed-width integers are ruled
out from the start.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import DomainError, EmptyExpansion, InvalidSchedule, SourceExhausted

__all__ = [
    "Convergent",
    "QuotientStats",
    "PartialQuotientSource",
    "ExplicitSource",
    "PeriodicSource",
    "ConstructedSource",
    "SampledSource",
    "convergents",
    "gauss_map",
    "quotient_sums",
    "expand_real",
]


@dataclass(frozen=True)
class Convergent:
    """Exact convergent p/q at a given truncation depth."""

    n: int
    p: int
    q: int

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def to_json(self) -> dict:
        # Decimal strings: values routinely exceed native integer widths.
        return {"n": self.n, "p": str(self.p), "q": str(self.q)}

    @staticmethod
    def from_json(obj: dict) -> "Convergent":
        return Convergent(int(obj["n"]), int(obj["p"]), int(obj["q"]))


@dataclass(frozen=True)
class QuotientStats:
    """Prefix length together with the exact partial-quotient sum."""

    n: int
    total: int


class PartialQuotientSource:
    """Deterministic producer of partial quotients a_1, a_2, ...

    Subclasses implement :meth:`_compute` returning the i-th quotient
    (1-based) or raising :class:`SourceExhausted`.  Prefixes are memoized;
    repeated queries always return identical values.  Instances are
    immutable apart from the memo, which is append-only, so sharing a
    pre-warmed source between threads for reads is safe.
    """

    kind = "abstract"

    def __init__(self) -> None:
        self._memo: list[int] = []

    @property
    def max_depth(self) -> int | None:
        """Largest trusted index, or None when unbounded."""
        return None

    def _compute(self, i: int) -> int:
        raise NotImplementedError

    def quotient(self, i: int) -> int:
        if i < 1:
            raise DomainError(f"quotient index must be >= 1, got {i}")
        depth = self.max_depth
        if depth is not None and i > depth:
            raise SourceExhausted(
                f"{self.kind} source provides {depth} quotients, index {i} requested"
            )
        while len(self._memo) < i:
            a = self._compute(len(self._memo) + 1)
            if not isinstance(a, int) or a < 1:
                raise InvalidSchedule(f"quotient a_{len(self._memo) + 1} = {a!r} is not a positive integer")
            self._memo.append(a)
        return self._memo[i - 1]

    def prefix(self, n: int) -> tuple[int, ...]:
        if n > 0:
            self.quotient(n)
        return tuple(self._memo[:n])

    def is_exact_rational(self) -> bool:
        """True when the source is a finite expansion, i.e. an exact rational."""
        return False

    def to_json(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_json(obj: dict) -> "PartialQuotientSource":
        kind = obj["kind"]
        if kind == "explicit":
            return ExplicitSource([int(a) for a in obj["quotients"]])
        if kind == "periodic":
            return PeriodicSource([int(a) for a in obj["preperiod"]], [int(a) for a in obj["period"]])
        if kind == "constructed":
            return ConstructedSource([int(a) for a in obj["a"]], [int(a) for a in obj["b"]], int(obj["M"]))
        if kind == "sampled":
            return SampledSource(int(obj["seed"]), int(obj["precision_bits"]))
        raise DomainError(f"unknown source kind {kind!r}")


class ExplicitSource(PartialQuotientSource):
    """A finite, explicitly listed expansion; represents an exact rational."""

    kind = "explicit"

    def __init__(self, quotients: Sequence[int]):
        super().__init__()
        qs = [int(a) for a in quotients]
        for i, a in enumerate(qs, start=1):
            if a < 1:
                raise DomainError(f"partial quotient a_{i} = {a} must be >= 1")
        self._quotients = qs

    @property
    def max_depth(self) -> int:
        return len(self._quotients)

    def _compute(self, i: int) -> int:
        return self._quotients[i - 1]

    def is_exact_rational(self) -> bool:
        return True

    def value(self) -> Fraction:
        """The exact rational this finite expansion denotes (0 when empty)."""
        v = Fraction(0)
        for a in reversed(self._quotients):
            v = Fraction(1, a + v)
        return v

    def to_json(self) -> dict:
        return {"kind": "explicit", "quotients": list(self._quotients)}


class PeriodicSource(PartialQuotientSource):
    """Eventually periodic expansion (a quadratic irrational)."""

    kind = "periodic"

    def __init__(self, preperiod: Sequence[int], period: Sequence[int]):
        super().__init__()
        self._pre = [int(a) for a in preperiod]
        self._per = [int(a) for a in period]
        if not self._per:
            raise DomainError("period must be nonempty")
        for a in self._pre + self._per:
            if a < 1:
                raise DomainError(f"partial quotient {a} must be >= 1")

    def _compute(self, i: int) -> int:
        if i <= len(self._pre):
            return self._pre[i - 1]
        return self._per[(i - len(self._pre) - 1) % len(self._per)]

    def to_json(self) -> dict:
        return {"kind": "periodic", "preperiod": list(self._pre), "period": list(self._per)}


Schedule = Sequence[int] | Callable[[int], int]


def _schedule_get(sched: Schedule, i: int) -> int:
    if callable(sched):
        return int(sched(i))
    if i > len(sched):
        raise SourceExhausted(f"schedule of length {len(sched)} asked for entry {i}")
    return int(sched[i - 1])


def _schedule_len(sched: Schedule) -> int | None:
    return None if callable(sched) else len(sched)


class ConstructedSource(PartialQuotientSource):
    """The interleaved stream 2a_1, b_1, 2a_2, b_2, ... with all b_i <= M.

    Schedules may be explicit lists or 1-based callables (for rule-generated
    schedules whose entries are produced on demand).  The interleave happens
    here so downstream code sees a single quotient stream.
    """

    kind = "constructed"

    def __init__(self, a_schedule: Schedule, b_schedule: Schedule, bound: int):
        super().__init__()
        if bound < 1:
            raise InvalidSchedule(f"bound M = {bound} must be >= 1")
        self._a = a_schedule
        self._b = b_schedule
        self.bound = bound

    @property
    def max_depth(self) -> int | None:
        la, lb = _schedule_len(self._a), _schedule_len(self._b)
        if la is None and lb is None:
            return None
        # A full pair (2a_i, b_i) needs entry i of both schedules.
        la = la if la is not None else lb
        lb = lb if lb is not None else la
        return 2 * min(la, lb)

    def pair(self, i: int) -> tuple[int, int]:
        """The i-th (a_i, b_i) pair, with schedule constraints enforced."""
        a = _schedule_get(self._a, i)
        b = _schedule_get(self._b, i)
        if a < 1:
            raise InvalidSchedule(f"a_{i} = {a} must be >= 1")
        if not 1 <= b <= self.bound:
            raise InvalidSchedule(f"b_{i} = {b} violates 1 <= b_i <= M = {self.bound}")
        return a, b

    def _compute(self, i: int) -> int:
        a, b = self.pair((i + 1) // 2)
        return 2 * a if i % 2 == 1 else b

    def to_json(self) -> dict:
        la, lb = _schedule_len(self._a), _schedule_len(self._b)
        if la is None or lb is None:
            raise DomainError("rule-based schedules serialize via their schedule descriptor")
        return {
            "kind": "constructed",
            "a": [int(x) for x in self._a],
            "b": [int(x) for x in self._b],
            "M": self.bound,
        }


class SampledSource(PartialQuotientSource):
    """Expansion of a uniformly sampled dyadic rational.

    The numerator is drawn on ``precision_bits`` bits, so the value is
    Lebesgue-uniform on (0,1) to within 2^-precision_bits.  Quotients past
    the guard depth (one third of the precision budget, measured in bits
    consumed by the convergent denominator) are refused rather than
    returned: they are artifacts of the dyadic truncation.
    """

    kind = "sampled"

    def __init__(self, seed: int, precision_bits: int):
        super().__init__()
        if precision_bits < 8:
            raise DomainError("precision_bits must be at least 8")
        self.seed = int(seed)
        self.precision_bits = int(precision_bits)
        self._trusted: list[int] | None = None

    def _expand(self) -> list[int]:
        if self._trusted is None:
            rng = random.Random(self.seed)
            num = 0
            while num == 0:
                num = rng.getrandbits(self.precision_bits)
            value = Fraction(num, 1 << self.precision_bits)
            guard = 1 << (self.precision_bits // 3)
            digits: list[int] = []
            q_prev, q_cur = 0, 1
            num_, den_ = value.numerator, value.denominator
            while num_ > 0:
                a, rem = divmod(den_, num_)
                q_prev, q_cur = q_cur, a * q_cur + q_prev
                if q_cur > guard:
                    break
                digits.append(a)
                num_, den_ = rem, num_
            self._trusted = digits
        return self._trusted

    @property
    def max_depth(self) -> int:
        return len(self._expand())

    def _compute(self, i: int) -> int:
        return self._expand()[i - 1]

    def to_json(self) -> dict:
        return {"kind": "sampled", "seed": self.seed, "precision_bits": self.precision_bits}


class _ShiftedSource(PartialQuotientSource):
    """View of another source with the first ``shift`` quotients removed."""

    kind = "shifted"

    def __init__(self, base: PartialQuotientSource, shift: int):
        super().__init__()
        self._base = base
        self._shift = shift

    @property
    def max_depth(self) -> int | None:
        depth = self._base.max_depth
        return None if depth is None else depth - self._shift

    def _compute(self, i: int) -> int:
        return self._base.quotient(i + self._shift)

    def is_exact_rational(self) -> bool:
        return self._base.is_exact_rational()

    def to_json(self) -> dict:
        depth = self.max_depth
        if depth is None:
            raise DomainError("shifted view of an infinite source has no list form")
        return {"kind": "explicit", "quotients": list(self.prefix(depth))}


def convergents(source: PartialQuotientSource, n: int) -> list[Convergent]:
    """Convergents 0..n of the source via the standard recursion.

    p_0/q_0 = 0/1, p_1/q_1 = 1/a_1, and
    p_{k+1} = a_{k+1} p_k + p_{k-1}, likewise for q.
    """
    if n < 0:
        raise DomainError(f"depth n = {n} must be >= 0")
    out = [Convergent(0, 0, 1)]
    p_prev, q_prev = 1, 0  # formal index -1
    p_cur, q_cur = 0, 1
    for k in range(1, n + 1):
        a = source.quotient(k)
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        out.append(Convergent(k, p_cur, q_cur))
    return out


def gauss_map(source: PartialQuotientSource) -> PartialQuotientSource:
    """Shift away the leading quotient: [a_1, a_2, ...] -> [a_2, ...].

    The convention for the empty tail is an empty explicit source, which
    stands for the value 0; shifting an already empty source is an error.
    """
    if isinstance(source, ExplicitSource):
        depth = source.max_depth
        if depth == 0:
            raise EmptyExpansion("cannot shift an empty expansion")
        return ExplicitSource(source.prefix(depth)[1:])
    if isinstance(source, PeriodicSource):
        pre, per = list(source._pre), list(source._per)
        if pre:
            return PeriodicSource(pre[1:], per)
        return PeriodicSource([], per[1:] + per[:1])
    depth = source.max_depth
    if depth is not None and depth == 0:
        raise EmptyExpansion("cannot shift an empty expansion")
    return _ShiftedSource(source, 1)


def quotient_sums(source: PartialQuotientSource, n: int) -> list[QuotientStats]:
    """Exact running sums a_1 + ... + a_k for k = 1..n."""
    if n < 0:
        raise DomainError(f"n = {n} must be >= 0")
    out = []
    total = 0
    for k in range(1, n + 1):
        total += source.quotient(k)
        out.append(QuotientStats(k, total))
    return out


def expand_real(value: Fraction, max_terms: int | None = None) -> ExplicitSource:
    """Finite continued-fraction expansion of an exact rational in (0,1).

    Uses the Euclidean algorithm; by normalization the expansion never
    ends in 1 (the floor algorithm already guarantees this, and the rule
    is re-applied after truncation at ``max_terms``).
    """
    value = Fraction(value)
    if not 0 < value < 1:
        raise DomainError(f"value {value} must lie strictly in (0,1)")
    digits: list[int] = []
    num, den = value.numerator, value.denominator
    while num > 0 and (max_terms is None or len(digits) < max_terms):
        a, rem = divmod(den, num)
        digits.append(a)
        num, den = rem, num
    if len(digits) > 1 and digits[-1] == 1:
        digits.pop()
        digits[-1] += 1
    return ExplicitSource(digits)
