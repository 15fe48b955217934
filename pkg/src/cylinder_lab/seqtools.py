"""Density and summation machinery for sparse integer sets.

The central dichotomy: if n*b_n stays bounded away from zero, every set of
positive upper density S has a divergent sum of b_n over S; if n*b_n tends
to zero, a positive-upper-density S with convergent sum can be built from
sparse blocks.  Everything is finite-horizon and exact: limsup/liminf are
replaced by explicit proxies over dyadic checkpoints, and integer sets are
held as sorted disjoint blocks, never materialized element by element.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from fractions import Fraction

from .enclosure import Enclosure, sum_reciprocal_powers
from .errors import BudgetExceeded, DomainError
from .fileio import atomic_write_text

__all__ = [
    "BaseRule",
    "SparseSetSpec",
    "get_rule",
    "register_rule",
    "upper_density",
    "subset_sum",
    "build_counterexample",
    "liminf_proxy",
    "dyadic_checkpoints",
    "count_up_to",
    "divergence_floor",
]

EXACT_SUM_LIMIT = 2_000_000


@dataclass(frozen=True)
class BaseRule:
    """A named, exactly evaluable, strictly decreasing positive sequence."""

    name: str
    value: object  # n -> Fraction

    def times_n(self, n: int) -> Fraction:
        return n * self.value(n)


def _reciprocal(n: int) -> Fraction:
    return Fraction(1, n)


def _reciprocal_log_squared(n: int) -> Fraction:
    # Rational stand-in for 1/(n log2(n+1)^2): the log is rounded up to the
    # next integer, keeping the rule exactly evaluable, strictly decreasing
    # and with n*b_n -> 0.
    bits = (n + 1 - 1).bit_length()  # ceil(log2(n+1)) for n >= 1
    return Fraction(1, n * bits * bits)


_REGISTRY: dict[str, BaseRule] = {}


def register_rule(rule: BaseRule) -> BaseRule:
    _REGISTRY[rule.name] = rule
    return rule


register_rule(BaseRule("reciprocal", _reciprocal))
register_rule(BaseRule("reciprocal-log-squared", _reciprocal_log_squared))


def quotient_sum_rule(source) -> BaseRule:
    """b_n = 1 / (a_1 + ... + a_n) for the partial quotients of a source."""
    sums = [0]

    def value(n: int) -> Fraction:
        while len(sums) <= n:
            sums.append(sums[-1] + source.quotient(len(sums)))
        return Fraction(1, sums[n])

    return BaseRule("one-over-quotient-sum", value)


def get_rule(name: str, source=None) -> BaseRule:
    if name == "one-over-quotient-sum":
        if source is None:
            raise DomainError("one-over-quotient-sum needs a quotient source")
        return quotient_sum_rule(source)
    try:
        return _REGISTRY[name]
    except KeyError:
        raise DomainError(f"unknown base rule {name!r}") from None


# -- block sets -------------------------------------------------------------


def _validate_blocks(blocks) -> list[tuple[int, int]]:
    out = []
    prev_end = 0
    for start, length in blocks:
        start, length = int(start), int(length)
        if start < 1 or length < 1:
            raise DomainError("blocks must have start >= 1 and length >= 1")
        if start <= prev_end:
            raise DomainError("blocks must be sorted and disjoint")
        prev_end = start + length - 1
        out.append((start, length))
    return out


def count_up_to(blocks, n: int) -> int:
    """#(S intersect [1, n]) for S given as sorted disjoint blocks."""
    blocks = _validate_blocks(blocks)
    starts = [s for s, _ in blocks]
    i = bisect.bisect_right(starts, n)
    total = 0
    for start, length in blocks[:i]:
        total += min(length, n - start + 1)
    return total


def upper_density(blocks, horizon: int) -> Fraction:
    """Finite-horizon proxy of the upper density: max_{n <= N} #(S cap [1,n])/n.

    Within a block the ratio is nondecreasing, and it decays in the gaps,
    so the maximum is attained at a (clipped) block endpoint.
    """
    blocks = _validate_blocks(blocks)
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    best = Fraction(0)
    seen = 0
    for start, length in blocks:
        if start > horizon:
            break
        end = min(start + length - 1, horizon)
        seen += end - start + 1
        best = max(best, Fraction(seen, end))
    return best


def subset_sum(rule: BaseRule, blocks, horizon: int, delta: Fraction = Fraction(1)) -> Enclosure:
    """Enclosure of sum of b_n^delta over S intersect [1, horizon].

    With delta = 1 and few enough elements the sum is an exact rational
    (returned as a degenerate-width enclosure up to final rounding); huge
    blocks are bracketed by length * endpoint values, valid because the
    rules are decreasing.
    """
    delta = Fraction(delta)
    blocks = _validate_blocks(blocks)
    clipped = []
    n_elements = 0
    for start, length in blocks:
        if start > horizon:
            break
        end = min(start + length - 1, horizon)
        clipped.append((start, end))
        n_elements += end - start + 1
    if n_elements <= EXACT_SUM_LIMIT:
        if delta == 1:
            total = Fraction(0)
            for start, end in clipped:
                for n in range(start, end + 1):
                    total += rule.value(n)
            return Enclosure.of_fraction(total)
        values = []
        for start, end in clipped:
            for n in range(start, end + 1):
                v = rule.value(n)
                # b_n^delta = (p/q)^delta; bracket via reciprocal powers of
                # the integer pair would lose exactness, so require the
                # common case b_n = 1/m.
                if v.numerator != 1:
                    raise DomainError("delta != 1 needs unit-numerator rule values")
                values.append(v.denominator)
        return sum_reciprocal_powers(values, delta)
    if delta != 1:
        raise BudgetExceeded("delta != 1 sums are only supported term by term")
    lower = Fraction(0)
    upper = Fraction(0)
    for start, end in clipped:
        count = end - start + 1
        upper += count * rule.value(start)
        lower += count * rule.value(end)
    return Enclosure(
        Enclosure.of_fraction(lower).lower, Enclosure.of_fraction(upper).upper
    )


# -- the convergence-direction construction ---------------------------------


@dataclass
class SparseSetSpec:
    """A positive-upper-density set with convergent subset sum.

    Blocks {n_k, ..., n_k + floor(eps*n_k)} at markers chosen so that
    n_k * b_{n_k} < 2^-k and n_{k+1} > 2^k * n_k.
    """

    rule_name: str
    epsilon: Fraction
    markers: list[int]
    blocks: list[tuple[int, int]]
    sum_upper: Fraction

    def horizon(self) -> int:
        start, length = self.blocks[-1]
        return start + length - 1

    def to_json(self) -> dict:
        return {
            "rule": self.rule_name,
            "epsilon": [str(self.epsilon.numerator), str(self.epsilon.denominator)],
            "markers": [str(m) for m in self.markers],
            "blocks": [[str(s), str(ln)] for s, ln in self.blocks],
            "sum_upper": [str(self.sum_upper.numerator), str(self.sum_upper.denominator)],
        }

    def write_json(self, path) -> None:
        atomic_write_text(path, json.dumps(self.to_json(), indent=2) + "\n")

    @staticmethod
    def from_json(obj: dict) -> "SparseSetSpec":
        return SparseSetSpec(
            rule_name=obj["rule"],
            epsilon=Fraction(int(obj["epsilon"][0]), int(obj["epsilon"][1])),
            markers=[int(m) for m in obj["markers"]],
            blocks=[(int(s), int(ln)) for s, ln in obj["blocks"]],
            sum_upper=Fraction(int(obj["sum_upper"][0]), int(obj["sum_upper"][1])),
        )


def build_counterexample(
    rule: BaseRule,
    epsilon: Fraction,
    k_count: int = 6,
    search_budget: int = 50_000_000,
) -> SparseSetSpec:
    """Positive-upper-density set whose b_n-sum stays below epsilon.

    Markers are canonical and minimal: n_k is the least integer above
    2^{k-1} * n_{k-1} with n_k * b_{n_k} < 2^-k.  The guarantee
    sum < epsilon over the full realization is certified exactly: each
    block contributes at most (floor(eps*n_k)+1) * b_{n_k}, and the
    marker condition makes those terms geometrically small.
    """
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 1:
        raise DomainError("epsilon must lie in (0,1)")
    if k_count < 1:
        raise DomainError("at least one block is required")
    markers: list[int] = []
    blocks: list[tuple[int, int]] = []
    sum_upper = Fraction(0)
    prev = 0
    for k in range(1, k_count + 1):
        threshold = Fraction(1, 2**k)
        n = (2 ** (k - 1)) * prev + 1 if prev else 1
        while rule.times_n(n) >= threshold:
            n += 1
            if n > search_budget:
                raise BudgetExceeded(
                    f"rule {rule.name!r} not admissible: n*b_n never fell "
                    f"below 2^-{k} within {search_budget}"
                )
        markers.append(n)
        length = int(epsilon * n) + 1  # n_k .. n_k + floor(eps n_k)
        blocks.append((n, length))
        sum_upper += length * rule.value(n)
        prev = n
    if not sum_upper < epsilon:
        raise DomainError(
            f"certified block-sum bound {sum_upper} is not below epsilon {epsilon}"
        )
    return SparseSetSpec(
        rule_name=rule.name,
        epsilon=epsilon,
        markers=markers,
        blocks=blocks,
        sum_upper=sum_upper,
    )


# -- the divergence direction -----------------------------------------------


def liminf_proxy(rule: BaseRule, horizon: int) -> Fraction:
    """Finite-horizon proxy min_{n <= N} n * b_n of liminf n*b_n."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    return min(rule.times_n(n) for n in range(1, horizon + 1))


def dyadic_checkpoints(horizon: int) -> list[int]:
    """2, 4, 8, ..., the powers of two up to the horizon."""
    out = []
    n = 2
    while n <= horizon:
        out.append(n)
        n *= 2
    return out


def divergence_floor(rule: BaseRule, blocks, horizon: int, epsilon: Fraction) -> Fraction | None:
    """Exact lower-bound witness for the divergence direction.

    If the density proxy is >= epsilon at every dyadic checkpoint up to the
    horizon, the subset sum up to the horizon exceeds
    (epsilon/2) * (#checkpoints) * (min checkpoint value of n*b_n) / 2;
    returns that floor, or None when the density hypothesis fails.
    """
    epsilon = Fraction(epsilon)
    checkpoints = dyadic_checkpoints(horizon)
    if not checkpoints:
        return None
    for n in checkpoints:
        if Fraction(count_up_to(blocks, n), n) < epsilon:
            return None
    floor_rate = min(rule.times_n(n) for n in checkpoints)
    return Fraction(epsilon, 2) * len(checkpoints) * floor_rate / 2
