"""Seeded Monte-Carlo experiments over sampled rotation numbers.

Trials are deterministic functions of (manifest seed, trial index): child
seeds come from a documented splittable scheme (sha256 of "seed/index"),
trials run independently under an optional thread cap, and aggregation
always happens in trial order, so outputs are byte-identical regardless
of parallelism.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import statistics
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .balanced import balanced_times
from .cf import SampledSource
from .certified import CertifiedReal
from .dynamics import ALPHA_POINT, scan_orbit
from .enclosure import Enclosure, sum_reciprocal_powers, _down, _up
from .errors import DomainError, UndecidableAtPrecision
from .fileio import atomic_write_text
from .renorm import PeakSchedule, convergence_bound

__all__ = [
    "ExperimentManifest",
    "MeasureStats",
    "child_seed",
    "thread_count",
    "run_divergence_experiment",
    "run_convergence_experiment",
    "run_quotient_statistics",
]

#: Bits in the exact dyadic base points sampled for (alpha, x) trials.
X_BITS = 32


def child_seed(seed: int, index: int) -> int:
    """Splittable per-trial seed: sha256("{seed}/{index}") as an integer."""
    digest = hashlib.sha256(f"{seed}/{index}".encode()).digest()
    return int.from_bytes(digest[:16], "big")


def thread_count() -> int:
    raw = os.environ.get("CYLINDER_LAB_THREADS", "")
    if raw:
        return max(1, int(raw))
    return min(8, os.cpu_count() or 1)


def _map_trials(fn, indices):
    workers = thread_count()
    if workers == 1:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, indices))


@dataclass(frozen=True)
class ExperimentManifest:
    """Complete description of a reproducible experiment run."""

    name: str
    seed: int
    trials: int
    horizon_low: int = 10_000
    horizon_high: int = 1_000_000
    grid_size: int = 512
    depth: int = 6
    delta: Fraction = Fraction(1)
    precision_bits: int = 512
    schedule: dict | None = None

    def to_json(self) -> dict:
        obj = {
            "name": self.name,
            "seed": self.seed,
            "trials": self.trials,
            "horizon_low": self.horizon_low,
            "horizon_high": self.horizon_high,
            "grid_size": self.grid_size,
            "depth": self.depth,
            "delta": [str(self.delta.numerator), str(self.delta.denominator)],
            "precision_bits": self.precision_bits,
        }
        if self.schedule is not None:
            obj["schedule"] = self.schedule
        return obj

    @staticmethod
    def from_json(obj: dict) -> "ExperimentManifest":
        delta = obj.get("delta", ["1", "1"])
        return ExperimentManifest(
            name=obj["name"],
            seed=int(obj["seed"]),
            trials=int(obj["trials"]),
            horizon_low=int(obj.get("horizon_low", 10_000)),
            horizon_high=int(obj.get("horizon_high", 1_000_000)),
            grid_size=int(obj.get("grid_size", 512)),
            depth=int(obj.get("depth", 6)),
            delta=Fraction(int(delta[0]), int(delta[1])),
            precision_bits=int(obj.get("precision_bits", 512)),
            schedule=obj.get("schedule"),
        )


def _sample_pair(seed: int, precision_bits: int) -> tuple[CertifiedReal, Fraction]:
    """Deterministic (alpha, x): alpha from a sampled expansion, x dyadic."""
    alpha = CertifiedReal(SampledSource(seed, precision_bits))
    rng = random.Random(seed ^ 0xA5A5A5A5)
    x = Fraction(rng.getrandbits(X_BITS), 1 << X_BITS)
    return alpha, x


# -- divergence -------------------------------------------------------------


@dataclass
class DivergenceTrial:
    index: int
    seed: int
    count_low: int
    count_high: int
    sum_low: Enclosure
    sum_high: Enclosure
    excluded: bool = False


@dataclass
class DivergenceResult:
    manifest: ExperimentManifest
    trials: list[DivergenceTrial]
    excluded: int
    growth_fraction: Fraction | None
    median_ratio: float | None

    def write_csv(self, path) -> None:
        lines = ["trial,seed,count_low,count_high,sum_low_lo,sum_low_hi,sum_high_lo,sum_high_hi,excluded"]
        for t in self.trials:
            lines.append(
                f"{t.index},{t.seed},{t.count_low},{t.count_high},"
                f"{t.sum_low.lower},{t.sum_low.upper},"
                f"{t.sum_high.lower},{t.sum_high.upper},{int(t.excluded)}"
            )
        atomic_write_text(path, "\n".join(lines) + "\n")

    def summary(self) -> dict:
        return {
            "experiment": self.manifest.name,
            "trials": self.manifest.trials,
            "excluded": self.excluded,
            "growth_fraction": None
            if self.growth_fraction is None
            else [str(self.growth_fraction.numerator), str(self.growth_fraction.denominator)],
            "median_ratio": self.median_ratio,
        }


def run_divergence_experiment(manifest: ExperimentManifest) -> DivergenceResult:
    """Per-trial reciprocal sums over balanced times at two horizons.

    A trial samples (alpha, x), collects the exact balanced-time set up to
    the high horizon and reports sum enclosures at both horizons; growth
    S(high) > S(low) is decided exactly (strictly more balanced times).
    """
    n1, n2 = manifest.horizon_low, manifest.horizon_high
    if not (n2 > n1 >= 1_000):
        raise DomainError("horizons must satisfy high > low >= 1000")

    def run_one(i: int) -> DivergenceTrial:
        seed = child_seed(manifest.seed, i)
        alpha, x = _sample_pair(seed, manifest.precision_bits)
        try:
            bset = balanced_times(alpha, x, n2, store=True)
        except UndecidableAtPrecision:
            zero = Enclosure.zero()
            return DivergenceTrial(i, seed, 0, 0, zero, zero, excluded=True)
        times = [int(t) for t in bset.times]
        low = [t for t in times if t <= n1]
        return DivergenceTrial(
            i,
            seed,
            len(low),
            len(times),
            sum_reciprocal_powers(low, manifest.delta),
            sum_reciprocal_powers(times, manifest.delta),
        )

    trials = _map_trials(run_one, range(manifest.trials))
    kept = [t for t in trials if not t.excluded]
    excluded = len(trials) - len(kept)
    growth_fraction = None
    median_ratio = None
    if kept:
        grew = sum(1 for t in kept if t.count_high > t.count_low)
        growth_fraction = Fraction(grew, len(kept))
        ratios = [
            float(t.sum_high.midpoint()) / float(t.sum_low.midpoint())
            for t in kept
            if t.count_low > 0
        ]
        if ratios:
            median_ratio = statistics.median(ratios)
    return DivergenceResult(manifest, trials, excluded, growth_fraction, median_ratio)


# -- convergence ------------------------------------------------------------


@dataclass
class ConvergenceResult:
    manifest: ExperimentManifest
    horizon: int
    per_point: list[tuple[str, int, Enclosure]]  # (x label, count, sum enclosure)
    empirical_sup: Enclosure
    analytic_bound: Enclosure

    def write_csv(self, path) -> None:
        lines = ["x,count,sum_lo,sum_hi"]
        for label, count, enc in self.per_point:
            lines.append(f"{label},{count},{enc.lower},{enc.upper}")
        atomic_write_text(path, "\n".join(lines) + "\n")

    def summary(self) -> dict:
        return {
            "experiment": self.manifest.name,
            "horizon": self.horizon,
            "grid_size": self.manifest.grid_size,
            "empirical_sup_upper": str(self.empirical_sup.upper),
            "analytic_bound_upper": str(self.analytic_bound.upper),
            "sup_within_bound": bool(self.empirical_sup.upper <= self.analytic_bound.upper),
        }


def run_convergence_experiment(
    schedule: PeakSchedule,
    manifest: ExperimentManifest,
    include_alpha_point: bool = True,
    horizon_cap: int = 1_000_000,
    bound_depth: int = 20,
) -> ConvergenceResult:
    """Empirical sup of the balanced reciprocal sum over an x grid versus
    the analytic renormalization bound.

    The brute-force horizon is min(q_{2*depth}, horizon_cap); the analytic
    side is convergence_bound at ``bound_depth`` (an upper bound for any
    finite horizon since blocks are nonnegative).
    """
    m = manifest
    horizon = min(schedule.q(2 * m.depth), horizon_cap)
    alpha = CertifiedReal(schedule.source())
    grid = [Fraction(2 * j + 1, 2 * m.grid_size) for j in range(m.grid_size)]
    points: list[object] = ([ALPHA_POINT] if include_alpha_point else []) + grid

    def run_one(i: int):
        x = points[i]
        bset = balanced_times(alpha, x, horizon, store=True)
        enc = sum_reciprocal_powers([int(t) for t in bset.times], m.delta)
        label = "alpha" if x == ALPHA_POINT else str(x)
        return label, bset.count, enc

    per_point = _map_trials(run_one, range(len(points)))
    sup = max((enc for _, _, enc in per_point), key=lambda e: e.upper, default=Enclosure.zero())
    analytic = convergence_bound(schedule, bound_depth, m.delta).total
    return ConvergenceResult(m, horizon, per_point, sup, analytic)


# -- quotient statistics ----------------------------------------------------

#: First-digit interval lengths of the Lebesgue measure.
def _interval_length(k: int) -> Fraction:
    return Fraction(1, k * (k + 1))


@dataclass
class MeasureStats:
    """Digit frequencies against the two-sided invariant-measure sandwich."""

    tabulated: int
    samples: int
    frequencies: dict[int, Fraction]
    sandwich: dict[int, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.sandwich:
            for k in range(1, self.tabulated + 1):
                length = _interval_length(k)
                lo = _down(lambda: gmpy2.mpfr(length.numerator) / (length.denominator * 2 * gmpy2.log(2)))
                hi = _up(lambda: gmpy2.mpfr(length.numerator) / (length.denominator * gmpy2.log(2)))
                self.sandwich[k] = (float(lo), float(hi))
        total = sum(self.frequencies.values())
        if total > 1:
            raise DomainError("digit frequencies exceed 1")
        for lo, hi in self.sandwich.values():
            if not lo <= hi:
                raise DomainError("sandwich bounds out of order")

    def standard_error(self, k: int) -> float:
        p = float(self.frequencies.get(k, 0))
        return (p * (1 - p) / self.samples) ** 0.5 if self.samples else 0.0

    def inside_sandwich(self, k: int, tolerance_se: float = 3.0) -> bool:
        lo, hi = self.sandwich[k]
        p = float(self.frequencies.get(k, 0))
        slack = tolerance_se * self.standard_error(k)
        return lo - slack <= p <= hi + slack


@dataclass
class QuotientStatisticsResult:
    manifest: ExperimentManifest
    stats: MeasureStats
    growth_fractions: list[Fraction]  # per trial: fraction of n with A_n < 12 n log n
    sum_ratios: list[float]  # per trial: S(high)/S(low) for S = sum 1/A_i
    digit_positions_per_trial: int

    def write_csv(self, path) -> None:
        lines = ["trial,growth_fraction,sum_ratio"]
        for i, (gf, sr) in enumerate(zip(self.growth_fractions, self.sum_ratios)):
            lines.append(f"{i},{gf.numerator}/{gf.denominator},{sr!r}")
        atomic_write_text(path, "\n".join(lines) + "\n")

    def summary(self) -> dict:
        freqs = {
            str(k): [str(v.numerator), str(v.denominator)]
            for k, v in sorted(self.stats.frequencies.items())
        }
        return {
            "experiment": self.manifest.name,
            "trials": self.manifest.trials,
            "digit_samples": self.stats.samples,
            "frequencies": freqs,
            "sandwich": {str(k): list(v) for k, v in sorted(self.stats.sandwich.items())},
            "inside_sandwich": {
                str(k): self.stats.inside_sandwich(k) for k in self.stats.sandwich
            },
            "median_growth_fraction": float(statistics.median(self.growth_fractions))
            if self.growth_fractions
            else None,
            "median_sum_ratio": statistics.median(self.sum_ratios) if self.sum_ratios else None,
        }


_LOG_BOUND_CACHE: list = [None, None]  # n -> rounded-down 12 n log n
_LOG_BOUND_LOCK = threading.Lock()


def _below_log_bound(total: int, n: int) -> bool:
    """Certified check of A_n < 12 n log n (natural log; false when n <= 1)."""
    if n <= 1:
        return False
    if len(_LOG_BOUND_CACHE) <= n:
        with _LOG_BOUND_LOCK:
            while len(_LOG_BOUND_CACHE) <= n:
                m = len(_LOG_BOUND_CACHE)
                _LOG_BOUND_CACHE.append(_down(lambda: 12 * m * gmpy2.log(m)))
    # Certified only below the rounded-down bound; borderline cases (which
    # would need exact transcendental comparison) count as failures.
    return total < _LOG_BOUND_CACHE[n]


def run_quotient_statistics(
    manifest: ExperimentManifest,
    tabulated: int = 5,
    digit_positions: int = 100,
) -> QuotientStatisticsResult:
    """Digit statistics of sampled expansions plus quotient-sum growth.

    Per trial: the first ``digit_positions`` trusted quotients feed the
    frequency table; quotients up to the high horizon (precision allowing)
    feed the A_n growth fraction and the 1/A_i partial-sum ratio.
    """
    if manifest.trials < 1_000:
        raise DomainError("digit statistics need at least 1000 trials")
    n_low, n_high = manifest.horizon_low, manifest.horizon_high
    # ~0.195 trusted digits per sampled bit (see SampledSource guard), so
    # size the expansion to cover the high horizon.
    bits = max(manifest.precision_bits, int(n_high * 5.2) + 64)

    def run_one(i: int):
        source = SampledSource(child_seed(manifest.seed, i), bits)
        depth = source.max_depth
        digits = source.prefix(min(digit_positions, depth))
        horizon = min(n_high, depth)
        counts = [0] * (tabulated + 1)
        for a in digits:
            if a <= tabulated:
                counts[a] += 1
        total = 0
        below = 0
        s_low = s_high = 0.0
        for n in range(1, horizon + 1):
            total += source.quotient(n)
            if _below_log_bound(total, n):
                below += 1
            s_high += 1.0 / total
            if n == min(n_low, horizon):
                s_low = s_high
        growth = Fraction(below, horizon) if horizon else Fraction(0)
        ratio = s_high / s_low if s_low else float("inf")
        return counts, len(digits), growth, ratio

    results = _map_trials(run_one, range(manifest.trials))
    agg = [0] * (tabulated + 1)
    samples = 0
    growth_fractions = []
    sum_ratios = []
    for counts, n_digits, growth, ratio in results:
        for k in range(1, tabulated + 1):
            agg[k] += counts[k]
        samples += n_digits
        growth_fractions.append(growth)
        sum_ratios.append(ratio)
    freqs = {k: Fraction(agg[k], samples) for k in range(1, tabulated + 1)}
    stats = MeasureStats(tabulated=tabulated, samples=samples, frequencies=freqs)
    return QuotientStatisticsResult(
        manifest=manifest,
        stats=stats,
        growth_fractions=growth_fractions,
        sum_ratios=sum_ratios,
        digit_positions_per_trial=digit_positions,
    )
