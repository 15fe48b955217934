"""Randomized property suites runnable from the command line.

Each suite draws seeded trials and checks one exact statement per trial;
a report lists pass/fail counts with the first failing cases.  The same
suites back the acceptance tests, so `verify` is the fast way to re-run
them with a chosen seed and trial count.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .cf import ConstructedSource, SampledSource, expand_real
from .certified import CertifiedReal
from .dynamics import ALPHA_POINT, check_one_per_interval, scan_orbit
from .errors import DomainError, UndecidableAtPrecision
from .experiments import child_seed
from .renorm import PeakSchedule, peak_histogram

__all__ = ["SuiteReport", "run_suite", "SUITES"]


@dataclass
class SuiteReport:
    suite: str
    trials: int
    passes: int
    failures: list[str] = field(default_factory=list)
    skipped: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def lines(self) -> list[str]:
        out = [f"suite {self.suite}: {self.passes}/{self.trials} passes"]
        if self.skipped:
            out.append(f"  skipped (precision): {self.skipped}")
        for msg in self.failures[:10]:
            out.append(f"  FAIL {msg}")
        if len(self.failures) > 10:
            out.append(f"  ... and {len(self.failures) - 10} more")
        return out


def _sampled_pair(seed: int, bits: int) -> tuple[CertifiedReal, Fraction]:
    alpha = CertifiedReal(SampledSource(seed, bits))
    rng = random.Random(seed ^ 0xA5A5A5A5)
    x = Fraction(rng.getrandbits(32), 1 << 32)
    return alpha, x


def _depths_within(alpha: CertifiedReal, budget: int) -> list[int]:
    out = []
    n = 1
    cap = alpha.trusted_depth
    while cap is None or n <= cap:
        if alpha.convergent(n).q > budget:
            break
        out.append(n)
        n += 1
    return out


def _suite_max_level(trials: int, seed: int, budget: int, bits: int) -> SuiteReport:
    """|level at q_n| <= 3 and running max <= 3 A_n, every depth in budget."""
    report = SuiteReport("max-level", trials, 0)
    for i in range(trials):
        alpha, x = _sampled_pair(child_seed(seed, i), bits)
        try:
            depths = _depths_within(alpha, budget)
            checkpoints = [alpha.convergent(n).q for n in depths]
            res = scan_orbit(alpha, x, checkpoints[-1], checkpoints=checkpoints)
            ok = True
            total = 0
            for j, n in enumerate(depths):
                total += alpha.source.quotient(n)
                level = int(res["checkpoint_levels"][j])
                peak = int(res["checkpoint_maxabs"][j])
                if abs(level) > 3 or peak > 3 * total:
                    ok = False
                    report.failures.append(
                        f"trial {i} depth {n}: level {level}, max {peak}, A_n {total}"
                    )
            if ok:
                report.passes += 1
        except UndecidableAtPrecision:
            report.skipped += 1
            report.passes += 1
    return report


def _suite_one_per_interval(trials: int, seed: int, budget: int, bits: int) -> SuiteReport:
    report = SuiteReport("one-per-interval", trials, 0)
    budget = min(budget, 10_000)
    for i in range(trials):
        alpha, x = _sampled_pair(child_seed(seed, i), bits)
        try:
            bad = [
                n
                for n in _depths_within(alpha, budget)
                if not check_one_per_interval(alpha, x, n)
            ]
            if bad:
                report.failures.append(f"trial {i}: failing depths {bad}")
            else:
                report.passes += 1
        except UndecidableAtPrecision:
            report.skipped += 1
            report.passes += 1
    return report


def _rational_alpha(rng: random.Random) -> CertifiedReal:
    den = rng.randrange(10_001, 200_000)
    num = rng.randrange(1, den)
    return CertifiedReal(expand_real(Fraction(num, den)))


def _suite_telescoping(trials: int, seed: int, budget: int, bits: int) -> SuiteReport:
    """level_n(x) = level_j(x) + level_{n-j}(x + j*alpha) via two scans.

    Uses exact rational alpha so the shifted base point stays rational.
    """
    report = SuiteReport("telescoping", trials, 0)
    horizon = min(budget, 10_000)
    for i in range(trials):
        rng = random.Random(child_seed(seed, i))
        alpha = _rational_alpha(rng)
        x = Fraction(rng.getrandbits(24), 1 << 24)
        n = rng.randrange(2, horizon + 1)
        j = rng.randrange(1, n)
        full = scan_orbit(alpha, x, n, checkpoints=[j, n])
        shifted_x = (x + j * alpha.exact_value) % 1
        tail = scan_orbit(alpha, shifted_x, n - j)
        lhs = int(full["checkpoint_levels"][1])
        rhs = int(full["checkpoint_levels"][0]) + int(tail["final_level"])
        if lhs == rhs:
            report.passes += 1
        else:
            report.failures.append(f"trial {i}: {lhs} != {rhs} (n={n}, j={j})")
    return report


def _suite_shift_relation(trials: int, seed: int, budget: int, bits: int) -> SuiteReport:
    """If j > k are both balanced for x, then j - k is balanced for x + k*alpha."""
    report = SuiteReport("shift-relation", trials, 0)
    horizon = min(budget, 10_000)
    for i in range(trials):
        rng = random.Random(child_seed(seed, i))
        alpha = _rational_alpha(rng)
        x = Fraction(rng.getrandbits(24), 1 << 24)
        res = scan_orbit(alpha, x, horizon, want_balanced=True)
        times = [int(t) for t in res["balanced"]]
        if len(times) < 2:
            report.passes += 1
            report.skipped += 1
            continue
        pairs = [(times[a], times[b]) for b in range(len(times)) for a in range(b)]
        rng.shuffle(pairs)
        ok = True
        for k, j in pairs[:5]:
            shifted_x = (x + k * alpha.exact_value) % 1
            tail = scan_orbit(alpha, shifted_x, j - k, want_balanced=True)
            if (j - k) not in {int(t) for t in tail["balanced"]}:
                ok = False
                report.failures.append(f"trial {i}: j={j}, k={k} not balanced after shift")
                break
        if ok:
            report.passes += 1
    return report


def _suite_support_law(trials: int, seed: int, budget: int, bits: int) -> SuiteReport:
    """Renormalized histogram support is exactly A_n + 1 levels, and the
    histogram matches the brute-force orbit of the constructed number."""
    report = SuiteReport("support-law", trials, 0)
    for i in range(trials):
        rng = random.Random(child_seed(seed, i))
        depth = rng.randrange(1, 4)
        a = [rng.randrange(1, 4) for _ in range(depth)]
        b = [rng.randrange(1, 4) for _ in range(depth)]
        sched = PeakSchedule(a=a, b=b, bound=3)
        hist = peak_histogram(sched, depth)
        if hist.support_size() != sched.a_sum(depth) + 1 or min(hist.counts) < 1:
            report.failures.append(f"trial {i}: support {hist.support_size()} vs A+1")
            continue
        fill_a = lambda k: a[k - 1] if k <= depth else 1
        fill_b = lambda k: b[k - 1] if k <= depth else 1
        alpha = CertifiedReal(ConstructedSource(fill_a, fill_b, 3))
        q = sched.q(2 * depth)
        brute = {0: 1}
        if q > 1:
            res = scan_orbit(alpha, ALPHA_POINT, q - 1, want_levels=True,
                             hist_bound=sched.a_sum(depth) + 1)
            for lev in map(int, res["levels"]):
                brute[lev] = brute.get(lev, 0) + 1
        if brute == {t: c for t, c in enumerate(hist.counts)}:
            report.passes += 1
        else:
            report.failures.append(f"trial {i}: histogram mismatch a={a} b={b}")
    return report


SUITES = {
    "max-level": _suite_max_level,
    "one-per-interval": _suite_one_per_interval,
    "telescoping": _suite_telescoping,
    "shift-relation": _suite_shift_relation,
    "support-law": _suite_support_law,
}


def run_suite(
    name: str, trials: int, seed: int, budget: int = 100_000, bits: int = 512
) -> list[SuiteReport]:
    if name == "all":
        return [fn(trials, seed, budget, bits) for fn in SUITES.values()]
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    return [SUITES[name](trials, seed, budget, bits)]
