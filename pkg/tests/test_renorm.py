import itertools
import json
from fractions import Fraction

import pytest

from cylinder_lab.cf import ConstructedSource
from cylinder_lab.certified import CertifiedReal
from cylinder_lab.dynamics import ALPHA_POINT, scan_orbit
from cylinder_lab.errors import BudgetExceeded, DomainError, InvalidSchedule
from cylinder_lab.renorm import (
    CSequence,
    PeakSchedule,
    _delta_condition_holds,
    _log_condition_holds,
    _max_count_bound,
    convergence_bound,
    generate_schedule,
    max_count,
    max_hits,
    peak_histogram,
    zero_hit_window_bound,
)


def brute_histogram(a, b, bound, depth):
    """Independent oracle: exact level histogram of the first q_{2n} steps
    of the constructed orbit, via the certified kernel (schedules extended
    by an arbitrary tail, which cannot affect the finite block)."""
    sched = PeakSchedule(a=list(a), b=list(b), bound=bound)
    q = sched.q(2 * depth)
    hist = {0: 1}
    if q > 1:
        src = ConstructedSource(
            lambda i: a[i - 1] if i <= len(a) else 1,
            lambda i: b[i - 1] if i <= len(b) else 1,
            bound,
        )
        res = scan_orbit(
            CertifiedReal(src), ALPHA_POINT, q - 1, want_levels=True
        )
        for lev in map(int, res["levels"]):
            hist[lev] = hist.get(lev, 0) + 1
    return hist


def test_base_histogram():
    sched = PeakSchedule(a=[2], b=[2], bound=2)
    h0 = peak_histogram(sched, 0)
    assert h0.counts == [1] and h0.block_length == 1


def test_example_histograms():
    # Schedule a=(2,3,2), b=(2,1,2), M=3: depth-1 and depth-2 histograms.
    sched = PeakSchedule(a=[2, 3, 2], b=[2, 1, 2], bound=3)
    assert peak_histogram(sched, 1).counts == [3, 4, 2]
    h2 = peak_histogram(sched, 2)
    assert h2.counts == [6, 14, 18, 16, 10, 3]
    assert h2.block_length == sched.q(4) == 67
    assert h2.total() == 67


def test_histogram_matches_oracle_sampled():
    for a in itertools.product((1, 2, 3), repeat=2):
        for b in ((1, 1), (2, 1), (3, 2)):
            sched = PeakSchedule(a=list(a), b=list(b), bound=3)
            for depth in (1, 2):
                got = {t: c for t, c in enumerate(peak_histogram(sched, depth).counts)}
                assert got == brute_histogram(a, b, 3, depth), (a, b, depth)


def test_support_law_and_mass():
    sched = PeakSchedule(a=[3, 1, 4, 2], b=[1, 2, 1, 2], bound=2)
    total = 0
    for depth in range(5):
        h = peak_histogram(sched, depth)
        total += sched._a[depth - 1] if depth else 0
        assert h.support_size() == sched.a_sum(depth) + 1
        assert min(h.counts) >= 1
        assert h.total() == sched.q(2 * depth)


def test_max_count_bound_dominates_exact():
    for a in itertools.product((1, 2, 3), repeat=3):
        sched = PeakSchedule(a=list(a), b=[2, 1, 2], bound=2)
        for depth in range(4):
            exact, is_exact = max_count(sched, depth)
            assert is_exact
            assert _max_count_bound(sched, depth) >= exact


def test_max_hits_and_window_bound():
    sched = PeakSchedule(a=[2, 3, 2], b=[2, 1, 2], bound=3)
    value, ratio = max_hits(sched, 2)
    assert value == 18
    assert ratio == Fraction(18 * 5, 67)
    assert zero_hit_window_bound(sched, 2) == 36


def test_window_bound_holds_for_shifted_orbits():
    # Any q_{2n}-length window of any orbit hits level zero at most
    # 2 * max_count times: check across rational base points.
    sched = PeakSchedule(a=[2, 2], b=[2, 2], bound=2)
    depth = 1
    q = sched.q(2 * depth)
    bound = zero_hit_window_bound(sched, depth)
    src = ConstructedSource(
        lambda i: 2 if i <= 2 else 1, lambda i: 2 if i <= 2 else 1, 2
    )
    alpha = CertifiedReal(src)
    horizon = sched.q(4)
    for x in (Fraction(0), Fraction(1, 7), Fraction(3, 5), Fraction(17, 32)):
        res = scan_orbit(alpha, x, horizon, want_levels=True)
        levels = [0] + list(map(int, res["levels"]))
        for start in range(0, horizon - q):
            window = levels[start + 1 : start + 1 + q]
            assert sum(1 for lev in window if lev == 0) <= bound


def test_bound_recursion_kicks_in_past_support_limit():
    sched = PeakSchedule(a=[10, 20], b=[1, 1], bound=1)
    with pytest.raises(BudgetExceeded):
        peak_histogram(sched, 2, support_limit=5)
    value, is_exact = max_count(sched, 2, support_limit=5)
    assert not is_exact
    exact, _ = max_count(sched, 2)
    assert value >= exact


def test_generate_schedule_log_rule_prefix():
    # Pilot fixture (deterministic): minimal entries for c_n = 2^-n, M=1.
    sched = generate_schedule(CSequence.geometric(Fraction(1, 2)), bound=1, r=2)
    sched.ensure(6)
    assert sched._a[:6] == [5, 9, 20, 48, 109, 242]
    assert sched._b[:6] == [1] * 6
    # The defining inequality holds at every generated depth...
    for n in range(1, 7):
        assert _log_condition_holds(1, sched.a_sum(n), Fraction(1, 2**n))
    # ...and minimality: one less would violate it.
    for n in range(1, 7):
        assert not _log_condition_holds(1, sched.a_sum(n) - 1, Fraction(1, 2**n))


def test_generate_schedule_delta_rule():
    sched = generate_schedule(
        CSequence.geometric(Fraction(1, 2)), bound=1, delta=Fraction(3, 4)
    )
    sched.ensure(3)
    assert sched._a[:3] == [6, 73, 3851]  # pilot fixture (deterministic)
    for n in range(1, 4):
        assert _delta_condition_holds(
            sched.q(2 * n), sched.a_sum(n), Fraction(3, 4), Fraction(1, 2**n)
        )


def test_generate_schedule_determinism():
    c = CSequence.geometric(Fraction(1, 2))
    s1 = generate_schedule(c, bound=2, r=2)
    s2 = generate_schedule(c, bound=2, r=2)
    s1.ensure(5)
    s2.ensure(5)
    assert s1._a == s2._a and s1._b == s2._b


def test_schedule_json_round_trip(tmp_path):
    sched = generate_schedule(CSequence.geometric(Fraction(1, 3)), bound=2, r=3)
    sched.ensure(4)
    path = tmp_path / "schedule.json"
    sched.write_json(path)
    clone = PeakSchedule.from_json(json.loads(path.read_text()))
    assert clone._a == sched._a and clone._b == sched._b
    assert clone.bound == sched.bound and clone.rule == sched.rule
    clone.ensure(6)  # the rule survives serialization
    sched.ensure(6)
    assert clone._a == sched._a


def test_schedule_validation():
    with pytest.raises(InvalidSchedule):
        PeakSchedule(a=[1], b=[3], bound=2)
    with pytest.raises(InvalidSchedule):
        PeakSchedule(a=[0], b=[1], bound=1)
    with pytest.raises(BudgetExceeded):
        PeakSchedule(a=[1], b=[1], bound=1).pair(2)
    with pytest.raises(DomainError):
        CSequence.geometric(Fraction(3, 2))


def test_convergence_bound_modes_agree_on_verdict():
    sched = generate_schedule(CSequence.geometric(Fraction(1, 2)), bound=1, r=2)
    default = convergence_bound(sched, 8, Fraction(1))
    refined = convergence_bound(sched, 8, Fraction(1), refined=True)
    # Both totals are finite and small; blocks decay in both modes.
    for result in (default, refined):
        assert float(result.total.upper) < 50
        assert float(result.blocks[-1].upper) < float(result.blocks[1].upper)


def test_convergence_bound_delta_validation():
    sched = PeakSchedule(a=[2], b=[1], bound=1)
    with pytest.raises(DomainError):
        convergence_bound(sched, 0, Fraction(1, 2))


def test_histogram_csv(tmp_path):
    sched = PeakSchedule(a=[2, 3, 2], b=[2, 1, 2], bound=3)
    path = tmp_path / "peaks.csv"
    peak_histogram(sched, 2).write_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "level,count"
    assert lines[1] == "0,6" and lines[-1] == "5,3"
