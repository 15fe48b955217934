from fractions import Fraction

import gmpy2
import pytest

from cylinder_lab.balanced import (
    balanced_times,
    grid_midpoints,
    level_occupancy,
    reciprocal_sum,
    return_frequency_fraction,
    write_balanced_csv,
    write_occupancy_csv,
    write_sums_csv,
)
from cylinder_lab.dynamics import ALPHA_POINT
from cylinder_lab.errors import BudgetExceeded, DomainError

from conftest import rational_alpha


def test_golden_balanced_set(golden):
    bset = balanced_times(golden, Fraction(0), 4)
    assert list(map(int, bset.times)) == [2, 4]
    assert bset.count == 2


def test_reciprocal_sum_examples(golden):
    bset = balanced_times(golden, Fraction(0), 4)
    enc = reciprocal_sum(bset)
    assert enc.lower <= Fraction(3, 4) <= enc.upper
    assert float(enc.width()) < 1e-30
    # delta = 3/4 against a doubled-precision oracle.
    enc34 = reciprocal_sum(bset, Fraction(3, 4))
    with gmpy2.context(precision=256):
        oracle = gmpy2.mpfr(2) ** gmpy2.mpfr("-0.75") + gmpy2.mpfr(4) ** gmpy2.mpfr("-0.75")
        assert enc34.lower <= oracle <= enc34.upper
        assert abs(float(oracle) - 0.948) < 1e-3


def test_reciprocal_sum_requires_times_and_valid_delta(golden):
    summary = balanced_times(golden, Fraction(0), 4, store=False)
    assert summary.times is None and summary.count == 2
    with pytest.raises(DomainError):
        reciprocal_sum(summary)
    bset = balanced_times(golden, Fraction(0), 4)
    with pytest.raises(DomainError):
        reciprocal_sum(bset, Fraction(1, 2))  # delta must exceed 1/2


def test_occupancy_example(golden):
    occ = level_occupancy(golden, Fraction(0), 2)
    assert occ.counts == {0: 1, 1: 1}
    assert occ.total() == 2
    occ4 = level_occupancy(golden, Fraction(0), 4)
    assert occ4.counts == {0: 2, 1: 2}
    assert occ4.support() == (0, 1)


def test_occupancy_counts_match_trace(silver):
    from cylinder_lab.dynamics import iterate_levels

    horizon = 1000
    occ = level_occupancy(silver, Fraction(1, 3), horizon)
    trace = iterate_levels(silver, Fraction(1, 3), horizon, store=True)
    expected: dict[int, int] = {}
    for lev in map(int, trace.levels):
        expected[lev] = expected.get(lev, 0) + 1
    assert occ.counts == expected


def test_budget_guard(golden):
    with pytest.raises(BudgetExceeded):
        balanced_times(golden, Fraction(0), 10**8)


def test_grid_midpoints():
    mids = grid_midpoints(4)
    assert mids == [Fraction(1, 8), Fraction(3, 8), Fraction(5, 8), Fraction(7, 8)]
    with pytest.raises(DomainError):
        grid_midpoints(0)


def test_return_frequency_fraction(golden):
    frac = return_frequency_fraction(golden, 8, 64)
    assert Fraction(0) <= frac <= Fraction(1)
    # Pilot fixture: at depth 8 (q_8 = 34) most of the grid returns often.
    assert frac >= Fraction(1, 2)
    with pytest.raises(DomainError):
        return_frequency_fraction(golden, 8, 32)


def test_csv_writers(tmp_path, golden):
    bset = balanced_times(golden, Fraction(0), 20)
    path = tmp_path / "balanced.csv"
    write_balanced_csv(path, bset)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "n" and lines[1] == "2"
    occ = level_occupancy(golden, Fraction(0), 20)
    opath = tmp_path / "occupancy.csv"
    write_occupancy_csv(opath, occ)
    assert opath.read_text().startswith("level,count\n")
    spath = tmp_path / "sums.csv"
    write_sums_csv(spath, [(20, reciprocal_sum(bset), Fraction(1))])
    assert spath.read_text().startswith("N,lower,upper,delta\n")


def test_alpha_point_balanced(silver):
    # The constructed-orbit convention: k-th sign taken at k*alpha.
    bset = balanced_times(silver, ALPHA_POINT, 12)
    assert all(1 <= t <= 12 for t in map(int, bset.times))
