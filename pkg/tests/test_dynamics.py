import struct
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylinder_lab.certified import CertifiedReal
from cylinder_lab.cf import PeriodicSource, expand_real
from cylinder_lab.dynamics import (
    ALPHA_POINT,
    check_one_per_interval,
    iterate_levels,
    level_at_qn,
    max_abs_level,
    scan_orbit,
)
from cylinder_lab.errors import BudgetExceeded, DomainError

from conftest import oracle_levels_golden, oracle_levels_rational, rational_alpha


def test_golden_initial_levels(golden):
    # From x = 0 the first two signs are +1 (at 0) and -1 (at alpha ~ .618).
    trace = iterate_levels(golden, Fraction(0), 2, store=True)
    assert [trace.level(1), trace.level(2)] == [1, 0]
    # From the point alpha itself the first sign is already -1.
    shifted = iterate_levels(golden, ALPHA_POINT, 2, store=True)
    assert [shifted.level(1), shifted.level(2)] == [-1, 0]


def test_golden_levels_match_quadratic_oracle(golden):
    trace = iterate_levels(golden, ALPHA_POINT, 500, store=True)
    assert list(map(int, trace.levels)) == oracle_levels_golden(500)


def test_golden_levels_from_zero_match_oracle(golden):
    trace = iterate_levels(golden, Fraction(0), 500, store=True)
    assert list(map(int, trace.levels)) == oracle_levels_golden(500, from_alpha=False)


@settings(max_examples=30, deadline=None)
@given(
    num=st.integers(1, 400),
    den=st.integers(5, 401),
    xn=st.integers(0, 99),
    n=st.integers(1, 300),
)
def test_rational_orbit_matches_fraction_oracle(num, den, xn, n):
    num %= den
    if num == 0:
        num = 1
    alpha = rational_alpha(num, den)
    x = Fraction(xn, 100)
    trace = iterate_levels(alpha, x, n, store=True)
    assert list(map(int, trace.levels)) == oracle_levels_rational(
        Fraction(num, den), x, n
    )


@settings(max_examples=25, deadline=None)
@given(
    num=st.integers(1, 999),
    den=st.integers(7, 1000),
    n=st.integers(2, 2000),
    data=st.data(),
)
def test_telescoping_identity(num, den, n, data):
    num %= den
    if num == 0:
        num = 1
    alpha = rational_alpha(num, den)
    x = Fraction(3, 64)
    j = data.draw(st.integers(1, n - 1))
    full = scan_orbit(alpha, x, n, checkpoints=sorted({j, n}))
    shifted = (x + j * alpha.exact_value) % 1
    tail = scan_orbit(alpha, shifted, n - j)
    assert int(full["checkpoint_levels"][-1]) == int(full["checkpoint_levels"][0]) + int(
        tail["final_level"]
    )


def test_level_at_qn_bounded(golden, silver):
    for alpha in (golden, silver):
        for n in range(1, 15):
            assert abs(level_at_qn(alpha, Fraction(1, 3), n)) <= 3


def test_max_abs_level_bounded(silver):
    total = 0
    for n in range(1, 10):
        total += silver.source.quotient(n)
        assert max_abs_level(silver, Fraction(2, 7), n) <= 3 * total


def test_budget_errors(golden):
    with pytest.raises(BudgetExceeded):
        level_at_qn(golden, Fraction(0), 40, budget=100)
    with pytest.raises(DomainError):
        iterate_levels(golden, Fraction(3, 2), 5)


def test_one_per_interval_examples(golden, silver):
    for alpha in (golden, silver):
        for n in range(1, 12):
            assert check_one_per_interval(alpha, Fraction(1, 7), n)
    # Exact rational alpha = p/q at depth matching its own denominator:
    alpha = rational_alpha(5, 12)
    assert check_one_per_interval(alpha, Fraction(0), alpha.source.max_depth)


def test_trace_exports(tmp_path, golden):
    trace = iterate_levels(golden, ALPHA_POINT, 50, store=True)
    csv_path = tmp_path / "t.csv"
    trace.write_csv(csv_path)
    lines = csv_path.read_text().strip().split("\n")
    assert lines[0] == "k,level"
    assert len(lines) == 51
    rle_path = tmp_path / "t.rle"
    trace.write_rle(rle_path)
    blob = rle_path.read_bytes()
    assert blob.startswith(b"CYLRLE1\n")
    (count,) = struct.unpack_from("<q", blob, 8)
    runs = [
        struct.unpack_from("<qq", blob, 16 + 16 * i) for i in range(count)
    ]
    # Runs reconstruct the levels exactly.
    rebuilt = []
    lev = 0
    for sign, length in runs:
        for _ in range(length):
            lev += sign
            rebuilt.append(lev)
    assert rebuilt == list(map(int, trace.levels))


def test_depth_retry_reports_depth(golden):
    res = scan_orbit(golden, Fraction(1, 3), 10_000)
    assert res["depth_used"] is not None and res["depth_used"] >= 1
