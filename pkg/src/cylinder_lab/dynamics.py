"""Certified iteration of the rotation and its integer-cylinder extension.

Orbit levels are computed by the fast integer kernel against a convergent
approximation p/q of alpha, with a margin certificate: every sign taken
within ``margin`` scaled units of a boundary is re-checked through the
exact comparison machinery, and the whole scan is redone at a deeper
convergent if any assumed sign fails certification.  Positions are never
materialized as floating point anywhere on this path.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _backend
from .certified import ONE_HALF, CertifiedReal, Ordering
from .errors import (
    AmbiguityOverflow,
    BudgetExceeded,
    DomainError,
    UndecidableAtPrecision,
)

__all__ = [
    "ALPHA_POINT",
    "LevelTrace",
    "OrbitPoint",
    "scan_orbit",
    "iterate_levels",
    "level_at_qn",
    "max_abs_level",
    "check_one_per_interval",
]

#: Sentinel base point meaning "start the orbit at alpha itself", i.e. the
#: k-th sign is taken at position k*alpha instead of x + (k-1)*alpha.
ALPHA_POINT = "alpha"

_SAFETY_BITS = 20
_RLE_MAGIC = b"CYLRLE1\n"


@dataclass(frozen=True)
class OrbitPoint:
    """A single cylinder point: base position, step count and level."""

    x: Fraction
    k: int
    level: int


@dataclass
class LevelTrace:
    """Levels of one orbit; the full sequence is kept only when requested."""

    x: object
    n_steps: int
    final_level: int
    max_abs: int
    levels: np.ndarray | None = None

    def level(self, k: int) -> int:
        if self.levels is None:
            raise DomainError("trace was computed in summary mode")
        return int(self.levels[k - 1])

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("k,level\n")
            if self.levels is not None:
                for k, lev in enumerate(self.levels, start=1):
                    fh.write(f"{k},{lev}\n")

    def write_rle(self, path) -> None:
        """Binary run-length summary: monotone (+-1) segments as int64 pairs."""
        if self.levels is None:
            raise DomainError("trace was computed in summary mode")
        runs: list[tuple[int, int]] = []
        prev = 0
        for lev in self.levels:
            sign = 1 if lev > prev else -1
            if runs and runs[-1][0] == sign:
                runs[-1] = (sign, runs[-1][1] + 1)
            else:
                runs.append((sign, 1))
            prev = lev
        with open(path, "wb") as fh:
            fh.write(_RLE_MAGIC)
            fh.write(struct.pack("<q", len(runs)))
            for sign, length in runs:
                fh.write(struct.pack("<qq", sign, length))


def _base_point(x) -> tuple[int, int, int, Fraction]:
    """Decompose the base point into (numerator, denominator, first eval index)."""
    if x == ALPHA_POINT:
        return 0, 1, 1, Fraction(0)
    x = Fraction(x)
    if not 0 <= x < 1:
        raise DomainError(f"x = {x} must lie in [0,1)")
    return x.numerator, x.denominator, 0, x


def _pick_depth(alpha: CertifiedReal, target: int) -> int:
    """Smallest depth n >= 1 with q_{n+1} >= target (capped by trust)."""
    cap = alpha.trusted_depth
    n = 1
    while True:
        if cap is not None and n + 1 >= cap:
            return max(cap - 1, 1)
        if alpha.convergent(n + 1).q >= target:
            return n
        n += 1


def scan_orbit(alpha: CertifiedReal, x, n_steps: int, **kernel_opts) -> dict:
    """Run the level kernel over n_steps certified signs.

    Accepts any base point handled by :func:`_base_point`; extra keyword
    arguments are passed to the kernel (checkpoints, want_levels,
    want_balanced, hist_bound).
    """
    if n_steps < 1:
        raise DomainError("n_steps must be >= 1")
    c, d, t0, x_frac = _base_point(x)

    if alpha.is_exact:
        v = alpha.exact_value
        modulus = 2 * d * v.denominator
        step = (2 * d * v.numerator) % modulus
        if step == 0:
            raise DomainError("alpha must be nonzero")
        half = d * v.denominator
        r_start = (2 * v.denominator * c + t0 * step) % modulus
        res = _backend.orbit_scan(r_start, step, modulus, half, -1, n_steps, **kernel_opts)
        res["depth_used"] = None
        return res

    target = 2 * d * n_steps << _SAFETY_BITS
    while True:
        n = _pick_depth(alpha, target)
        conv = alpha.convergent(n)
        q_next = alpha.convergent(n + 1).q
        modulus = 2 * d * conv.q
        half = d * conv.q
        step = (2 * d * conv.p) % modulus
        margin = (2 * d * n_steps) // q_next + 1
        if step == 0 or 8 * margin >= modulus:
            raise UndecidableAtPrecision(
                f"source too shallow: margin {margin} vs modulus {modulus} at depth {n}"
            )
        r_start = (2 * conv.q * c + t0 * step) % modulus
        try:
            res = _backend.orbit_scan(r_start, step, modulus, half, margin, n_steps, **kernel_opts)
        except AmbiguityOverflow:
            target <<= _SAFETY_BITS
            continue
        ok = True
        for k in map(int, res["ambiguous"]):
            t = t0 + k - 1
            r_t = (r_start + (k - 1) * step) % modulus
            assumed = 1 if r_t <= half else -1
            order = alpha.compare_frac(t, x_frac, ONE_HALF)
            true_sign = 1 if order is not Ordering.ABOVE else -1
            if true_sign != assumed:
                ok = False
                break
        if ok:
            res["depth_used"] = n
            return res
        target <<= _SAFETY_BITS


def iterate_levels(alpha: CertifiedReal, x, n_steps: int, store: bool | None = None) -> LevelTrace:
    """Level trace of the orbit of (x, 0) for steps 1..n_steps.

    ``store=None`` keeps the full sequence only for runs up to 10^6 steps;
    longer runs return a summary (final level and running max) unless the
    caller insists.
    """
    if store is None:
        store = n_steps <= 1_000_000
    res = scan_orbit(alpha, x, n_steps, want_levels=store)
    return LevelTrace(
        x=x,
        n_steps=n_steps,
        final_level=int(res["final_level"]),
        max_abs=int(res["max_abs"]),
        levels=res["levels"],
    )


def level_at_qn(alpha: CertifiedReal, x, n: int, budget: int = 10_000_000) -> int:
    """Level after exactly q_n steps (the caller may assert |result| <= 3)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    q_n = alpha.convergent(n).q
    if q_n > budget:
        raise BudgetExceeded(f"q_{n} = {q_n} exceeds budget {budget}")
    res = scan_orbit(alpha, x, q_n)
    return int(res["final_level"])


def max_abs_level(alpha: CertifiedReal, x, n: int, budget: int = 10_000_000) -> int:
    """max over i = 1..q_n of |level_i| (bounded by 3*A_n)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    q_n = alpha.convergent(n).q
    if q_n > budget:
        raise BudgetExceeded(f"q_{n} = {q_n} exceeds budget {budget}; use the renormalized path")
    res = scan_orbit(alpha, x, q_n)
    return int(res["max_abs"])


def check_one_per_interval(alpha: CertifiedReal, x, n: int, budget: int = 1_000_000) -> bool:
    """Whether {x + i*alpha : i = 1..q_n} meets each interval
    [x + j/q_n, x + (j+1)/q_n) mod 1 exactly once.

    Membership reduces exactly to frac(i*alpha) in [j/q_n, (j+1)/q_n)
    (the grid translates with x), with the half-open convention decided
    by certified comparisons; the result does not depend on x.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    _base_point(x)  # validate
    q_n = alpha.convergent(n).q
    if q_n > budget:
        raise BudgetExceeded(f"q_{n} = {q_n} exceeds budget {budget}")

    counts = np.zeros(q_n, dtype=np.int64)
    if alpha.is_exact:
        v = alpha.exact_value
        for i in range(1, q_n + 1):
            pos = (i * v) % 1
            counts[(pos.numerator * q_n) // pos.denominator] += 1
        return bool((counts == 1).all())

    depth = _pick_depth(alpha, 2 * q_n * q_n << _SAFETY_BITS)
    while True:
        lo_c = alpha.convergent(depth)
        hi_c = alpha.convergent(depth + 1)
        ambiguous = []
        counts[:] = 0
        for i in range(1, q_n + 1):
            fa, ra = divmod(i * lo_c.p, lo_c.q)
            fb, rb = divmod(i * hi_c.p, hi_c.q)
            if fa != fb:
                ambiguous.append(i)
                continue
            ba = (ra * q_n) // lo_c.q
            bb = (rb * q_n) // hi_c.q
            if ba == bb:
                counts[ba] += 1
            else:
                ambiguous.append(i)
        if not ambiguous:
            return bool((counts == 1).all())
        cap = alpha.trusted_depth
        if cap is not None and depth + 1 >= cap:
            raise UndecidableAtPrecision(
                f"interval membership undecided at trusted depth {cap}"
            )
        depth *= 2
