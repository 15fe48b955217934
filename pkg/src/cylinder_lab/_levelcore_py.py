"""Pure-python orbit scan kernel.

Reference implementation of the inner loop shared with the compiled
extension: walk the scaled positions r_t = (r_start + t*step) mod modulus,
turn each into a +-1 sign (position in [0, 1/2] iff r <= half), and
accumulate level statistics.  Arbitrary-size integers throughout, so this
backend also covers parameter ranges the compiled kernel refuses.
"""

from __future__ import annotations

import numpy as np

from .errors import AmbiguityOverflow

__all__ = ["orbit_scan"]


def orbit_scan(
    r_start: int,
    step: int,
    modulus: int,
    half: int,
    margin: int,
    n_steps: int,
    checkpoints=(),
    want_levels: bool = False,
    want_balanced: bool = False,
    hist_bound: int = 0,
    max_ambiguous: int = 65536,
) -> dict:
    """Scan n_steps signs and return level statistics.

    The k-th sign (k = 1..n_steps) is taken at scaled position
    r_start + (k-1)*step mod modulus; the level after k steps is the sum
    of the first k signs.  ``margin`` >= 0 flags every evaluation whose
    scaled position lies within margin of a boundary (0 or half) as
    ambiguous, for the caller to re-certify; margin < 0 disables the
    check (exact rational mode).  ``hist_bound`` > 0 additionally
    histograms the levels l_1..l_n, which must fit in [-bound, bound].
    """
    if not 0 < step < modulus or not 0 <= r_start < modulus:
        raise ValueError("need 0 <= r_start < modulus and 0 < step < modulus")
    r = r_start
    level = 0
    max_abs = 0
    balanced: list[int] = [] if want_balanced else None
    levels = np.empty(n_steps, dtype=np.int64) if want_levels else None
    hist = np.zeros(2 * hist_bound + 1, dtype=np.int64) if hist_bound > 0 else None
    ambiguous: list[int] = []
    cps = list(checkpoints)
    cp_levels = np.empty(len(cps), dtype=np.int64)
    cp_maxabs = np.empty(len(cps), dtype=np.int64)
    cp_i = 0

    for k in range(1, n_steps + 1):
        if margin >= 0:
            d0 = r if r <= modulus - r else modulus - r
            dh = r - half if r >= half else half - r
            if d0 <= margin or dh <= margin:
                ambiguous.append(k)
                if len(ambiguous) > max_ambiguous:
                    raise AmbiguityOverflow(f"more than {max_ambiguous} ambiguous steps")
        if r <= half:
            level += 1
        else:
            level -= 1
        if level > max_abs:
            max_abs = level
        elif -level > max_abs:
            max_abs = -level
        if want_levels:
            levels[k - 1] = level
        if hist is not None:
            if not -hist_bound <= level <= hist_bound:
                raise ValueError(f"level {level} escaped histogram bound {hist_bound}")
            hist[level + hist_bound] += 1
        if want_balanced and level == 0:
            balanced.append(k)
        if cp_i < len(cps) and k == cps[cp_i]:
            cp_levels[cp_i] = level
            cp_maxabs[cp_i] = max_abs
            cp_i += 1
        r += step
        if r >= modulus:
            r -= modulus

    if cp_i != len(cps):
        raise ValueError("checkpoints must be sorted, unique and <= n_steps")
    return {
        "final_level": level,
        "max_abs": max_abs,
        "balanced": np.asarray(balanced, dtype=np.int64) if want_balanced else None,
        "levels": levels,
        "hist": hist,
        "checkpoint_levels": cp_levels,
        "checkpoint_maxabs": cp_maxabs,
        "ambiguous": np.asarray(ambiguous, dtype=np.int64),
    }
