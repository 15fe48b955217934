# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled orbit scan kernel.

Twin of ``_levelcore_py.orbit_scan`` restricted to moduli below 2^126,
using 128-bit integer positions.  The wide parameters cross the Python
boundary as (hi, lo) 64-bit pairs; see ``_backend`` for the split.
"""

import numpy as np

from .errors import AmbiguityOverflow

cdef extern from *:
    ctypedef unsigned long long uint128 "unsigned __int128"


def orbit_scan_ext(unsigned long long r_hi, unsigned long long r_lo,
                   unsigned long long s_hi, unsigned long long s_lo,
                   unsigned long long m_hi, unsigned long long m_lo,
                   unsigned long long h_hi, unsigned long long h_lo,
                   long long margin, long long n_steps,
                   long long[::1] checkpoints,
                   bint want_levels, bint want_balanced,
                   long long hist_bound, long long max_ambiguous):
    cdef uint128 r = ((<uint128>r_hi) << 64) | r_lo
    cdef uint128 s = ((<uint128>s_hi) << 64) | s_lo
    cdef uint128 m = ((<uint128>m_hi) << 64) | m_lo
    cdef uint128 half = ((<uint128>h_hi) << 64) | h_lo
    cdef uint128 marg = 0
    cdef bint check_margin = margin >= 0
    if check_margin:
        marg = <uint128>margin
    cdef uint128 d0, dh

    cdef long long level = 0, max_abs = 0, k
    cdef long long n_cp = checkpoints.shape[0]
    cdef long long cp_i = 0

    levels_arr = np.empty(n_steps if want_levels else 0, dtype=np.int64)
    cdef long long[::1] levels = levels_arr
    hist_arr = np.zeros(2 * hist_bound + 1 if hist_bound > 0 else 0, dtype=np.int64)
    cdef long long[::1] hist = hist_arr
    cp_levels_arr = np.empty(n_cp, dtype=np.int64)
    cp_maxabs_arr = np.empty(n_cp, dtype=np.int64)
    cdef long long[::1] cp_levels = cp_levels_arr
    cdef long long[::1] cp_maxabs = cp_maxabs_arr

    balanced = [] if want_balanced else None
    ambiguous = []

    for k in range(1, n_steps + 1):
        if check_margin:
            d0 = r if r <= m - r else m - r
            dh = r - half if r >= half else half - r
            if d0 <= marg or dh <= marg:
                ambiguous.append(k)
                if len(ambiguous) > max_ambiguous:
                    raise AmbiguityOverflow(
                        "more than %d ambiguous steps" % max_ambiguous)
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
        if hist_bound > 0:
            if level < -hist_bound or level > hist_bound:
                raise ValueError(
                    "level %d escaped histogram bound %d" % (level, hist_bound))
            hist[level + hist_bound] += 1
        if want_balanced and level == 0:
            balanced.append(k)
        if cp_i < n_cp and k == checkpoints[cp_i]:
            cp_levels[cp_i] = level
            cp_maxabs[cp_i] = max_abs
            cp_i += 1
        r += s
        if r >= m:
            r -= m

    if cp_i != n_cp:
        raise ValueError("checkpoints must be sorted, unique and <= n_steps")
    return {
        "final_level": level,
        "max_abs": max_abs,
        "balanced": np.asarray(balanced, dtype=np.int64) if want_balanced else None,
        "levels": levels_arr if want_levels else None,
        "hist": hist_arr if hist_bound > 0 else None,
        "checkpoint_levels": cp_levels_arr,
        "checkpoint_maxabs": cp_maxabs_arr,
        "ambiguous": np.asarray(ambiguous, dtype=np.int64),
    }
