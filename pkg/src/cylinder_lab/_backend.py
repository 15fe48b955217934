"""Kernel selection: compiled orbit scan when available, pure python otherwise.

The compiled kernel works in 128-bit integers and is used whenever the
scaled parameters fit; the pure kernel has no size limits.  Set
``CYLINDER_LAB_FORCE_PURE=1`` to force the fallback (used by the tests
and the benchmark to compare both paths).
"""

from __future__ import annotations

import os

import numpy as np

from . import _levelcore_py

try:
    from . import _levelcore as _ext
except ImportError:  # pragma: no cover - depends on build environment
    _ext = None

_EXT_LIMIT = 1 << 126
_MARGIN_LIMIT = 1 << 62

__all__ = ["orbit_scan", "have_extension", "backend_for"]


def have_extension() -> bool:
    return _ext is not None


def _force_pure() -> bool:
    return os.environ.get("CYLINDER_LAB_FORCE_PURE") == "1"


def backend_for(modulus: int, margin: int, hist_bound: int) -> str:
    if (
        _ext is not None
        and not _force_pure()
        and modulus < _EXT_LIMIT
        and margin < _MARGIN_LIMIT
        and hist_bound < (1 << 30)
    ):
        return "compiled"
    return "pure"


def _split(v: int) -> tuple[int, int]:
    return v >> 64, v & ((1 << 64) - 1)


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
    if backend_for(modulus, margin, hist_bound) == "compiled":
        cps = np.asarray(list(checkpoints), dtype=np.int64)
        return _ext.orbit_scan_ext(
            *_split(r_start),
            *_split(step),
            *_split(modulus),
            *_split(half),
            margin,
            n_steps,
            cps,
            want_levels,
            want_balanced,
            hist_bound,
            max_ambiguous,
        )
    return _levelcore_py.orbit_scan(
        r_start,
        step,
        modulus,
        half,
        margin,
        n_steps,
        checkpoints=checkpoints,
        want_levels=want_levels,
        want_balanced=want_balanced,
        hist_bound=hist_bound,
        max_ambiguous=max_ambiguous,
    )
