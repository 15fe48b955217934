"""Exact experimentation on balanced times of circle rotations over the integer cylinder."""

from .cf import (
    Convergent,
    ConstructedSource,
    ExplicitSource,
    PartialQuotientSource,
    PeriodicSource,
    SampledSource,
    convergents,
    expand_real,
    gauss_map,
    quotient_sums,
)
from .certified import CertifiedReal, Ordering, certify_compare, f_value

__version__ = "0.1.0"
