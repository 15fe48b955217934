"""Exception types shared across the package."""


class CylinderLabError(Exception):
    """Base class for all package-specific errors."""


class SourceExhausted(CylinderLabError):
    """A finite quotient source was asked for a depth it cannot provide."""


class EmptyExpansion(CylinderLabError):
    """An operation needed at least one partial quotient but got none."""


class DomainError(CylinderLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UndecidableAtPrecision(CylinderLabError):
    """A certified comparison could not be decided within the trusted depth.

    This is never a wrong answer: callers either retry with a deeper source
    or give up on the query.
    """


class BudgetExceeded(CylinderLabError):
    """A brute-force operation was asked to exceed its step budget."""


class InvalidSchedule(CylinderLabError, ValueError):
    """A constructed-quotient schedule violates its declared constraints."""


class AmbiguityOverflow(CylinderLabError):
    """An orbit scan hit too many near-boundary positions; refine and retry."""
