"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class UnsupportedAssertion(ValueError):
    """Asserting mode was requested for a measure the theorem does not cover."""

    code = "UNSUPPORTED_ASSERTION"


class Infeasible(ValueError):
    """A mass constraint cannot be met by rescaling."""

    code = "INFEASIBLE"


class DimensionLimit(ValueError):
    """Exact calculus requested above the supported dimension."""
