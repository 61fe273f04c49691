"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad input: mismatched grids, invalid exponents, malformed files."""


class GuardViolation(RuntimeError):
    """A resolution or budget guard refused to build an unresolved object."""
