"""Exception types shared across the package."""


class NotDyadicError(ValueError):
    """A rational was required to have a power-of-two denominator."""


class InsufficientPrecision(LookupError):
    """A finite-depth bit accessor ran out of bits."""


class InsufficientDepth(RuntimeError):
    """A stage search ran past the available stage depth."""


class UndecidedComparison(ArithmeticError):
    """Enclosures did not separate within the refinement cap."""


class BudgetExceeded(RuntimeError):
    """A dovetailed search did not finish within its step budget."""
