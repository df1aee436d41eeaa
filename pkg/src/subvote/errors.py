"""Exception types shared across the package."""


class SubvoteError(Exception):
    """Base class for errors raised by this package."""


class InvalidParameterError(SubvoteError, ValueError):
    """A parameter violates a documented precondition."""


class BudgetExceededError(SubvoteError, ValueError):
    """An enumeration or search would exceed its size budget."""


class DataError(SubvoteError, ValueError):
    """Input data could not be parsed or is structurally invalid."""


class UnsoundCertificateError(SubvoteError, ValueError):
    """A certificate was requested from a heuristic (non-sound) corruption bound."""


class VerificationError(SubvoteError, RuntimeError):
    """An end-to-end soundness verification failed."""
