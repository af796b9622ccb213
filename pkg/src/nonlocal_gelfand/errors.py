"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input violates a standing hypothesis (for example ``n > 2s``)."""


class UsageError(ValueError):
    """A call is malformed in a way unrelated to the mathematics."""


class QuadratureError(RuntimeError):
    """An adaptive integration did not reach its tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class CheckFailed(RuntimeError):
    """A verification cross-check disagreed beyond its tolerance."""
