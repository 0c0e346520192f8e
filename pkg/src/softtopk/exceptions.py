"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An input violates a documented precondition."""


class UnsupportedConfigError(ValueError):
    """The requested solver/regularizer combination is not supported."""


class NumericError(RuntimeError):
    """A numerical routine failed to converge.

    Carries the best bracket found so far in ``bracket`` (or None).
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket
