"""Exception types raised across the package."""


class InvalidInput(ValueError):
    """Input data violates an operation's preconditions."""


class InvalidModel(ValueError):
    """A simulation model is malformed (e.g. covariance not PSD)."""


class NumericFailure(ArithmeticError):
    """A numerical routine did not reach its accuracy target."""

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class ConfigError(ValueError):
    """A scenario config is invalid; ``keys`` lists the offending entries."""

    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)
