"""Exception types raised across the package."""


class NumericFailure(ArithmeticError):
    """A numerical routine produced a singular system or a non-finite value."""


class IntegrationFailure(NumericFailure):
    """An ODE or recurrence diverged."""


class UndefinedCorrelation(ValueError):
    """A correlation or NRMSE was requested on a constant sequence."""
