"""Exception and warning types shared across the package."""


class ZeroDenominator(ArithmeticError):
    """A closed-form expression requires a channel gain that is exactly zero."""


class DegenerateNullspace(ArithmeticError):
    """Closed-form nullspace columns are numerically linearly dependent."""


class DegenerateChannel(ValueError):
    """The channel fails the solvability screen for exact alignment.

    Carries the :class:`~fbia.channel.NondegeneracyReport` that triggered the
    rejection in :attr:`report` (``None`` when raised from a low-level rank
    check that never built a report).
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NonpositivePower(ValueError):
    """Transmit power must be strictly positive."""


class ConfigError(ValueError):
    """A sweep configuration is malformed."""


class IllConditionedWarning(UserWarning):
    """A Gram matrix was near-singular and a ridge fallback was applied."""
