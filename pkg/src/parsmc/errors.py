"""Exception types shared across the library."""


class ParsmcError(Exception):
    """Base class for all parsmc errors."""


class AllWeightsZeroError(ParsmcError):
    """Every particle weight is zero: the filter has fully degenerated.

    Carries the time step at which degeneracy occurred when raised from a
    filtering run.
    """

    def __init__(self, message="all particle weights are zero", step=None):
        if step is not None:
            message = f"{message} (at time step {step})"
        super().__init__(message)
        self.step = step


class NonFiniteWeightError(ParsmcError):
    """A weight (or a value feeding one) is NaN or infinite."""


class NotPowerOfTwoError(ParsmcError):
    """The adder tree requires the particle count to be a power of two."""


class InsufficientPointsError(ParsmcError):
    """Too few distinct particle counts to fit a scaling law."""


class BenchConfigError(ParsmcError):
    """Invalid benchmark configuration."""
