"""Exception types raised across the package.

All of them subclass a builtin so callers that only care about the broad
category (``ValueError``, ``RuntimeError``...) can keep catching that.
"""


class SizeError(ValueError):
    """Requested problem size is outside the supported range."""


class DimensionError(ValueError):
    """An assignment, state or sample does not match the model size."""


class PenaltyConfigError(ValueError):
    """A penalty coefficient required by the problem's constraints is missing."""


class ResourceError(RuntimeError):
    """The qubit count exceeds what the simulator or enumerator will handle."""


class NumericError(ArithmeticError):
    """A non-finite value appeared during simulation or optimization."""


class ScheduleError(ValueError):
    """An annealing table or schedule violates its monotonicity contract."""
