"""Exception hierarchy. Each class maps to one CLI exit code."""

import math
from typing import Optional, Union


class MultibosonError(Exception):
    """Base class for every error raised by the engine."""

    exit_code = 1


class InputValidationError(MultibosonError, ValueError):
    """An input violates a domain invariant (unitarity, Gram PSD, port ranges, ...)."""

    exit_code = 1


class NumericalError(MultibosonError, ArithmeticError):
    """A numerical routine failed to reach its tolerance."""

    exit_code = 1

    def __init__(self, message: str, abserr: Optional[float] = None, intervals: Optional[int] = None):
        super().__init__(message)
        self.abserr = abserr
        self.intervals = intervals


class InfeasibleError(MultibosonError):
    """The requested computation exceeds a size guard."""

    exit_code = 3

    def __init__(self, message: str, cost_estimate: Union[int, float], limit: int):
        try:
            cost_estimate = float(cost_estimate)
        except OverflowError:
            # exact integer counts past the float range
            cost_estimate = math.inf
        super().__init__(f"{message} (estimated cost: {cost_estimate:.3e} terms)")
        self.cost_estimate = cost_estimate
        self.limit = limit


class ScenarioError(MultibosonError):
    """A scenario or matrix file could not be parsed."""

    exit_code = 2
