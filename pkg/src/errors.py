"""Exception types shared across the package"""

from typing import List, Optional, Sequence


class ChannelTauError(Exception):
    """Base class for all errors raised by this package"""

    pass


class InvalidArgumentError(ChannelTauError, ValueError):
    """An argument violates an operation's precondition"""

    pass


class ResourceLimitError(ChannelTauError):
    """The requested computation exceeds the configured budget"""

    def __init__(self, required: int, budget: int, what: str = "steps"):
        self.required = required
        self.budget = budget
        super().__init__(
            f"Computation requires {required} {what}, budget is {budget}; "
            f"rerun with --budget {required} or larger"
        )


class PastSingularityError(ChannelTauError):
    """Time lies beyond the critical time of the solution"""

    pass


class SingularityError(ChannelTauError):
    """Evaluation at the singular point lambda = 1"""

    pass


class NumericError(ChannelTauError):
    """An iteration failed to converge"""

    def __init__(self, message: str, trace: Optional[Sequence[float]] = None):
        self.trace: List[float] = list(trace or [])
        super().__init__(message)


class NoConvergenceError(NumericError):
    """Newton iteration hit max_iter without reaching tolerance"""

    def __init__(self, message: str, history: Optional[Sequence[float]] = None):
        super().__init__(message, history)
        self.history = self.trace


class GeometryError(ChannelTauError):
    """The conformal map stopped being injective on the grid"""

    pass


class ResolutionError(ChannelTauError):
    """Quadrature or time resolution is insufficient"""

    pass


class ConsistencyError(ChannelTauError):
    """Two independent evaluations of the same quantity disagree"""

    pass


class StepSizeError(ChannelTauError):
    """Finite-difference step too large (Richardson check failed)"""

    pass
