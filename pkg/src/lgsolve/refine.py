"""Step refinement for continuation in t0"""

from typing import Callable, Optional, Tuple, TypeVar

from src.errors import GeometryError, NumericError, ResolutionError
from src.utils.logging import get_logger

logger = get_logger(__name__)

T = TypeVar("T")

REFINABLE_ERRORS = (NumericError, GeometryError, ResolutionError)


class StepRefinementExhausted(NumericError):
    """Every step size down to the last halving failed"""

    def __init__(self, message: str, step: float, last_error: Exception):
        super().__init__(message)
        self.step = step
        self.last_error = last_error


def is_refinable_error(error: Exception) -> bool:
    """
    Check if a failed continuation step may succeed with a smaller step

    Args:
        error: The exception raised by the step

    Returns:
        True for convergence, geometry and resolution failures
    """
    return isinstance(error, REFINABLE_ERRORS)


def retry_with_halving(
    attempt: Callable[[float], T],
    step: float,
    max_halvings: int,
    on_retry: Optional[Callable[[int, float, Exception], None]] = None,
) -> Tuple[T, float]:
    """
    Run a continuation step, halving the step size after each refinable failure

    Args:
        attempt: Function of the step size
        step: Initial step size
        max_halvings: Maximum number of halvings
        on_retry: Optional callback with (halving number, new step, last error)

    Returns:
        (result, step size that succeeded)

    Raises:
        StepRefinementExhausted: If the smallest step also fails
        Exception: Non-refinable errors propagate unchanged
    """
    last_error: Optional[Exception] = None

    for halving in range(max_halvings + 1):
        current = step / 2**halving
        try:
            if halving > 0:
                logger.info(f"Refinement {halving}/{max_halvings}: retrying with step {current:.3e}")
            return attempt(current), current

        except Exception as e:
            if not is_refinable_error(e):
                logger.error(f"Non-refinable error: {e}")
                raise
            last_error = e
            logger.warning(f"Step {current:.3e} failed: {e}")
            if on_retry and halving < max_halvings:
                on_retry(halving + 1, current / 2, e)

    smallest = step / 2**max_halvings
    error_msg = f"Maximum halvings ({max_halvings}) reached at step {smallest:.3e}. Last error: {last_error}"
    logger.warning(error_msg)
    raise StepRefinementExhausted(error_msg, smallest, last_error)  # type: ignore[arg-type]
