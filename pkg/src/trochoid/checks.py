"""Finite-difference checks on the closed-form trochoid tau-function"""

import cmath
import math
from dataclasses import asdict, dataclass
from typing import Optional

from src.constants import FD_STEP, NEAR_CRITICAL_FACTOR
from src.errors import InvalidArgumentError, PastSingularityError
from src.trochoid.solution import TauFunction, TrochoidParams, lambda_of_t, tau
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class TodaReport:
    """d^2 F0/dt1 dt1bar against exp(d^2 F0/dt0^2) at one point"""

    t0: float
    lam: float
    h: float
    lhs: float
    rhs: float
    residual: float

    def to_dict(self) -> dict:
        return asdict(self)


def _evaluate(
    params: TrochoidParams, t0: float, t1: complex, h: float, tau_fn: TauFunction
) -> float:
    """tau at (t0, t1) with the stencil guarded against the cusp"""
    moved = params.with_t1(t1)
    try:
        lam = lambda_of_t(moved, t0)
    except PastSingularityError as e:
        raise InvalidArgumentError(f"Stencil point (t0={t0}, t1={t1}) crosses t_c: {e}") from e
    if lam > 1 - NEAR_CRITICAL_FACTOR * h:
        raise InvalidArgumentError(
            f"Stencil point (t0={t0}, t1={t1}) has lambda={lam:.6f} too close to 1 for h={h}"
        )
    return tau_fn(moved, t0)


def check_first_toda(
    params: TrochoidParams,
    t0: float,
    h: float = FD_STEP,
    tau_fn: Optional[TauFunction] = None,
) -> TodaReport:
    """
    Relative residual of d^2 F0/(dt1 dt1bar) = exp(d^2 F0/dt0^2)

    The mixed derivative is a quarter of the Laplacian in (Re t1, Im t1).
    Perturbations of t1 go through (kappa, Y0) so every stencil point is an
    exact trochoid.

    Args:
        params: Base trochoid
        t0: Time
        h: Central-difference step for t0, Re t1 and Im t1
        tau_fn: Tau evaluator (defaults to the closed form)

    Raises:
        InvalidArgumentError: If the stencil crosses or nears the critical time
    """
    fn = tau_fn or tau
    t1 = params.t1
    center = _evaluate(params, t0, t1, h, fn)

    lap = (
        _evaluate(params, t0, t1 + h, h, fn)
        + _evaluate(params, t0, t1 - h, h, fn)
        + _evaluate(params, t0, t1 + 1j * h, h, fn)
        + _evaluate(params, t0, t1 - 1j * h, h, fn)
        - 4 * center
    ) / (h * h)
    lhs = lap / 4

    d2_t0 = (
        _evaluate(params, t0 + h, t1, h, fn) - 2 * center + _evaluate(params, t0 - h, t1, h, fn)
    ) / (h * h)
    rhs = math.exp(d2_t0)

    residual = abs(lhs - rhs) / abs(rhs)
    lam = lambda_of_t(params, t0)
    logger.debug(f"First dToda at lambda={lam:.4f}: lhs={lhs:.12g} rhs={rhs:.12g}")
    return TodaReport(t0=t0, lam=lam, h=h, lhs=lhs, rhs=rhs, residual=residual)


def reduced_tau(params: TrochoidParams, t0: float) -> float:
    """F0 - t0^3/(6R) - t0^2 log r0"""
    return tau(params, t0) - t0**3 / (6 * params.R) - t0 * t0 * math.log(params.r0)


def check_r0_covariance(params: TrochoidParams, t0: float, r0_new: float) -> float:
    """
    |reduced_tau(r0, t0) - reduced_tau(r0', t0')| at fixed t1, with
    t0' + 2R log r0' = t0 + 2R log r0
    """
    if r0_new <= 0:
        raise InvalidArgumentError(f"r0 must be positive, got {r0_new}")
    R = params.R
    t1 = params.t1
    moved = TrochoidParams(R=R, r0=r0_new, kappa=r0_new * abs(t1) / R, Y0=-R * cmath.phase(t1))
    t0_new = t0 + 2 * R * math.log(params.r0) - 2 * R * math.log(r0_new)
    return abs(reduced_tau(params, t0) - reduced_tau(moved, t0_new))
