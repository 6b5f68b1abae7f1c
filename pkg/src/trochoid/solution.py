"""Exact one-moment solution of channel Laplacian growth

Only t0 and t1 are nonzero. The interface is the trochoid

    X/R = t0/(2R) + lam^2/2 + lam*cos(sigma)
    (Y - Y0)/R = sigma - lam*sin(sigma)

with u = lam^2 the principal-branch root of u = kappa^2 * exp(u + t0/R),
i.e. u = -W0(-x^2), x^2 = kappa^2 e^(t0/R). The branch point x^2 = 1/e is
the critical time t_c = 2R log(1/kappa) - R where the trochoid becomes a
cusped cycloid.
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, List, Tuple, Union

import numpy as np
from scipy.special import lambertw

from src.constants import (
    BRANCH_POINT_WINDOW,
    LAMBERT_MAX_ITER,
    LAMBERT_RTOL,
    LAMBERT_SERIES_TERMS,
    LAMBERT_SERIES_THRESHOLD,
)
from src.errors import InvalidArgumentError, NumericError, PastSingularityError, SingularityError
from src.lgsolve.channel_map import MomentSet
from src.utils.logging import get_logger

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class TrochoidParams:
    """Cylinder radius R, auxiliary scale r0, amplitude 0 < kappa < 1, transverse offset Y0"""

    R: float
    r0: float
    kappa: float
    Y0: float = 0.0

    def __post_init__(self) -> None:
        if self.R <= 0:
            raise InvalidArgumentError(f"R must be positive, got {self.R}")
        if self.r0 <= 0:
            raise InvalidArgumentError(f"r0 must be positive, got {self.r0}")
        if not 0 < self.kappa < 1:
            raise InvalidArgumentError(f"kappa must lie in (0, 1), got {self.kappa}")

    @property
    def t1(self) -> complex:
        """t1 = (R kappa / r0) e^(-i Y0 / R)"""
        return self.R * self.kappa / self.r0 * cmath.exp(-1j * self.Y0 / self.R)

    @classmethod
    def from_t1(cls, R: float, r0: float, t1: complex) -> "TrochoidParams":
        """Invert t1 = (R kappa / r0) e^(-i Y0 / R)"""
        return cls(R=R, r0=r0, kappa=r0 * abs(t1) / R, Y0=-R * cmath.phase(t1))

    def with_t1(self, t1: complex) -> "TrochoidParams":
        return TrochoidParams.from_t1(self.R, self.r0, t1)

    def to_dict(self) -> dict:
        return {"R": self.R, "r0": self.r0, "kappa": self.kappa, "Y0": self.Y0}


@dataclass(frozen=True)
class TrochoidState:
    t0: float
    lam: float


def critical_time(params: TrochoidParams) -> float:
    """t_c = 2R log(1/kappa) - R"""
    return 2 * params.R * math.log(1 / params.kappa) - params.R


def critical_time_from_moments(R: float, r0: float, t1: complex) -> float:
    """t_c in terms of the conserved moment: 2R log(R / (r0 |t1|)) - R"""
    return 2 * R * math.log(R / (r0 * abs(t1))) - R


def time_of_lambda(params: TrochoidParams, lam: float) -> float:
    """Inverse of lambda_of_t on 0 < lam <= 1"""
    if not 0 < lam <= 1:
        raise InvalidArgumentError(f"lambda must lie in (0, 1], got {lam}")
    u = lam * lam
    return params.R * (math.log(u) - u - 2 * math.log(params.kappa))


def _series_u(x2: float) -> float:
    """u = sum k^(k-1)/k! x2^k"""
    return sum(k ** (k - 1) / factorial(k) * x2**k for k in range(1, LAMBERT_SERIES_TERMS + 1))


def _seed_u(x2: float) -> float:
    gap = 1 - math.e * x2
    if gap < BRANCH_POINT_WINDOW:
        p = math.sqrt(2 * max(gap, 0.0))
        return 1 - p + p * p / 3 - 11 / 72 * p**3
    return float(-lambertw(-x2, 0).real)


def solve_u(x2: float) -> float:
    """
    Principal root u in [0, 1] of u = x2 e^u for 0 <= x2 <= 1/e

    Raises:
        NumericError: If Newton iteration does not reach LAMBERT_RTOL
    """
    if x2 < 0 or x2 > math.exp(-1) * (1 + 1e-15):
        raise InvalidArgumentError(f"x^2 = {x2} outside [0, 1/e]")
    if x2 == 0:
        return 0.0
    if x2 < LAMBERT_SERIES_THRESHOLD:
        return _series_u(x2)

    u = min(_seed_u(x2), 1.0)
    trace: List[float] = [u]
    for _ in range(LAMBERT_MAX_ITER):
        g = x2 * math.exp(u)
        slope = 1 - g
        if slope <= 0:
            # right of the maximum; restart left of the root
            u = 1 - math.sqrt(2 * max(1 - math.e * x2, 0.0)) - 1e-8
            trace.append(u)
            continue
        step = (u - g) / slope
        u -= step
        trace.append(u)
        if abs(step) <= LAMBERT_RTOL * max(abs(u), 1e-300):
            # polish
            g = x2 * math.exp(u)
            if 1 - g > 0:
                u -= (u - g) / (1 - g)
            return min(max(u, 0.0), 1.0)
    raise NumericError(f"Lambert iteration did not converge for x^2={x2}", trace=trace)


def lambda_of_t(params: TrochoidParams, t0: float) -> float:
    """
    Trochoid amplitude lam(t0)

    Raises:
        PastSingularityError: If t0 exceeds the critical time
    """
    tc = critical_time(params)
    if t0 > tc + 1e-14 * max(1.0, abs(tc)):
        raise PastSingularityError(f"t0={t0} is past the critical time t_c={tc}")
    if t0 >= tc:
        return 1.0
    x2 = min(params.kappa**2 * math.exp(t0 / params.R), math.exp(-1))
    return math.sqrt(solve_u(x2))


def state(params: TrochoidParams, t0: float) -> TrochoidState:
    return TrochoidState(t0=t0, lam=lambda_of_t(params, t0))


def contour(params: TrochoidParams, t0: float, sigma: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Interface point(s) (X, Y) at parameter sigma"""
    lam = lambda_of_t(params, t0)
    R = params.R
    sigma = np.asarray(sigma, dtype=float)
    X = R * (t0 / (2 * R) + lam**2 / 2 + lam * np.cos(sigma))
    Y = params.Y0 + R * (sigma - lam * np.sin(sigma))
    return X, Y


def moments(params: TrochoidParams, t0: float) -> MomentSet:
    """t1, v0, v1, v2 of the trochoid (t_k = 0 for k >= 2)"""
    lam = lambda_of_t(params, t0)
    R, r0, t1 = params.R, params.r0, params.t1
    u = lam * lam
    v0 = 2 * t0 * math.log(r0) + t0 * t0 / (2 * R) + R / 2 * u * (2 - u)
    v1 = R * R / (2 * t1) * u * (2 - u)
    v2 = R**3 / (3 * t1 * t1) * u * u * (3 - 2 * u)
    return MomentSet(R=R, r0=r0, t0=t0, t=np.array([t1]), v=np.array([v1, v2]), v0=v0)


def tau(params: TrochoidParams, t0: float) -> float:
    """F0 = t0^3/(6R) + t0^2 log r0 + (R^2/12) lam^2 (2 lam^4 - 9 lam^2 + 12)"""
    lam = lambda_of_t(params, t0)
    R = params.R
    u = lam * lam
    return t0**3 / (6 * R) + t0 * t0 * math.log(params.r0) + R * R / 12 * u * (2 * u * u - 9 * u + 12)


TauFunction = Callable[[TrochoidParams, float], float]


def _guard_singular(lam: float) -> None:
    if lam >= 1.0:
        raise SingularityError("Derivatives of lambda diverge at the critical point lambda = 1")


def lambda_partials(params: TrochoidParams, t0: float) -> Tuple[float, complex, float]:
    """
    (d lam/d t0, d lam/d t1, d lam/d R)

    d/dt1 is the holomorphic derivative at fixed t1bar; d/dR is taken at
    fixed t0 and t1.

    Raises:
        SingularityError: At lam = 1
    """
    lam = lambda_of_t(params, t0)
    _guard_singular(lam)
    R = params.R
    gap = 1 - lam * lam
    d_t0 = lam / (2 * R * gap)
    d_t1 = lam / (2 * params.t1 * gap)
    d_R = -lam * (t0 + 2 * R) / (2 * R * R * gap)
    return d_t0, d_t1, d_R


def d2v0_dt02(params: TrochoidParams, t0: float) -> float:
    """Second t0-derivative of v0: 1/(R(1 - lam^2))"""
    lam = lambda_of_t(params, t0)
    _guard_singular(lam)
    return 1 / (params.R * (1 - lam * lam))


def _lambert_series(order: int) -> List[Fraction]:
    """Coefficients of u(y) = sum k^(k-1)/k! y^k, index 0..order"""
    return [Fraction(0)] + [Fraction(k ** (k - 1), factorial(k)) for k in range(1, order + 1)]


def _truncated_mul(a: List[Fraction], b: List[Fraction], order: int) -> List[Fraction]:
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j in range(order + 1 - i):
            out[i + j] += x * b[j]
    return out


def taylor_coefficients(order: int) -> List[Tuple[int, Fraction]]:
    """
    Exact Taylor coefficients of tau at t0 = 0, r0 = 1 in powers of t1*t1bar

    Entry d-1 is (2d-2, c_d): the coefficient of (t1 t1bar)^d is beta^(2d-2) c_d,
    beta = 1/R. Computed from the Lambert series for lam^2, independently of
    any Hurwitz counting.
    """
    if order < 1:
        raise InvalidArgumentError(f"order must be >= 1, got {order}")
    u = _lambert_series(order)
    u2 = _truncated_mul(u, u, order)
    u3 = _truncated_mul(u2, u, order)
    g = [2 * c3 - 9 * c2 + 12 * c1 for c1, c2, c3 in zip(u, u2, u3)]
    return [(2 * d - 2, g[d] / 12) for d in range(1, order + 1)]


def observables(params: TrochoidParams, t0: float) -> dict:
    """Per-time record {t0, lambda, t1, v0, v1, v2, F0, t_c} for exports"""
    m = moments(params, t0)
    return {
        "t0": t0,
        "lambda": lambda_of_t(params, t0),
        "t1_re": m.tk(1).real,
        "t1_im": m.tk(1).imag,
        "v0": m.v0,
        "v1_re": m.vk(1).real,
        "v1_im": m.vk(1).imag,
        "v2_re": m.vk(2).real,
        "v2_im": m.vk(2).imag,
        "F0": tau(params, t0),
        "t_c": critical_time(params),
    }
