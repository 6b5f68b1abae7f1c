"""Truncated channel conformal map and its harmonic moments

The map from the half-strip to the viscous side is

    Z(W) = R W + sum_{k=0}^{N} u_k e^(-k W)

and the interface is the image of W = i*sigma, sigma in [0, 2*pi). On that
grid the moment integrals have periodic integrands, so the uniform
trapezoid rule converges spectrally:

    t0  = (1/(pi R)) oint X dY
    t_k = r0^-k / (pi i k R) oint e^(-kZ/R) X dZ
    v_k = r0^k / (pi i R) oint e^(kZ/R) X dZ

v0 comes from R v0 = t0^2/2 + 2 R t0 log r0 + sum k t_k v_k; the cutoff
integral v0 = 2 t0 log r0 + (2/(pi R^2)) oint (X^2/2) dY is reported as an
independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Optional, Union

import numpy as np

from src.constants import SELFTEST_TOL
from src.errors import GeometryError, InvalidArgumentError, NoConvergenceError, ResolutionError
from src.utils.logging import get_logger

if TYPE_CHECKING:
    from src.trochoid.solution import TrochoidParams

logger = get_logger(__name__)

ComplexLike = Union[complex, np.ndarray]


@dataclass
class MomentSet:
    """
    t0 with complex moments t_1..t_K and v_1..v_K'

    ``t[k-1]`` holds t_k and ``v[k-1]`` holds v_k. Optional fields are
    filled in by quadrature: the cutoff-integral v0 and the largest change
    seen when the quadrature grid was doubled.
    """

    R: float
    r0: float
    t0: float
    t: np.ndarray
    v: np.ndarray
    v0: float
    v0_quadrature: Optional[float] = None
    v0_imag: float = 0.0
    selftest_delta: Optional[float] = None

    def tk(self, k: int) -> complex:
        """t_k, zero beyond the stored range"""
        if k < 1:
            raise InvalidArgumentError(f"Moment index must be >= 1, got {k}")
        return complex(self.t[k - 1]) if k <= len(self.t) else 0j

    def vk(self, k: int) -> complex:
        if k < 1:
            raise InvalidArgumentError(f"Moment index must be >= 1, got {k}")
        return complex(self.v[k - 1]) if k <= len(self.v) else 0j

    @property
    def support(self) -> int:
        """Largest k with t_k != 0 (0 if none)"""
        nonzero = np.nonzero(np.abs(self.t) > 0)[0]
        return int(nonzero[-1]) + 1 if len(nonzero) else 0

    @classmethod
    def targets(cls, R: float, r0: float, t0: float, t: dict) -> "MomentSet":
        """Target set from {k: t_k}; v entries are left empty"""
        K = max(t, default=0)
        arr = np.zeros(K, dtype=complex)
        for k, value in t.items():
            if k < 1:
                raise InvalidArgumentError(f"Target index must be >= 1, got {k}")
            arr[k - 1] = value
        return cls(R=R, r0=r0, t0=t0, t=arr, v=np.zeros(0, dtype=complex), v0=float("nan"))

    def with_t0(self, t0: float) -> "MomentSet":
        return replace(self, t0=t0)

    def to_record(self) -> dict:
        return {
            "t0": self.t0,
            "t_re": [float(x.real) for x in self.t],
            "t_im": [float(x.imag) for x in self.t],
            "v_re": [float(x.real) for x in self.v],
            "v_im": [float(x.imag) for x in self.v],
            "v0": self.v0,
            "v0_quadrature": self.v0_quadrature,
        }


@dataclass(frozen=True)
class ContourSample:
    """Map values on the uniform grid W = i*sigma"""

    sigma: np.ndarray
    Z: np.ndarray
    Zp: np.ndarray  # dZ/dW

    @property
    def M(self) -> int:
        return len(self.sigma)

    @property
    def X(self) -> np.ndarray:
        return self.Z.real

    @property
    def Y(self) -> np.ndarray:
        return self.Z.imag

    @property
    def dZ(self) -> np.ndarray:
        """dZ/dsigma = i Z'(i sigma)"""
        return 1j * self.Zp

    def integrate(self, values: np.ndarray) -> complex:
        """Trapezoid rule for oint f dsigma on the periodic grid"""
        return complex(2 * math.pi * np.mean(values))

    def min_abs_derivative(self) -> float:
        return float(np.min(np.abs(self.Zp)))


@dataclass(frozen=True)
class ChannelMap:
    """Z(W) = R W + sum u_k e^(-kW), k = 0..N"""

    R: float
    r0: float
    u: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        if self.R <= 0:
            raise InvalidArgumentError(f"R must be positive, got {self.R}")
        if self.r0 <= 0:
            raise InvalidArgumentError(f"r0 must be positive, got {self.r0}")
        if len(self.u) < 1:
            raise InvalidArgumentError("A channel map needs at least u_0")
        object.__setattr__(self, "u", np.asarray(self.u, dtype=complex))

    @property
    def N(self) -> int:
        return len(self.u) - 1

    @classmethod
    def straight(cls, R: float, r0: float, N: int, t0: float, gauge_im_u0: float = 0.0) -> "ChannelMap":
        """Flat interface X = t0/2"""
        u = np.zeros(N + 1, dtype=complex)
        u[0] = t0 / 2 + 1j * gauge_im_u0
        return cls(R, r0, u)

    @classmethod
    def from_trochoid(cls, params: "TrochoidParams", t0: float, N: int) -> "ChannelMap":
        """Exact embedding of the trochoid: u0 = (t0 + R lam^2)/2 + i Y0, u1 = R lam"""
        from src.trochoid.solution import lambda_of_t

        if N < 1:
            raise InvalidArgumentError(f"A trochoid needs N >= 1, got {N}")
        lam = lambda_of_t(params, t0)
        u = np.zeros(N + 1, dtype=complex)
        u[0] = (t0 + params.R * lam * lam) / 2 + 1j * params.Y0
        u[1] = params.R * lam
        return cls(params.R, params.r0, u)

    def with_u(self, u: np.ndarray) -> "ChannelMap":
        return ChannelMap(self.R, self.r0, np.array(u, dtype=complex))

    def resized(self, N: int) -> "ChannelMap":
        """Pad with zeros or drop the highest coefficients"""
        u = np.zeros(N + 1, dtype=complex)
        n = min(N, self.N) + 1
        u[:n] = self.u[:n]
        return self.with_u(u)

    def to_record(self) -> dict:
        return {
            "u_re": [float(x.real) for x in self.u],
            "u_im": [float(x.imag) for x in self.u],
        }


def eval_map(m: ChannelMap, W: ComplexLike) -> ComplexLike:
    """Z(W) = R W + sum u_k e^(-kW)"""
    W = np.asarray(W, dtype=complex)
    k = np.arange(m.N + 1)
    Z = m.R * W + np.sum(m.u[:, None] * np.exp(-np.outer(k, W.ravel())), axis=0).reshape(W.shape)
    return Z if Z.shape else complex(Z)


def eval_map_derivative(m: ChannelMap, W: ComplexLike) -> ComplexLike:
    """Z'(W) = R - sum k u_k e^(-kW)"""
    W = np.asarray(W, dtype=complex)
    k = np.arange(m.N + 1)
    Zp = m.R - np.sum((k * m.u)[:, None] * np.exp(-np.outer(k, W.ravel())), axis=0).reshape(W.shape)
    return Zp if Zp.shape else complex(Zp)


def invert_map(
    m: ChannelMap, Z: ComplexLike, guess: Optional[ComplexLike] = None, tol: float = 1e-14, max_iter: int = 50
) -> np.ndarray:
    """W with eval_map(W) = Z by Newton, starting from (Z - u0)/R unless a guess is given"""
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(guess, dtype=complex) if guess is not None else (Z - m.u[0]) / m.R
    for _ in range(max_iter):
        step = (eval_map(m, W) - Z) / eval_map_derivative(m, W)
        W = W - step
        if np.max(np.abs(step)) <= tol * max(1.0, float(np.max(np.abs(W)))):
            return W
    raise NoConvergenceError("Map inversion did not converge", [float(np.max(np.abs(step)))])


def sigma_grid(M: int) -> np.ndarray:
    return 2 * math.pi * np.arange(M) / M


def sample_contour(m: ChannelMap, M: int) -> ContourSample:
    """Interface samples on the uniform sigma grid"""
    sigma = sigma_grid(M)
    W = 1j * sigma
    return ContourSample(sigma=sigma, Z=eval_map(m, W), Zp=eval_map_derivative(m, W))


def derivative_winding(sample: ContourSample) -> int:
    """Winding number of Z'(i sigma) about 0; nonzero iff Z' vanishes inside the half-strip"""
    ratio = np.roll(sample.Zp, -1) / sample.Zp
    return int(round(float(np.sum(np.angle(ratio))) / (2 * math.pi)))


def check_injective(sample: ContourSample, R: float) -> float:
    """
    min |Z'| on the grid

    Raises:
        GeometryError: If |Z'| collapsed to zero on the grid or Z' has a zero
            in the interior (the interface has folded over itself)
    """
    smallest = sample.min_abs_derivative()
    if not smallest > 1e-14 * R:
        raise GeometryError(f"Map lost injectivity: min |Z'| = {smallest:.3e}")
    winding = derivative_winding(sample)
    if winding != 0:
        raise GeometryError(f"Map lost injectivity: Z' winds {winding} times around 0")
    return smallest


def _raw_moments(m: ChannelMap, K: int, M: int) -> tuple:
    """(t0, t[1..K], v[1..K], oint X^2/2 dY) by quadrature on M points"""
    s = sample_contour(m, M)
    R, r0 = m.R, m.r0
    X, dZ = s.X, s.dZ
    dY = dZ.imag

    t0 = s.integrate(X * dY).real / (math.pi * R)
    t = np.empty(K, dtype=complex)
    v = np.empty(K, dtype=complex)
    for k in range(1, K + 1):
        t[k - 1] = r0 ** (-k) / (math.pi * 1j * k * R) * s.integrate(np.exp(-k * s.Z / R) * X * dZ)
        v[k - 1] = r0**k / (math.pi * 1j * R) * s.integrate(np.exp(k * s.Z / R) * X * dZ)
    half_square = s.integrate(X * X / 2 * dY).real
    return t0, t, v, half_square


def v0_from_identity(R: float, r0: float, t0: float, t: np.ndarray, v: np.ndarray) -> complex:
    """(t0^2/2 + 2 R t0 log r0 + sum k t_k v_k) / R over the common index range"""
    n = min(len(t), len(v))
    k = np.arange(1, n + 1)
    total = t0 * t0 / 2 + 2 * R * t0 * math.log(r0) + np.sum(k * t[:n] * v[:n])
    return complex(total) / R


def moments_from_map(
    m: ChannelMap,
    K: Optional[int] = None,
    M: int = 512,
    selftest: bool = True,
    selftest_tol: float = SELFTEST_TOL,
) -> MomentSet:
    """
    Moments t0, t_1..t_K, v_1..v_K, v0 of a channel map

    Args:
        m: The map
        K: Highest moment index (defaults to 2N)
        M: Quadrature points
        selftest: Recompute on 2M points and compare
        selftest_tol: Largest change allowed, relative to max(1, |moment|)

    Raises:
        InvalidArgumentError: If K > 2N or M is too small for K
        ResolutionError: If doubling M changes a moment by more than selftest_tol
    """
    K = 2 * m.N if K is None else K
    if K < 1 or K > max(2 * m.N, 1):
        raise InvalidArgumentError(f"K must lie in 1..{max(2 * m.N, 1)}, got {K}")
    if M < 2 * (K + m.N) + 4:
        raise InvalidArgumentError(f"M={M} too small for K={K}, N={m.N}; need >= {2 * (K + m.N) + 4}")

    t0, t, v, half_square = _raw_moments(m, K, M)
    delta = None
    if selftest:
        t0_f, t_f, v_f, hs_f = _raw_moments(m, K, 2 * M)
        coarse = np.concatenate([[t0, half_square], t, v])
        fine = np.concatenate([[t0_f, hs_f], t_f, v_f])
        delta = float(np.max(np.abs(coarse - fine) / np.maximum(1.0, np.abs(fine))))
        logger.debug(f"Quadrature self-test M={M}: max relative change {delta:.2e}")
        if delta > selftest_tol:
            raise ResolutionError(f"Doubling M={M} changes moments by {delta:.2e} > {selftest_tol:.1e}")

    v0 = v0_from_identity(m.R, m.r0, t0, t[: m.N], v[: m.N])
    v0_quad = 2 * t0 * math.log(m.r0) + 2 / (math.pi * m.R**2) * half_square
    return MomentSet(
        R=m.R,
        r0=m.r0,
        t0=t0,
        t=t,
        v=v,
        v0=v0.real,
        v0_quadrature=v0_quad,
        v0_imag=v0.imag,
        selftest_delta=delta,
    )
