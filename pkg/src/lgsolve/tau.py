"""Tau-function of a channel map from its moments

Primary value (finite form, all sums finite for finite-support t):

    F0 = t0^3/(6R) + t0^2 log r0 + 1/2 sum (t_k v_k + c.c.)
         - 1/(4R) sum_{k,l} [k l t_k t_l v_{k+l} + (k+l) t_{k+l} v_k v_l]

Cross-check from the area form, with the area integral of X^2 over the
region between X = 0 and the interface reduced to oint X^3/3 dY:

    2 F0 = -(2/(pi R^2)) oint X^3/3 dY + t0 v0 + sum (t_k v_k + c.c.)

A third value uses the unreduced moment form with the cutoff-integral v0.
"""

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from src.constants import TAU_TOL
from src.errors import ConsistencyError, InvalidArgumentError
from src.lgsolve.channel_map import ChannelMap, MomentSet, moments_from_map, sample_contour
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class TauResult:
    F0: float
    F0_crosscheck: float
    F0_cutoff: Optional[float]
    discrepancy: float
    imag_linear: float
    imag_quadratic: float

    def to_dict(self) -> dict:
        return asdict(self)


def quadratic_sum(moments: MomentSet, N: int) -> complex:
    """sum_{k,l>=1} [k l t_k t_l v_{k+l} + (k+l) t_{k+l} v_k v_l] over t_k with k <= N"""
    total = 0j
    for k in range(1, N + 1):
        tk = moments.tk(k)
        for l in range(1, N + 1):
            total += k * l * tk * moments.tk(l) * moments.vk(k + l)
            if k + l <= N:
                total += (k + l) * moments.tk(k + l) * moments.vk(k) * moments.vk(l)
    return total


def linear_sum(moments: MomentSet, N: int, weighted: bool = False) -> complex:
    """sum t_k v_k (or sum k t_k v_k when weighted) over k <= N"""
    return sum((k if weighted else 1) * moments.tk(k) * moments.vk(k) for k in range(1, N + 1))


def tau_from_moments(moments: MomentSet, N: int) -> float:
    """Primary finite form of F0"""
    R, t0 = moments.R, moments.t0
    lin = linear_sum(moments, N)
    quad = quadratic_sum(moments, N)
    return t0**3 / (6 * R) + t0 * t0 * math.log(moments.r0) + lin.real - quad.real / (4 * R)


def tau_from_map(
    m: ChannelMap,
    M: int = 512,
    tau_tol: float = TAU_TOL,
    moments: Optional[MomentSet] = None,
    strict: bool = True,
) -> TauResult:
    """
    F0 of a channel map with its area-form cross-check

    Args:
        m: Converged map
        M: Quadrature points
        tau_tol: Allowed relative discrepancy between the two forms
        moments: Precomputed moments up to 2N (computed if omitted)
        strict: Raise on discrepancy instead of only reporting it

    Raises:
        ConsistencyError: If strict and the forms disagree beyond tau_tol
    """
    N = m.N
    if moments is None:
        moments = moments_from_map(m, K=2 * N, M=M)
    if len(moments.v) < 2 * N:
        raise InvalidArgumentError(f"tau needs v_k up to k={2 * N}, have {len(moments.v)}")

    R, t0 = m.R, moments.t0
    lin = linear_sum(moments, N)
    weighted = linear_sum(moments, N, weighted=True)
    quad = quadratic_sum(moments, N)
    primary = tau_from_moments(moments, N)

    s = sample_contour(m, M)
    cube = s.integrate(s.X**3 / 3 * s.dZ.imag).real
    cross = 0.5 * (-2 / (math.pi * R * R) * cube + t0 * moments.v0 + 2 * lin.real)

    cutoff = None
    if moments.v0_quadrature is not None:
        cutoff = 0.5 * (
            t0 * moments.v0_quadrature
            + 2 * lin.real
            - t0**3 / (6 * R)
            - t0 / R * weighted.real
            - quad.real / (2 * R)
        )

    discrepancy = abs(primary - cross) / max(1.0, abs(primary))
    result = TauResult(
        F0=primary,
        F0_crosscheck=cross,
        F0_cutoff=cutoff,
        discrepancy=discrepancy,
        imag_linear=float(abs(np.imag(weighted))),
        imag_quadratic=float(abs(np.imag(quad))),
    )
    logger.debug(f"tau at t0={t0:.6g}: F0={primary:.12g} cross={cross:.12g} rel={discrepancy:.2e}")
    if strict and discrepancy > tau_tol:
        raise ConsistencyError(
            f"Tau forms disagree at t0={t0}: {primary} vs {cross} (relative {discrepancy:.2e})"
        )
    return result
