"""Moment-conserving Newton continuation for channel Laplacian growth

Unknowns are Re u0 and Re/Im of u1..uN; Im u0 is pinned to the gauge value
(transverse translation symmetry), which leaves 2N+1 real unknowns for the
2N+1 real constraints t0, Re t_k, Im t_k (k = 1..N).

The Jacobian is assembled analytically. Each constraint is
I_k = c_k oint G dsigma with G(Z, Zbar, Z_s) = e^(-kZ/R) X Z_s, X = (Z + Zbar)/2,
Z_s = dZ/dsigma. With E_j = e^(-ij sigma):

    dI/du_j    = c_k oint [G_Z E_j - i j G_{Z_s} E_j]
    dI/dubar_j = c_k oint G_Zbar conj(E_j)
    d/dRe u_j  = d/du_j + d/dubar_j
    d/dIm u_j  = i (d/du_j - d/dubar_j)

t0 is Re I_0 with c_0 = 1/(pi i R).
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.config import SolveConfig
from src.constants import HOMOTOPY_STAGES
from src.errors import GeometryError, InvalidArgumentError, NoConvergenceError, ResolutionError
from src.lgsolve.channel_map import (
    ChannelMap,
    MomentSet,
    check_injective,
    moments_from_map,
    sample_contour,
)
from src.lgsolve.refine import StepRefinementExhausted, retry_with_halving
from src.lgsolve.tau import TauResult, tau_from_map
from src.utils.logging import get_logger

logger = get_logger(__name__)

MAX_BACKTRACKS = 10


def _coefficients(R: float, r0: float, N: int) -> np.ndarray:
    c = np.empty(N + 1, dtype=complex)
    c[0] = 1 / (math.pi * 1j * R)
    for k in range(1, N + 1):
        c[k] = r0 ** (-k) / (math.pi * 1j * k * R)
    return c


def residual_and_jacobian(
    m: ChannelMap, targets: MomentSet, M: int, with_jacobian: bool = True
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Residual [t0 - t0*, Re(t_k - t_k*), Im(t_k - t_k*)] and its Jacobian

    Columns are ordered [Re u0, Re u1..uN, Im u1..uN].
    """
    N, R = m.N, m.R
    s = sample_contour(m, M)
    X, Zs = s.X, s.dZ
    j = np.arange(N + 1)
    E = np.exp(-1j * np.outer(j, s.sigma))
    c = _coefficients(R, m.r0, N)

    values = np.empty(N + 1, dtype=complex)
    jac_re = np.empty((N + 1, N + 1), dtype=complex)
    jac_im = np.empty((N + 1, N + 1), dtype=complex)
    for k in range(N + 1):
        ek = np.exp(-k * s.Z / R)
        values[k] = c[k] * s.integrate(ek * X * Zs)
        if not with_jacobian:
            continue
        g_z = ek * (-k / R * X * Zs + 0.5 * Zs)
        g_zbar = ek * 0.5 * Zs
        g_zs = ek * X
        integrand = (g_z[None, :] - 1j * j[:, None] * g_zs[None, :]) * E
        d_u = c[k] * 2 * math.pi * np.mean(integrand, axis=1)
        d_ubar = c[k] * 2 * math.pi * np.mean(g_zbar[None, :] * np.conj(E), axis=1)
        jac_re[k] = d_u + d_ubar
        jac_im[k] = 1j * (d_u - d_ubar)

    target_t = np.array([targets.tk(k) for k in range(1, N + 1)], dtype=complex)
    r = np.concatenate([[values[0].real - targets.t0], (values[1:] - target_t).real, (values[1:] - target_t).imag])
    if not with_jacobian:
        return r, None

    J = np.zeros((2 * N + 1, 2 * N + 1))
    J[0, 0] = jac_re[0, 0].real
    J[0, 1 : N + 1] = jac_re[0, 1:].real
    J[0, N + 1 :] = jac_im[0, 1:].real
    for k in range(1, N + 1):
        J[k, 0] = jac_re[k, 0].real
        J[k, 1 : N + 1] = jac_re[k, 1:].real
        J[k, N + 1 :] = jac_im[k, 1:].real
        J[N + k, 0] = jac_re[k, 0].imag
        J[N + k, 1 : N + 1] = jac_re[k, 1:].imag
        J[N + k, N + 1 :] = jac_im[k, 1:].imag
    return r, J


def _apply(m: ChannelMap, delta: np.ndarray, gauge: float) -> ChannelMap:
    N = m.N
    u = m.u.copy()
    u[0] = complex(u[0].real + delta[0], gauge)
    u[1:] = u[1:] + delta[1 : N + 1] + 1j * delta[N + 1 :]
    return m.with_u(u)


def _max_abs(r: np.ndarray) -> float:
    return float(np.max(np.abs(r))) if len(r) else 0.0


def _damped_step(
    m: ChannelMap, delta: np.ndarray, norm: float, targets: MomentSet, cfg: SolveConfig, history: List[float]
) -> Tuple[ChannelMap, float]:
    """Backtrack on the Newton direction until the residual drops and the map stays injective"""
    damping = 1.0
    injective_seen = False
    for _ in range(MAX_BACKTRACKS):
        trial = _apply(m, damping * delta, cfg.gauge_im_u0)
        try:
            check_injective(sample_contour(trial, cfg.M), trial.R)
        except GeometryError:
            damping /= 2
            continue
        injective_seen = True
        r_trial, _ = residual_and_jacobian(trial, targets, cfg.M, with_jacobian=False)
        trial_norm = _max_abs(r_trial)
        if trial_norm < norm or (norm <= cfg.newton_tol and trial_norm <= norm):
            return trial, trial_norm
        damping /= 2
    if not injective_seen:
        raise GeometryError(f"Every damped Newton step at t0={targets.t0} loses injectivity")
    if norm <= cfg.newton_tol:
        return m, norm
    raise NoConvergenceError(f"Newton stalled at |r|={norm:.3e} for t0={targets.t0}", history)


def _newton(m: ChannelMap, targets: MomentSet, cfg: SolveConfig) -> ChannelMap:
    """Damped Newton; one polishing step is taken once the tolerance is met"""
    history: List[float] = []
    for iteration in range(cfg.max_iter):
        r, J = residual_and_jacobian(m, targets, cfg.M)
        norm = _max_abs(r)
        history.append(norm)
        logger.debug(f"Newton {iteration}: |r| = {norm:.3e}")
        try:
            delta = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as e:
            raise NoConvergenceError(f"Singular Jacobian at t0={targets.t0}: {e}", history) from e
        trial, _ = _damped_step(m, delta, norm, targets, cfg, history)
        if norm <= cfg.newton_tol:
            return trial
        m = trial
    raise NoConvergenceError(
        f"Newton did not reach {cfg.newton_tol:.1e} in {cfg.max_iter} iterations at t0={targets.t0}",
        history,
    )


def solve_for_moments(
    targets: MomentSet, seed: ChannelMap, cfg: SolveConfig, homotopy: bool = False
) -> ChannelMap:
    """
    Map with moments t0, t_1..t_N equal to the targets

    Args:
        targets: Target t0 and t_k (support <= N)
        seed: Starting map; its Im u0 is replaced by the gauge value
        cfg: Solver settings
        homotopy: Approach the targets through scaled stages from the straight section

    Raises:
        InvalidArgumentError: If the targets need more than N coefficients
        NoConvergenceError: If Newton stalls (residual history attached)
        GeometryError: If every damped step loses injectivity
    """
    N = seed.N
    if targets.support > N:
        raise InvalidArgumentError(f"Targets have support {targets.support} > N={N}")
    cfg.validate(N)
    check_injective(sample_contour(seed, cfg.M), seed.R)

    u = seed.u.copy()
    u[0] = complex(u[0].real, cfg.gauge_im_u0)
    m = seed.with_u(u)
    if not homotopy:
        return _newton(m, targets, cfg)

    for stage in HOMOTOPY_STAGES:
        scaled = MomentSet.targets(
            targets.R, targets.r0, targets.t0, {k: stage * targets.tk(k) for k in range(1, N + 1)}
        )
        m = _newton(m, scaled, cfg)
        logger.debug(f"Homotopy stage {stage}: solved")
    return m


def solve_cold(targets: MomentSet, N: int, cfg: SolveConfig) -> ChannelMap:
    """Solve from the straight section, with homotopy when any t_k is nonzero"""
    seed = ChannelMap.straight(targets.R, targets.r0, N, targets.t0, cfg.gauge_im_u0)
    return solve_for_moments(targets, seed, cfg, homotopy=targets.support > 0)


@dataclass
class TrajectoryStep:
    t0: float
    map: ChannelMap
    moments: MomentSet
    min_abs_zprime: float
    tau: Optional[TauResult] = None
    flags: List[str] = field(default_factory=list)

    def to_record(self) -> dict:
        record = {
            "t0": self.t0,
            **self.map.to_record(),
            "t_k_re": [float(x.real) for x in self.moments.t[: self.map.N]],
            "t_k_im": [float(x.imag) for x in self.moments.t[: self.map.N]],
            "v_k_re": [float(x.real) for x in self.moments.v],
            "v_k_im": [float(x.imag) for x in self.moments.v],
            "v0": self.moments.v0,
            "min_abs_Zprime": self.min_abs_zprime,
            "flags": list(self.flags),
        }
        if self.tau is not None:
            record["F0"] = self.tau.F0
            record["F0_crosscheck"] = self.tau.F0_crosscheck
        return record


@dataclass
class Trajectory:
    """Converged steps of a march in t0, with termination metadata"""

    targets: MomentSet
    steps: List[TrajectoryStep] = field(default_factory=list)
    singular: bool = False
    failure: Optional[str] = None
    cusp_time_estimate: Optional[float] = None
    refinements: int = 0

    @property
    def t0_values(self) -> np.ndarray:
        return np.array([s.t0 for s in self.steps])

    def max_drift(self) -> float:
        """Largest change of any conserved t_k from the first step"""
        if not self.steps:
            return 0.0
        N = self.steps[0].map.N
        first = self.steps[0].moments.t[:N]
        return max(float(np.max(np.abs(s.moments.t[:N] - first))) for s in self.steps)

    def gauge_drift(self) -> float:
        if not self.steps:
            return 0.0
        im0 = self.steps[0].map.u[0].imag
        return max(abs(s.map.u[0].imag - im0) for s in self.steps)

    def summary(self) -> dict:
        return {
            "steps": len(self.steps),
            "t0_first": self.steps[0].t0 if self.steps else None,
            "t0_last": self.steps[-1].t0 if self.steps else None,
            "max_tk_drift": self.max_drift(),
            "gauge_drift": self.gauge_drift(),
            "singular": self.singular,
            "failure": self.failure,
            "cusp_time_estimate": self.cusp_time_estimate,
            "refinements": self.refinements,
        }


def _record(m: ChannelMap, t0: float, cfg: SolveConfig) -> TrajectoryStep:
    moments = moments_from_map(m, K=2 * m.N, M=cfg.M, selftest_tol=cfg.selftest_tol)
    smallest = sample_contour(m, cfg.M).min_abs_derivative()
    tau = tau_from_map(m, M=cfg.M, tau_tol=cfg.tau_tol, moments=moments, strict=False)
    flags = []
    if tau.discrepancy > cfg.tau_tol:
        flags.append("tau_mismatch")
    if smallest < cfg.cusp_threshold * m.R:
        flags.append("cusp")
    return TrajectoryStep(t0=t0, map=m, moments=moments, min_abs_zprime=smallest, tau=tau, flags=flags)


def estimate_cusp_time(steps: List[TrajectoryStep]) -> Optional[float]:
    """Zero of min|Z'|^2, extrapolated linearly from the last two steps"""
    if len(steps) < 2:
        return None
    a, b = steps[-2], steps[-1]
    ya, yb = a.min_abs_zprime**2, b.min_abs_zprime**2
    if yb >= ya or b.t0 == a.t0:
        return None
    return b.t0 + yb * (b.t0 - a.t0) / (ya - yb)


def evolve(
    targets: MomentSet,
    t0_range: Tuple[float, float],
    cfg: SolveConfig,
    N: int,
    seed: Optional[ChannelMap] = None,
) -> Trajectory:
    """
    March t0 over a range with t_k held fixed

    Each step reseeds Newton from the previous map; failed steps are retried
    with halved step sizes. The march stops with ``singular`` set once
    min|Z'| drops below cfg.cusp_threshold * R, or when refinement is
    exhausted within two steps of the extrapolated cusp time.

    Raises:
        Exception: Whatever the initial solve raises
    """
    start, end = t0_range
    cfg.validate(N)
    direction = 1.0 if end >= start else -1.0
    base_step = direction * cfg.dt0

    first = targets.with_t0(start)
    m = solve_for_moments(first, seed, cfg) if seed is not None else solve_cold(first, N, cfg)
    trajectory = Trajectory(targets=targets)
    logger.info(f"Evolving N={N} from t0={start} to t0={end} with dt0={cfg.dt0}")

    def count_refinement(halving: int, step: float, error: Exception) -> None:
        trajectory.refinements += 1

    t0 = start
    try:
        trajectory.steps.append(_record(m, t0, cfg))
    except ResolutionError as e:
        trajectory.failure = str(e)
        return trajectory

    while direction * (end - t0) > 1e-15 * max(1.0, abs(end)):
        if "cusp" in trajectory.steps[-1].flags:
            trajectory.singular = True
            break
        remaining = end - t0
        step0 = base_step if abs(base_step) < abs(remaining) else remaining
        previous = m

        def attempt(step: float) -> ChannelMap:
            return solve_for_moments(targets.with_t0(t0 + step), previous, cfg)

        try:
            m, used = retry_with_halving(attempt, step0, cfg.max_halvings, on_retry=count_refinement)
            t0 = t0 + used
            trajectory.steps.append(_record(m, t0, cfg))
        except (StepRefinementExhausted, ResolutionError) as e:
            trajectory.failure = str(e)
            estimate = estimate_cusp_time(trajectory.steps)
            if estimate is not None and abs(estimate - t0) <= 2 * cfg.dt0:
                trajectory.singular = True
            logger.warning(f"March stopped at t0={t0}: {e}")
            break

    trajectory.cusp_time_estimate = estimate_cusp_time(trajectory.steps)
    if trajectory.steps and "cusp" in trajectory.steps[-1].flags:
        trajectory.singular = True
    logger.info(
        f"Evolution finished: {len(trajectory.steps)} steps, singular={trajectory.singular}, "
        f"t_k drift {trajectory.max_drift():.2e}"
    )
    return trajectory
