"""Configuration management for the application"""

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, Optional

from dotenv import dotenv_values, load_dotenv

from src.constants import (
    CUSP_THRESHOLD,
    DEFAULT_BUDGET,
    DEFAULT_DT0,
    DEFAULT_HURWITZ_METHOD,
    DEFAULT_M,
    DEFAULT_N,
    DEFAULT_R,
    DEFAULT_R0,
    ENV_BUDGET,
    FD_STEP,
    HURWITZ_METHODS,
    MAX_HALVINGS,
    NEWTON_MAX_ITER,
    NEWTON_TOL,
    RICHARDSON_TOL,
    SELFTEST_TOL,
    TAU_TOL,
)
from src.errors import InvalidArgumentError
from src.lgsolve.channel_map import MomentSet


@dataclass
class HurwitzConfig:
    """Budget and counting method for Hurwitz enumeration"""

    budget: int = DEFAULT_BUDGET
    method: str = DEFAULT_HURWITZ_METHOD

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise InvalidArgumentError(f"Budget must be positive, got {self.budget}")
        if self.method not in HURWITZ_METHODS:
            raise InvalidArgumentError(f"Unknown method {self.method!r}; expected one of {HURWITZ_METHODS}")

    @classmethod
    def from_env(cls, env_file: Optional[str] = None) -> "HurwitzConfig":
        """Load the budget from CHANNEL_TAU_BUDGET"""
        if env_file:
            load_dotenv(env_file)
        raw = os.environ.get(ENV_BUDGET)
        if raw is None:
            return cls()
        try:
            return cls(budget=int(raw))
        except ValueError as e:
            raise InvalidArgumentError(f"{ENV_BUDGET} must be an integer, got {raw!r}") from e

    @classmethod
    def from_args(cls, args) -> "HurwitzConfig":
        """Command line flags override the environment"""
        config = cls.from_env(getattr(args, "env_file", None))
        if getattr(args, "budget", None):
            config.budget = int(args.budget)
        if getattr(args, "method", None):
            config.method = args.method
        config.__post_init__()
        return config


@dataclass
class SolveConfig:
    """Numerical settings for moment-conserving continuation"""

    M: int = DEFAULT_M
    newton_tol: float = NEWTON_TOL
    max_iter: int = NEWTON_MAX_ITER
    dt0: float = DEFAULT_DT0
    gauge_im_u0: float = 0.0
    cusp_threshold: float = CUSP_THRESHOLD
    fd_step: float = FD_STEP
    richardson_tol: float = RICHARDSON_TOL
    selftest_tol: float = SELFTEST_TOL
    tau_tol: float = TAU_TOL
    max_halvings: int = MAX_HALVINGS

    def validate(self, N: int) -> "SolveConfig":
        """
        Check the settings against a truncation order

        Raises:
            InvalidArgumentError: On the first violated constraint
        """
        if self.M < 4 or self.M & (self.M - 1):
            raise InvalidArgumentError(f"M must be a power of two, got {self.M}")
        if self.M < 4 * N + 4:
            raise InvalidArgumentError(f"M={self.M} must be >= 4N+4 = {4 * N + 4}")
        if self.newton_tol <= 0:
            raise InvalidArgumentError(f"newton_tol must be positive, got {self.newton_tol}")
        if self.max_iter < 1:
            raise InvalidArgumentError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.dt0 <= 0:
            raise InvalidArgumentError(f"dt0 must be positive, got {self.dt0}")
        if self.fd_step <= 0:
            raise InvalidArgumentError(f"fd_step must be positive, got {self.fd_step}")
        if self.max_halvings < 0:
            raise InvalidArgumentError(f"max_halvings must be >= 0, got {self.max_halvings}")
        return self


def parse_targets(raw: str) -> Dict[int, complex]:
    """Parse "k:re:im,k:re:im" into {k: t_k}"""
    targets: Dict[int, complex] = {}
    for item in filter(None, (part.strip() for part in raw.split(","))):
        pieces = item.split(":")
        if len(pieces) != 3:
            raise InvalidArgumentError(f"Target {item!r} is not of the form k:re:im")
        try:
            k = int(pieces[0])
            value = complex(float(pieces[1]), float(pieces[2]))
        except ValueError as e:
            raise InvalidArgumentError(f"Target {item!r} is not numeric") from e
        if k < 1:
            raise InvalidArgumentError(f"Target index must be >= 1, got {k}")
        targets[k] = value
    return targets


def format_targets(targets: Dict[int, complex]) -> str:
    return ",".join(f"{k}:{v.real!r}:{v.imag!r}" for k, v in sorted(targets.items()))


_SOLVE_KEYS = {f.name for f in fields(SolveConfig)}
_INT_KEYS = {"N", "M", "max_iter", "max_halvings"}


@dataclass
class ChannelConfig:
    """A channel run: geometry, conserved targets, time range and solver settings"""

    R: float = DEFAULT_R
    r0: float = DEFAULT_R0
    N: int = DEFAULT_N
    t0_start: float = 0.0
    t0_end: float = 0.0
    targets: Dict[int, complex] = field(default_factory=dict)
    solve: SolveConfig = field(default_factory=SolveConfig)

    def validate(self) -> "ChannelConfig":
        if self.R <= 0:
            raise InvalidArgumentError(f"R must be positive, got {self.R}")
        if self.r0 <= 0:
            raise InvalidArgumentError(f"r0 must be positive, got {self.r0}")
        if self.N < 1:
            raise InvalidArgumentError(f"N must be >= 1, got {self.N}")
        too_high = [k for k in self.targets if k > self.N]
        if too_high:
            raise InvalidArgumentError(f"Targets {too_high} exceed truncation N={self.N}")
        self.solve.validate(self.N)
        return self

    @classmethod
    def from_file(cls, path: Path) -> "ChannelConfig":
        """
        Load a plain key=value config file

        Raises:
            FileNotFoundError: If the file does not exist
            InvalidArgumentError: On unknown keys or malformed values
        """
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        return cls.from_mapping(dotenv_values(path))

    @classmethod
    def from_mapping(cls, values: Dict[str, Optional[str]]) -> "ChannelConfig":
        config = cls()
        for key, raw in values.items():
            if raw is None:
                continue
            config.set(key, raw)
        return config.validate()

    def set(self, key: str, raw: str) -> None:
        """Assign one config key from its string form"""
        try:
            if key == "targets":
                self.targets = parse_targets(raw)
            elif key in ("R", "r0", "t0_start", "t0_end"):
                setattr(self, key, float(raw))
            elif key == "N":
                self.N = int(raw)
            elif key in _SOLVE_KEYS:
                setattr(self.solve, key, int(raw) if key in _INT_KEYS else float(raw))
            else:
                raise InvalidArgumentError(f"Unknown config key {key!r}")
        except ValueError as e:
            if isinstance(e, InvalidArgumentError):
                raise
            raise InvalidArgumentError(f"Bad value for {key}: {raw!r}") from e

    @classmethod
    def from_args(cls, args) -> "ChannelConfig":
        """Config file (if any) overlaid with command line flags"""
        config_path = getattr(args, "config", None)
        config = cls.from_file(Path(config_path)) if config_path else cls()
        for key in ("R", "r0", "N", "M", "dt0", "t0_start", "t0_end"):
            value = getattr(args, key, None)
            if value is not None:
                config.set(key, str(value))
        if getattr(args, "targets", None):
            config.targets = parse_targets(args.targets)
        return config.validate()

    def target_moments(self, t0: Optional[float] = None) -> MomentSet:
        return MomentSet.targets(self.R, self.r0, self.t0_start if t0 is None else t0, self.targets)

    def to_dict(self) -> dict:
        """Snapshot for manifests; targets in their file syntax"""
        data = asdict(self)
        data["targets"] = format_targets(self.targets)
        return data
