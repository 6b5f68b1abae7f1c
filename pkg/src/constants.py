"""Application constants and configuration defaults"""

from typing import Tuple

# Hurwitz enumeration
DEFAULT_BUDGET = 10**9  # elementary steps
HURWITZ_METHODS: Tuple[str, ...] = ("dynamic", "enumerate")
DEFAULT_HURWITZ_METHOD = "dynamic"
DEFAULT_SERIES_DEGREE = 4
LONG_SERIES_DEGREE = 5

# Lambert evaluation
LAMBERT_RTOL = 1e-14
LAMBERT_MAX_ITER = 100
LAMBERT_SERIES_THRESHOLD = 1e-4  # x^2 below this uses the series
LAMBERT_SERIES_TERMS = 8
BRANCH_POINT_WINDOW = 1e-2  # 1 - e*x^2 below this seeds from the branch expansion

# Finite differences
FD_STEP = 1e-4
NEAR_CRITICAL_FACTOR = 10.0  # lambda <= 1 - factor*h for FD stencils
RICHARDSON_TOL = 1e-3

# Channel solver
DEFAULT_R = 1.0
DEFAULT_R0 = 1.0
DEFAULT_N = 12
DEFAULT_M = 512
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 30
DEFAULT_DT0 = 1e-3
CUSP_THRESHOLD = 1e-3  # times R
SELFTEST_TOL = 1e-10
TAU_TOL = 1e-6
MAX_HALVINGS = 6
HOMOTOPY_STAGES: Tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
RECONSTRUCTION_DEPTH = 1.0  # Re W of interior sample points
DARCY_TOL = 1e-4
GRADIENT_TOL = 1e-5
TODA_TOL = 1e-6
TODA_LAMBDAS: Tuple[float, ...] = (0.1, 0.3, 0.5)

# Default trochoid run
DEFAULT_KAPPA = 0.3
DEFAULT_Y0 = 0.0
TROCHOID_END_FRACTION = 0.9  # of t_c
TROCHOID_GRID_POINTS = 10
CONTOUR_POINTS = 256
BRIDGE_ORDER = 6
DEFAULT_HIROTA_ORDER = 3
SHORT_MAX_STEPS = 10_000  # evolutions beyond this need --long

# Output
DEFAULT_OUT_DIR = "out"

# Exit codes
EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_FAILURE = 2

# Environment
ENV_BUDGET = "CHANNEL_TAU_BUDGET"
ENV_LONG_TESTS = "CHANNEL_TAU_LONG_TESTS"
