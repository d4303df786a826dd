"""Numerical defaults shared across the solver modules."""

from typing import Final

# Luxemburg norm bisection
LUXEMBURG_RTOL: Final[float] = 1e-12
LUXEMBURG_FLOOR: Final[float] = 1e-300

# p* stand-in where p(x) >= N
SOBOLEV_SENTINEL: Final[float] = 1e9
EXPONENT_MARGIN: Final[float] = 1e-3

# Gradient regularization |grad u| -> sqrt(|grad u|^2 + eps^2)
GRADIENT_EPS: Final[float] = 1e-12

# Primitive quadrature
SIMPSON_ATOL: Final[float] = 1e-10
SIMPSON_RTOL: Final[float] = 1e-12
SIMPSON_START_PANELS: Final[int] = 16
SIMPSON_MAX_PANELS: Final[int] = 1 << 14

# Hypothesis sampling
LARGE_T_SAMPLES: Final[tuple[float, ...]] = (1e1, 1e2, 1e3, 1e4, 1e5, 1e6)
H1_M_CANDIDATES: Final[tuple[float, ...]] = (1.0, 5.0, 10.0, 50.0)
H0_T_MIN: Final[float] = 1e-6
H0_T_MAX: Final[float] = 1e6
H0_COARSE_SAMPLES: Final[int] = 96
H0_GROWTH_LIMIT: Final[float] = 0.05
H2_DECADES: Final[int] = 8
H2_THRESHOLD: Final[float] = 1e-3
H3_RTOL: Final[float] = 1e-12
AR_THETA_OFFSETS: Final[tuple[float, ...]] = (0.1, 0.25, 0.5, 1.0, 2.0)
AR_RTOL: Final[float] = 1e-12
V_RADIAL_DOUBLINGS: Final[int] = 6
V_GROWTH_FACTOR: Final[float] = 100.0

# Mountain-pass solver
PATH_POINTS: Final[int] = 41
ARMIJO_C1: Final[float] = 1e-4
ARMIJO_SHRINK: Final[float] = 0.5
ARMIJO_INITIAL_STEP: Final[float] = 1.0
ARMIJO_MAX_BACKTRACKS: Final[int] = 40
CERAMI_TOL: Final[float] = 1e-6
MAX_OUTER_ITERATIONS: Final[int] = 5000
ENDPOINT_DOUBLINGS: Final[int] = 60
LOG_EVERY: Final[int] = 25

# Geometry checks
MP_DELTA0: Final[float] = 1e-6
BLOWDOWN_FLOOR: Final[float] = -1e3
BLOWDOWN_MAX_DOUBLINGS: Final[int] = 60
BLOWDOWN_CONFIRM: Final[int] = 3
CERAMI_BOUND_FACTOR: Final[float] = 10.0

# Decay study
DECAY_THRESHOLD: Final[float] = 1e-3

# Multiplicity
MIN_CONE_CELLS: Final[int] = 3
BETA_ASCENT_STEPS: Final[int] = 200
