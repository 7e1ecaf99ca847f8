"""
exdyn configuration.
Every tunable default lives here; the CLI flags and dataclass defaults read from this module.
"""

import os


def _env_int(name, default):
    return int(os.environ.get(name, default))


# =============================================================================
# FINITE ENGINE
# =============================================================================

# Brute-force oracles (open-set enumeration, tail intersections) refuse bigger spaces
FINITE_SIZE_CAP = _env_int("EXDYN_FINITE_SIZE_CAP", 16)

# Exhaustive verify sweep: all n^n maps for n up to this size
VERIFY_MAX_SIZE = 5
VERIFY_TRIALS = 1000
VERIFY_SEED = 42

# Random non-T1 spaces in the sweep are drawn with sizes in this range
RANDOM_SPACE_SIZES = (2, 6)
RANDOM_RELATION_DENSITY = 0.3   # chance of each extra specialization edge
MONOTONE_MAP_ATTEMPTS = 200     # plain rejection samples before the backtracking search
SWEEP_WORKERS = _env_int("EXDYN_SWEEP_WORKERS", 1)
SWEEP_CHUNK = 256               # instances per worker task

# Periods used for the epsilon(X, P_n) equivariance suite
EQUIVARIANCE_PERIODS = (1, 2, 3)

# Production paths skip the oracle cross-checks unless asked
CROSS_CHECK_ORACLES = False

# =============================================================================
# COMPLEX ENGINE
# =============================================================================

MAX_ITERATIONS = 2000
CAPTURE_RADIUS = 1e-3           # chordal metric
CONFIRM_FACTOR = 3              # confirm_steps = period * CONFIRM_FACTOR
ROOT_TOLERANCE = 1e-10          # residual |h^n(z) - z|
DEDUP_TOLERANCE = 1e-7
MULTIPLIER_TOLERANCE = 1e-9
CAPTURE_SAFETY = 0.49           # shrunk radius = this * minimal chordal gap between cycle points

# Durand-Kerner settings
DEGREE_CAP = _env_int("EXDYN_DEGREE_CAP", 4096)
PERIOD_CAP = _env_int("EXDYN_PERIOD_CAP", 3)
ROOT_MAX_SWEEPS = 500
ROOT_MAX_RESTARTS = 4
ROOT_SEED = 7
NEWTON_POLISH_STEPS = 8

# Parallel row classification
DEFAULT_WORKERS = _env_int("EXDYN_WORKERS", 8)
ROW_CHUNK = 16                  # rows handed to a worker at once

# Default figure window and resolution
DEFAULT_WINDOW = (-2.0, 2.0, -2.0, 2.0)
DEFAULT_GRID = (800, 800)
HISTOGRAM_BINS = 20

# Sphere view: orthographic picture of the Riemann sphere, infinity at the north pole
SPHERE_SIZE = 600
SPHERE_TILT = 60.0              # degrees the north pole is turned from the viewer towards the top
SPHERE_LIMB_DARKENING = 0.65    # brightness lost at the rim of the disk

# =============================================================================
# COLOR SCHEME
# =============================================================================

UNCLASSIFIED_COLOR = (0, 0, 0)          # black: points outside every basin
INFINITY_COLOR = (139, 69, 19)          # brown: basin of infinity
SPHERE_BACKGROUND = (255, 255, 255)     # white: outside the sphere disk

# Hues handed out to the remaining ends, by cycle id then phase
END_COLORS = [
    '#1e938b',      # teal
    '#FFEAA7',      # pale yellow
    '#45B7D1',      # blue
    '#FF6B6B',      # red
    '#96CEB4',      # green
    '#764ba2',      # purple
    '#ffc107',      # amber
    '#667eea',      # indigo
]

# =============================================================================
# SYSTEM CONFIGURATION
# =============================================================================

LOG_LEVEL = os.environ.get("EXDYN_LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Exit codes used by exdyn.py
EXIT_OK = 0
EXIT_THEOREM_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
