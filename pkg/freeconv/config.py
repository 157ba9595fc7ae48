#config.py
"""
Runtime configuration for the free convolution engine.

Values come from the environment (a local .env file is honoured) and fall
back to the defaults below. Every public function also accepts explicit
keyword arguments which take precedence over these constants.
"""

import os

from dotenv import load_dotenv

load_dotenv()

# ── Subordination solver ─────────────────────────────────────────────────────

TOL = float(os.getenv("FREECONV_TOL", "1e-12"))
MAX_ITER = int(os.getenv("FREECONV_MAX_ITER", "100000"))
STAGNATION_STEPS = 20
NEWTON = os.getenv("FREECONV_NEWTON", "1") not in ("0", "false", "False")

# ── Quadrature ───────────────────────────────────────────────────────────────

QUAD_MIN = int(os.getenv("FREECONV_QUAD_MIN", "64"))
QUAD_MAX = int(os.getenv("FREECONV_QUAD_MAX", "4096"))
QUAD_RTOL = 1e-12
SUPPORT_FLOOR = float(os.getenv("FREECONV_SUPPORT_FLOOR", "1e-12"))
CENTER_TOL = 1e-10

# ── Density / support ────────────────────────────────────────────────────────

ETA_MIN = float(os.getenv("FREECONV_ETA_MIN", "1e-8"))
GRID_N = int(os.getenv("FREECONV_GRID_N", "513"))
EDGE_TOL = 1e-10
BRACKET_WIDTH = 1e-6

# ── Monte Carlo / CLI ────────────────────────────────────────────────────────

SEED = int(os.getenv("FREECONV_SEED", "42"))
THREADS = max(1, int(os.getenv("FREECONV_THREADS", "1")))
LOG_LEVEL = os.getenv("FREECONV_LOG_LEVEL", "INFO")
