"""Centralized configuration constants for the AEOS monitoring scheduler.

Physical constants, the reference experiment set-up (constellation, payload,
energy and onboard-processing parameters), geometry scan settings and runtime
settings read from the environment all live here so they can be adjusted in
one place.
"""

import math
import os

from dotenv import load_dotenv

load_dotenv()

# ---------------------------------------------------------------------------
# Physical constants
# ---------------------------------------------------------------------------

EARTH_RADIUS_M = 6_371_000.0
EARTH_MU_M3_S2 = 3.986004418e14
EARTH_ROTATION_RAD_S = 7.2921159e-5
SPEED_OF_LIGHT_M_S = 2.998e8

# ---------------------------------------------------------------------------
# Reference constellation
# ---------------------------------------------------------------------------

N_PLANES = 4
SATS_PER_PLANE = 2
ALTITUDE_M = 600_000.0
INCLINATION_RAD = math.radians(53.0)
TOPOLOGY = "WalkerDelta"
PHASING_FACTOR = 0

# ---------------------------------------------------------------------------
# Reference satellite (payload, CPU, energy)
# ---------------------------------------------------------------------------

MAX_ROLL_RAD = math.radians(45.0)
MAX_PITCH_RAD = math.radians(45.0)
MAX_YAW_RAD = math.radians(90.0)
N_CORES = 8
CPU_FREQ_HZ = 1.8e9
GSD_NADIR_M_PER_PX = 0.5
SWATH_NADIR_M = 5_000.0
PIXEL_DEPTH_BITS = 11
E_OBS_PER_S = 2.0
E_PROC_PER_S = 2.0
E_TRAN_PER_S = 2.0
E_MAX = 5_000.0
COMPRESSION_FACTOR = 10.0
CYCLES_PER_BIT = 100.0
DOWNLINK_RATE_BPS = 100e6  # not given by the reference set-up

# ---------------------------------------------------------------------------
# Targets and horizon
# ---------------------------------------------------------------------------

OBS_DURATION_RANGE_S = (1.0, 5.0)
N_STP = 10
STH_ORBITAL_PERIODS = 10
OTW_STEP_S = 10.0
STP_SPLIT_TOLERANCE_S = 1.0
STP_BOUNDARY_EPS = 1e-9  # in STP lengths

# ---------------------------------------------------------------------------
# Ground segment
# ---------------------------------------------------------------------------

DEFAULT_MIN_ELEVATION_RAD = math.radians(5.0)

# ---------------------------------------------------------------------------
# Geometry scanning
# ---------------------------------------------------------------------------

GEOMETRY_SCAN_STEP_S = 1.0
BISECTION_TOLERANCE_S = 0.1
GEOMETRY_TARGET_CHUNK = 64  # targets per vectorised block

# ---------------------------------------------------------------------------
# Scheduling
# ---------------------------------------------------------------------------

PROFIT_IMPROVEMENT_EPS = 1e-12
NADIR_ATTITUDE = (0.0, 0.0, 0.0)

# ---------------------------------------------------------------------------
# Persistence / reporting
# ---------------------------------------------------------------------------

SCENARIO_SCHEMA_VERSION = 1
REPORT_SCHEMA_VERSION = 1
REPORT_SIGNIFICANT_DIGITS = 6

# ---------------------------------------------------------------------------
# Runtime settings (environment)
# ---------------------------------------------------------------------------

LOG_LEVEL = os.getenv("AEOS_LOG_LEVEL", "INFO").upper()
DATA_DIR = os.getenv("AEOS_DATA_DIR", "data")
RESULTS_DB = os.getenv("AEOS_RESULTS_DB", os.path.join(DATA_DIR, "results.db"))
