"""Physical constants shared across the simulator.

Values are fixed here so every numeric result is bit-reproducible.
"""

SPEED_OF_LIGHT = 299_792_458.0  # m/s
MU_EARTH = 3.986004418e14  # m^3/s^2, Earth gravitational parameter
R_EARTH = 6_371_000.0  # m, spherical Earth radius

LEO_ALT_MIN = 160e3  # m
LEO_ALT_MAX = 2_000e3  # m
