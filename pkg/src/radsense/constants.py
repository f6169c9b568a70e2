"""Physical constants shared across the package."""

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact

# Geometric tolerance (m) for plane membership and polygon edge tests.
GEOM_TOL = 1e-9
