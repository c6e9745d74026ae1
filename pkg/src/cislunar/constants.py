"""Physical constants shared across the dynamical models.

Gravitational parameters are standard point-mass values in km^3/s^2. The
Earth-Moon characteristic constants derived from them (see
:func:`cislunar.cr3bp.earth_moon`) are documented defaults and can be
overridden by constructing a custom system.
"""

import math

GM_EARTH = 398600.4418  # km^3/s^2
GM_MOON = 4902.800066  # km^3/s^2
GM_SUN = 1.32712440018e11  # km^3/s^2

EARTH_MOON_AXIS_KM = 384400.0
SUN_EARTH_AXIS_KM = 1.496e8

MOON_ECCENTRICITY = 0.0549
SUN_ECCENTRICITY = 0.0167
MOON_INCLINATION_RAD = math.radians(5.145)

# All epochs in this package are seconds past this instant (UTC).
EPOCH_ZERO_ISO = "2020-01-01T00:00:00"
