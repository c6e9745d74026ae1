"""Trajectory design in the Earth-Moon system.

Generates periodic orbits and invariant manifolds in the circular
restricted three-body problem and transitions them into an ephemeris
model by fixed-time multiple shooting, solved with either a minimum-norm
update or a Levenberg-Marquardt scheme with proximity weighting and
adaptive annealing.
"""

__version__ = "0.1.0"

from .cr3bp import Cr3bpSystem, earth_moon
from .integrate import IntegratorConfig, Trajectory
from .states import Frame, State6, Units

__all__ = [
    "Cr3bpSystem",
    "earth_moon",
    "IntegratorConfig",
    "Trajectory",
    "Frame",
    "State6",
    "Units",
    "__version__",
]
