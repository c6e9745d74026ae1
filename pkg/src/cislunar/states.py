"""Tagged six-component spacecraft states.

A state is only meaningful together with its reference frame and unit
system, so the two are carried as a pair and validated on construction:
synodic states are nondimensional (DU, VU) and inertial states are
dimensional (km, km/s). Mixing the tags is a constructor error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Frame(str, Enum):
    SYNODIC = "synodic"
    INERTIAL = "inertial"


class Units(str, Enum):
    NONDIM = "nondim"
    KM = "km"


_ALLOWED = {(Frame.SYNODIC, Units.NONDIM), (Frame.INERTIAL, Units.KM)}


@dataclass(frozen=True)
class State6:
    """Position/velocity pair with frame and unit tags."""

    r: np.ndarray
    v: np.ndarray
    frame: Frame
    units: Units = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).reshape(3)
        v = np.asarray(self.v, dtype=float).reshape(3)
        r.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "v", v)
        frame = Frame(self.frame)
        object.__setattr__(self, "frame", frame)
        units = self.units
        if units is None:
            units = Units.NONDIM if frame is Frame.SYNODIC else Units.KM
        units = Units(units)
        object.__setattr__(self, "units", units)
        if (frame, units) not in _ALLOWED:
            raise ValueError(
                f"frame {frame.value!r} cannot be paired with units {units.value!r}"
            )
        if not (np.isfinite(r).all() and np.isfinite(v).all()):
            raise ValueError("state components must be finite")

    @classmethod
    def synodic(cls, r, v) -> "State6":
        return cls(r, v, Frame.SYNODIC, Units.NONDIM)

    @classmethod
    def inertial(cls, r, v) -> "State6":
        return cls(r, v, Frame.INERTIAL, Units.KM)

    @classmethod
    def from_array(cls, y, frame: Frame) -> "State6":
        y = np.asarray(y, dtype=float).reshape(6)
        return cls(y[:3], y[3:], frame)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.r, self.v])
