"""Transformations between the barycentric synodic frame and the
Earth-centered inertial frame, plus the time correspondence between the
two dynamical models.

The instantaneous frame is built from the Moon's Earth-relative state:
x along the Earth-Moon line, z along the orbital angular momentum. Frame
rates come analytically from the provider's acceleration when available
(exact for Keplerian and Hermite-table providers) or from central
differences with a configurable step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cr3bp import Cr3bpSystem
from .ephemeris import BodyId, numeric_rate
from .integrate import IntegratorConfig, propagate
from .states import Frame, State6

DEGENERATE_MOMENTUM = 1e-8  # km^2/s
DEFAULT_FD_STEP = 10.0  # s


class DegenerateFrameError(ValueError):
    """The lunar state does not define a rotating frame (rectilinear orbit)."""


@dataclass(frozen=True)
class FrameSample:
    """Instantaneous rotation, rates, scale, and barycenter state at epoch t."""

    R: np.ndarray
    Rdot: np.ndarray
    d: float
    ddot: float
    rb: np.ndarray
    vb: np.ndarray
    t: float

    def __post_init__(self):
        r = np.asarray(self.R, dtype=float)
        if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-12:
            raise ValueError("rotation columns are not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > 1e-12:
            raise ValueError("rotation must be proper (det +1)")
        if self.d <= 0.0:
            raise ValueError("Earth-Moon distance must be positive")


def _axes(r_m: np.ndarray, v_m: np.ndarray):
    d = float(np.linalg.norm(r_m))
    x0 = r_m / d
    h = np.cross(r_m, v_m)
    hn = float(np.linalg.norm(h))
    if hn < DEGENERATE_MOMENTUM:
        raise DegenerateFrameError("lunar angular momentum too small to define the frame")
    z0 = h / hn
    y0 = -np.cross(x0, z0)
    return x0, y0, z0, d, h, hn


def frame_sample(t: float, provider, sys: Cr3bpSystem,
                 rate_mode: str = "auto", fd_step: float = DEFAULT_FD_STEP) -> FrameSample:
    """Build the frame at epoch t.

    rate_mode "auto" uses the provider's analytic acceleration for Rdot and
    ddot when it exposes one; "fd" forces central differences of step
    fd_step seconds.
    """
    r_m, v_m = provider.body_state(BodyId.MOON, t)
    x0, y0, z0, d, h, hn = _axes(r_m, v_m)
    rot = np.column_stack([x0, y0, z0])
    rb = sys.mu * r_m
    vb = sys.mu * v_m

    analytic = rate_mode == "auto" and hasattr(provider, "body_acceleration")
    if rate_mode not in ("auto", "fd"):
        raise ValueError(f"unknown rate_mode {rate_mode!r}")
    if analytic:
        a_m = provider.body_acceleration(BodyId.MOON, t)
        ddot = float(r_m @ v_m) / d
        x0dot = (v_m - x0 * ddot) / d
        hdot = np.cross(r_m, a_m)
        z0dot = (hdot - z0 * float(z0 @ hdot)) / hn
        y0dot = -(np.cross(x0dot, z0) + np.cross(x0, z0dot))
        rdot = np.column_stack([x0dot, y0dot, z0dot])
    else:
        def rot_of(tt):
            rr, vv = provider.body_state(BodyId.MOON, tt)
            xx, yy, zz, _, _, _ = _axes(rr, vv)
            return np.column_stack([xx, yy, zz])

        rdot = numeric_rate(rot_of, t, fd_step)
        ddot = float(numeric_rate(
            lambda tt: np.linalg.norm(provider.body_state(BodyId.MOON, tt)[0]), t, fd_step))
    return FrameSample(R=rot, Rdot=rdot, d=d, ddot=ddot, rb=rb, vb=vb, t=t)


def time_rate(t: float, provider, sys: Cr3bpSystem) -> float:
    """d(ttilde)/dt with both times in TU: sqrt(gm_total / d^3) * char_time."""
    r_m, _ = provider.body_state(BodyId.MOON, t)
    d = float(np.linalg.norm(r_m))
    return math.sqrt(sys.gm_total / d**3) * sys.char_time


def map_relative_time(ttilde: float, tau_s: float, provider, sys: Cr3bpSystem,
                      cfg: IntegratorConfig | None = None) -> float:
    """Map a synodic-model relative time (TU) to model time (TU) past tau_s.

    Integrates dt/dttilde = sqrt(d(tau_s + t * char_time)^3 / gm_total) /
    char_time from t(0) = 0. The distance lookup uses dimensional epochs.
    """
    if ttilde == 0.0:
        return 0.0
    cfg = cfg or IntegratorConfig()

    def rhs(s, y):
        epoch = tau_s + y[0] * sys.char_time
        r_m, _ = provider.body_state(BodyId.MOON, epoch)
        d = float(np.linalg.norm(r_m))
        return np.array([math.sqrt(d**3 / sys.gm_total) / sys.char_time])

    return float(propagate(rhs, np.array([0.0]), 0.0, ttilde, cfg)[0])


def map_relative_times(ttildes, tau_s: float, provider, sys: Cr3bpSystem,
                       cfg: IntegratorConfig | None = None) -> np.ndarray:
    """Cumulative form of map_relative_time over a sorted grid of times."""
    ttildes = np.asarray(ttildes, dtype=float)
    if ttildes.size and not np.all(np.diff(ttildes) > 0):
        raise ValueError("relative times must be strictly increasing")
    cfg = cfg or IntegratorConfig()
    out = np.empty_like(ttildes)
    t_acc = 0.0
    prev = 0.0
    for i, tt in enumerate(ttildes):
        if tt != prev:
            def rhs(s, y, _t0=t_acc):
                epoch = tau_s + y[0] * sys.char_time
                r_m, _ = provider.body_state(BodyId.MOON, epoch)
                d = float(np.linalg.norm(r_m))
                return np.array([math.sqrt(d**3 / sys.gm_total) / sys.char_time])

            t_acc = float(propagate(rhs, np.array([t_acc]), prev, tt, cfg)[0])
            prev = tt
        out[i] = t_acc
    return out


def synodic_to_inertial(state: State6, t: float, sys: Cr3bpSystem, provider,
                        rate_mode: str = "auto", fd_step: float = DEFAULT_FD_STEP) -> State6:
    """Nondimensional synodic state to dimensional inertial state at epoch t.

    The velocity transform includes the time-rate factor so the output is a
    derivative with respect to model time.
    """
    if state.frame is not Frame.SYNODIC:
        raise ValueError("expected a synodic-frame state")
    fs = frame_sample(t, provider, sys, rate_mode, fd_step)
    rate = time_rate(t, provider, sys)
    r_rot = fs.R @ state.r
    r_in = fs.rb + fs.d * r_rot
    v_in = (fs.vb + fs.ddot * r_rot + fs.d * (fs.Rdot @ state.r)
            + (fs.d / sys.char_length) * rate * sys.char_velocity * (fs.R @ state.v))
    return State6.inertial(r_in, v_in)


def inertial_to_synodic(state: State6, t: float, sys: Cr3bpSystem, provider,
                        rate_mode: str = "auto", fd_step: float = DEFAULT_FD_STEP) -> State6:
    """Exact inverse of synodic_to_inertial."""
    if state.frame is not Frame.INERTIAL:
        raise ValueError("expected an inertial-frame state")
    fs = frame_sample(t, provider, sys, rate_mode, fd_step)
    rate = time_rate(t, provider, sys)
    r_syn = (fs.R.T @ (state.r - fs.rb)) / fs.d
    resid = state.v - fs.vb - fs.ddot * (fs.R @ r_syn) - fs.d * (fs.Rdot @ r_syn)
    v_syn = (fs.R.T @ resid) * sys.char_length / (fs.d * rate * sys.char_velocity)
    return State6.synodic(r_syn, v_syn)
