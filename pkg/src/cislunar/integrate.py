"""Adaptive Runge-Kutta-Fehlberg 7(8) propagation.

One embedded pair serves state-only and state+STM propagation of both
dynamical models. Backward integration (t1 < t0) is supported; the final
step is clamped to land exactly on t1. ``rhs`` may be a plain callable
``f(t, y) -> dy/dt`` or a :class:`CompiledRhs` handle, in which case the
propagation loop runs in compiled code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import _rk78
from .states import Frame, Units


class PropagationError(RuntimeError):
    """Base class for propagation failures; carries the failure time."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t={t!r})")
        self.t = t


class MaxStepsExceeded(PropagationError):
    pass


class StepUnderflow(PropagationError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    initial_step: float | None = None
    min_step: float = 0.0
    max_step: float = np.inf
    max_steps: int = 1_000_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            tol = getattr(self, name)
            if not 0.0 < tol <= 1e-2:
                raise ValueError(f"{name} must be in (0, 1e-2], got {tol}")
        if not self.min_step < self.max_step:
            raise ValueError("min_step must be smaller than max_step")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass(frozen=True)
class CompiledRhs:
    """Handle to a compiled right-hand side: kernel id plus packed parameters."""

    rhs_id: int
    params: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.params, dtype=float)
        p.flags.writeable = False
        object.__setattr__(self, "params", p)


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered state samples with frame and unit tags."""

    t: np.ndarray
    states: np.ndarray
    frame: Frame
    units: Units

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] != t.size or states.shape[1] != 6:
            raise ValueError("states must be (n, 6) matching times")
        dt = np.diff(t)
        if t.size > 1 and not (np.all(dt > 0) or np.all(dt < 0)):
            raise ValueError("times must be strictly monotonic")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "frame", Frame(self.frame))
        object.__setattr__(self, "units", Units(self.units))

    def __len__(self) -> int:
        return self.t.size

    def reversed(self) -> "Trajectory":
        return Trajectory(self.t[::-1].copy(), self.states[::-1].copy(),
                          self.frame, self.units)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# frame={self.frame.value} units={self.units.value}\n")
            fh.write("t,x,y,z,vx,vy,vz\n")
            for ti, row in zip(self.t, self.states):
                cols = ",".join(repr(float(c)) for c in row)
                fh.write(f"{ti!r},{cols}\n")


RhsLike = Union[Callable[[float, np.ndarray], np.ndarray], CompiledRhs]


def _python_loop(f, y0, t0, t1, cfg: IntegratorConfig, dense: bool):
    y = np.array(y0, dtype=float)
    n = y.size
    ts = [t0]
    ys = [y.copy()]
    if t1 == t0:
        return y, np.array(ts), np.array(ys)

    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    f0 = np.asarray(f(t0, y), dtype=float)
    if cfg.initial_step is not None:
        h = direction * min(abs(cfg.initial_step), span, cfg.max_step)
    else:
        h = _rk78.initial_step(f, t0, y, f0, direction, cfg.abs_tol, cfg.rel_tol, span)
        h = direction * min(abs(h), cfg.max_step)

    t = t0
    err_prev = 1e-4
    k = np.empty((13, n))
    nsteps = 0
    while True:
        if nsteps >= cfg.max_steps:
            raise MaxStepsExceeded("maximum step count exceeded", t)
        if (t + h - t1) * direction >= 0.0:
            h = t1 - t
            last = True
        else:
            last = False
        hmin = max(cfg.min_step, 16.0 * np.finfo(float).eps * max(abs(t), abs(t1)))
        if abs(h) < hmin and not last:
            raise StepUnderflow("step size underflow", t)

        k[0] = f(t, y)
        for i in range(1, 13):
            yi = y + h * (_rk78.A[i, :i] @ k[:i])
            k[i] = f(t + _rk78.C[i] * h, yi)
        ynew = y + h * (_rk78.B8 @ k)
        errvec = h * _rk78.ERR_COEF * (k[0] + k[10] - k[11] - k[12])
        if not np.all(np.isfinite(ynew)):
            err = np.inf
        else:
            err = _rk78.error_norm(errvec, y, ynew, cfg.abs_tol, cfg.rel_tol)
        nsteps += 1
        if err <= 1.0:
            t = t1 if last else t + h
            y = ynew
            if dense:
                ts.append(t)
                ys.append(y.copy())
            if last:
                break
            h = direction * min(abs(h) * _rk78.accept_factor(err, err_prev), cfg.max_step)
            err_prev = max(err, 1e-4)
        else:
            if np.isinf(err):
                factor = _rk78.SHRINK_CLAMP
            else:
                factor = _rk78.reject_factor(err)
            h *= factor
            if abs(h) < hmin:
                raise StepUnderflow("step size underflow after rejection", t)
    if not dense:
        ts.append(t)
        ys.append(y.copy())
    return y, np.array(ts), np.array(ys)


def _compiled_loop(rhs: CompiledRhs, y0, t0, t1, cfg: IntegratorConfig, dense: bool):
    from . import _kernels

    y0 = np.ascontiguousarray(y0, dtype=float)
    h0 = 0.0 if cfg.initial_step is None else float(cfg.initial_step)
    status, t_fail, ts, ys = _kernels.rk78_propagate(
        rhs.rhs_id, rhs.params, y0, float(t0), float(t1),
        cfg.rel_tol, cfg.abs_tol, h0, cfg.min_step, float(cfg.max_step),
        int(cfg.max_steps), bool(dense),
    )
    if status == _rk78.STATUS_MAX_STEPS:
        raise MaxStepsExceeded("maximum step count exceeded", t_fail)
    if status == _rk78.STATUS_UNDERFLOW:
        raise StepUnderflow("step size underflow", t_fail)
    if status == _rk78.STATUS_BAD_RHS:
        raise PropagationError(
            "dynamics evaluation failed (singularity guard or non-finite state)", t_fail
        )
    return ys[-1].copy(), ts, ys


def propagate(rhs: RhsLike, y0, t0: float, t1: float,
              cfg: IntegratorConfig | None = None) -> np.ndarray:
    """Propagate ``y0`` from ``t0`` to ``t1`` and return the final state."""
    cfg = cfg or IntegratorConfig()
    if isinstance(rhs, CompiledRhs):
        yf, _, _ = _compiled_loop(rhs, y0, t0, t1, cfg, dense=False)
    else:
        yf, _, _ = _python_loop(rhs, y0, t0, t1, cfg, dense=False)
    return yf


def propagate_dense(rhs: RhsLike, y0, t0: float, t1: float,
                    cfg: IntegratorConfig | None = None):
    """Propagate and return ``(y_final, times, states)`` at accepted steps."""
    cfg = cfg or IntegratorConfig()
    if isinstance(rhs, CompiledRhs):
        return _compiled_loop(rhs, y0, t0, t1, cfg, dense=True)
    return _python_loop(rhs, y0, t0, t1, cfg, dense=True)


def propagate_with_stm(variational_rhs: RhsLike, x0, t0: float, t1: float,
                       cfg: IntegratorConfig | None = None):
    """Propagate the 42-dimensional variational system from Phi(t0) = I.

    Returns ``(x_final, Phi)`` with Phi the 6x6 state transition matrix
    mapping perturbations at t0 to t1.
    """
    x0 = np.asarray(x0, dtype=float).reshape(6)
    y0 = np.concatenate([x0, np.eye(6).ravel()])
    yf = propagate(variational_rhs, y0, t0, t1, cfg)
    return yf[:6], yf[6:].reshape(6, 6)
