"""Restricted N-body dynamics about Earth with Moon and Sun perturbations.

Works in dimensional units (km, km/s, epochs in s) in the Earth-centered
inertial frame of the ephemeris provider. Nondimensionalization happens
in the shooting layer only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import constants
from .cr3bp import SingularityError
from .ephemeris import BodyId, KeplerianEphemeris
from .integrate import CompiledRhs

SINGULARITY_RADIUS_KM = 1e-6

RHS_HFEM = 2
RHS_HFEM_VAR = 3

DEFAULT_GM = {
    BodyId.EARTH: constants.GM_EARTH,
    BodyId.MOON: constants.GM_MOON,
    BodyId.SUN: constants.GM_SUN,
}


@dataclass(frozen=True)
class HfemContext:
    """Ephemeris provider, gravitational parameters, and active perturbers."""

    provider: object
    gm: Mapping[BodyId, float] = field(default_factory=lambda: dict(DEFAULT_GM))
    bodies: tuple[BodyId, ...] = (BodyId.MOON, BodyId.SUN)

    def __post_init__(self):
        gm = {BodyId(k): float(v) for k, v in self.gm.items()}
        if gm.get(BodyId.EARTH, 0.0) <= 0.0:
            raise ValueError("central-body gm must be positive")
        if any(v < 0.0 for v in gm.values()):
            raise ValueError("gm values must be non-negative")
        bodies = tuple(BodyId(b) for b in self.bodies)
        if BodyId.EARTH in bodies:
            raise ValueError("the central body cannot be a perturber")
        object.__setattr__(self, "gm", gm)
        object.__setattr__(self, "bodies", bodies)


def context(provider, include_sun: bool = True,
            gm: Mapping[BodyId, float] | None = None) -> HfemContext:
    bodies = (BodyId.MOON, BodyId.SUN) if include_sun else (BodyId.MOON,)
    return HfemContext(provider, gm or dict(DEFAULT_GM), bodies)


def _accel_and_grad(r, t, ctx: HfemContext, want_grad: bool):
    rho = float(np.linalg.norm(r))
    if rho < SINGULARITY_RADIUS_KM:
        raise SingularityError(f"state within {SINGULARITY_RADIUS_KM} km of Earth center")
    gm_e = ctx.gm[BodyId.EARTH]
    acc = -gm_e * r / rho**3
    grad = gm_e * (3.0 * np.outer(r, r) / rho**5 - np.eye(3) / rho**3) if want_grad else None
    for body in ctx.bodies:
        gm_b = ctx.gm.get(body, 0.0)
        if gm_b == 0.0:
            continue
        rb, _ = ctx.provider.body_state(body, t)
        d = rb - r
        dd = float(np.linalg.norm(d))
        if dd < SINGULARITY_RADIUS_KM:
            raise SingularityError(
                f"state within {SINGULARITY_RADIUS_KM} km of {body.value} center")
        rbn = float(np.linalg.norm(rb))
        acc = acc + gm_b * (d / dd**3 - rb / rbn**3)
        if want_grad:
            grad = grad + gm_b * (3.0 * np.outer(d, d) / dd**5 - np.eye(3) / dd**3)
    return acc, grad


def hfem_rhs(state, t: float, ctx: HfemContext) -> np.ndarray:
    """Point-mass three-body acceleration with the indirect terms included."""
    state = np.asarray(state, dtype=float).reshape(6)
    acc, _ = _accel_and_grad(state[:3], t, ctx, want_grad=False)
    return np.concatenate([state[3:], acc])


def hfem_variational_rhs(state_and_stm, t: float, ctx: HfemContext) -> np.ndarray:
    """Augmented state plus row-major STM; the indirect terms have zero gradient."""
    y = np.asarray(state_and_stm, dtype=float).reshape(42)
    acc, grad = _accel_and_grad(y[:3], t, ctx, want_grad=True)
    out = np.empty(42)
    out[:3] = y[3:6]
    out[3:6] = acc
    phi = y[6:].reshape(6, 6)
    a = np.zeros((6, 6))
    a[:3, 3:] = np.eye(3)
    a[3:, :3] = grad
    out[6:] = (a @ phi).ravel()
    return out


def _kernel_params(ctx: HfemContext) -> np.ndarray | None:
    if not isinstance(ctx.provider, KeplerianEphemeris):
        return None
    p = np.zeros(19)
    p[0] = ctx.gm[BodyId.EARTH]
    for slot, body in enumerate((BodyId.MOON, BodyId.SUN)):
        if body not in ctx.bodies:
            continue
        gm_b = ctx.gm.get(body, 0.0)
        if gm_b == 0.0:
            continue
        el = ctx.provider.kernel_elements(body)
        if el is None:
            return None
        p[1 + slot] = gm_b
        p[3 + 8 * slot: 11 + 8 * slot] = el
    return p


def compiled_rhs(ctx: HfemContext) -> CompiledRhs | None:
    """Compiled handle for analytic providers; None when unavailable."""
    p = _kernel_params(ctx)
    return None if p is None else CompiledRhs(RHS_HFEM, p)


def compiled_variational_rhs(ctx: HfemContext) -> CompiledRhs | None:
    p = _kernel_params(ctx)
    return None if p is None else CompiledRhs(RHS_HFEM_VAR, p)
