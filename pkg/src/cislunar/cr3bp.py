"""Nondimensional circular restricted three-body problem dynamics.

All states are synodic-frame and nondimensional: the primary separation is
one distance unit (DU), the rotation period 2*pi time units (TU), and the
primaries sit at (-mu, 0, 0) and (1-mu, 0, 0). Functions here are pure;
arrays in, arrays out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import constants
from .integrate import CompiledRhs

# Raising below this distance to a primary protects the step controller
# from silently stiffening near the singularities.
SINGULARITY_RADIUS = 1e-12

RHS_CR3BP = 0
RHS_CR3BP_VAR = 1

OMEGA = np.array([[0.0, 2.0, 0.0], [-2.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


class SingularityError(ValueError):
    """State is too close to a gravitating body for the dynamics to be evaluated."""


@dataclass(frozen=True)
class Cr3bpSystem:
    """Mass ratio plus the characteristic scale factors tying DU/TU to km/s."""

    mu: float
    char_length: float  # km per DU
    char_time: float  # s per TU
    char_velocity: float  # km/s per VU

    def __post_init__(self):
        if not 0.0 < self.mu < 0.5:
            raise ValueError(f"mass ratio must be in (0, 0.5), got {self.mu}")
        expect = self.char_length / self.char_time
        if abs(self.char_velocity - expect) > 1e-12 * abs(expect):
            raise ValueError("char_velocity must equal char_length / char_time")

    @property
    def r1(self) -> np.ndarray:
        return np.array([-self.mu, 0.0, 0.0])

    @property
    def r2(self) -> np.ndarray:
        return np.array([1.0 - self.mu, 0.0, 0.0])

    @property
    def gm_total(self) -> float:
        """Combined gravitational parameter implied by the scaling, km^3/s^2."""
        return self.char_length**3 / self.char_time**2


def earth_moon(char_length: float = constants.EARTH_MOON_AXIS_KM) -> Cr3bpSystem:
    """Earth-Moon system from the standard gravitational parameters."""
    gm_total = constants.GM_EARTH + constants.GM_MOON
    char_time = np.sqrt(char_length**3 / gm_total)
    return Cr3bpSystem(
        mu=constants.GM_MOON / gm_total,
        char_length=char_length,
        char_time=char_time,
        char_velocity=char_length / char_time,
    )


def _primary_offsets(r: np.ndarray, sys: Cr3bpSystem):
    d1 = r - sys.r1
    d2 = r - sys.r2
    rho1 = float(np.linalg.norm(d1))
    rho2 = float(np.linalg.norm(d2))
    if rho1 < SINGULARITY_RADIUS or rho2 < SINGULARITY_RADIUS:
        raise SingularityError(f"state within {SINGULARITY_RADIUS} DU of a primary")
    return d1, d2, rho1, rho2


def effective_potential(r, sys: Cr3bpSystem) -> float:
    """U(r) = (x^2 + y^2)/2 + (1-mu)/rho1 + mu/rho2."""
    r = np.asarray(r, dtype=float).reshape(3)
    _, _, rho1, rho2 = _primary_offsets(r, sys)
    return 0.5 * (r[0] ** 2 + r[1] ** 2) + (1.0 - sys.mu) / rho1 + sys.mu / rho2


def grad_effective_potential(r, sys: Cr3bpSystem) -> np.ndarray:
    r = np.asarray(r, dtype=float).reshape(3)
    d1, d2, rho1, rho2 = _primary_offsets(r, sys)
    g = np.array([r[0], r[1], 0.0])
    g -= (1.0 - sys.mu) * d1 / rho1**3
    g -= sys.mu * d2 / rho2**3
    return g


def potential_hessian(r, sys: Cr3bpSystem) -> np.ndarray:
    """Analytic second derivative of the effective potential."""
    r = np.asarray(r, dtype=float).reshape(3)
    d1, d2, rho1, rho2 = _primary_offsets(r, sys)
    h = np.diag([1.0, 1.0, 0.0])
    for m, d, rho in ((1.0 - sys.mu, d1, rho1), (sys.mu, d2, rho2)):
        h += m * (3.0 * np.outer(d, d) / rho**5 - np.eye(3) / rho**3)
    return h


def cr3bp_rhs(state, sys: Cr3bpSystem) -> np.ndarray:
    """Synodic-frame equations of motion: (v, Omega v + grad U)."""
    state = np.asarray(state, dtype=float).reshape(6)
    v = state[3:]
    acc = grad_effective_potential(state[:3], sys)
    acc[0] += 2.0 * v[1]
    acc[1] -= 2.0 * v[0]
    return np.concatenate([v, acc])


def cr3bp_variational_rhs(state_and_stm, sys: Cr3bpSystem) -> np.ndarray:
    """Augmented dynamics of state plus row-major 6x6 STM: Phi_dot = A Phi."""
    y = np.asarray(state_and_stm, dtype=float).reshape(42)
    out = np.empty(42)
    out[:6] = cr3bp_rhs(y[:6], sys)
    a = np.zeros((6, 6))
    a[:3, 3:] = np.eye(3)
    a[3:, :3] = potential_hessian(y[:3], sys)
    a[3:, 3:] = OMEGA
    phi = y[6:].reshape(6, 6)
    out[6:] = (a @ phi).ravel()
    return out


def jacobi_integral(state, sys: Cr3bpSystem) -> float:
    """The sole conserved quantity: J = 2 U(r) - |v|^2."""
    state = np.asarray(state, dtype=float).reshape(6)
    return 2.0 * effective_potential(state[:3], sys) - float(state[3:] @ state[3:])


def _axis_gradient(x: float, sys: Cr3bpSystem) -> float:
    s1 = x + sys.mu
    s2 = x - 1.0 + sys.mu
    return x - (1.0 - sys.mu) * s1 / abs(s1) ** 3 - sys.mu * s2 / abs(s2) ** 3


def collinear_points(sys: Cr3bpSystem) -> np.ndarray:
    """L1, L2, L3 positions on the x-axis, one per row.

    Bracketed bisection on the axial gradient down to 1e-13 DU, then two
    Newton polish steps to push the gradient itself below tolerance.
    """
    mu = sys.mu
    eps = 1e-9
    brackets = [
        (-mu + eps, 1.0 - mu - eps),  # L1
        (1.0 - mu + eps, 2.0),  # L2
        (-2.0, -mu - eps),  # L3
    ]
    points = np.zeros((3, 3))
    for row, (lo, hi) in enumerate(brackets):
        glo = _axis_gradient(lo, sys)
        ghi = _axis_gradient(hi, sys)
        if glo * ghi > 0:
            raise RuntimeError("collinear point bracket does not straddle a root")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            gmid = _axis_gradient(mid, sys)
            if glo * gmid <= 0:
                hi = mid
            else:
                lo, glo = mid, gmid
            if hi - lo < 1e-13:
                break
        x = 0.5 * (lo + hi)
        for _ in range(2):
            gxx = potential_hessian(np.array([x, 0.0, 0.0]), sys)[0, 0]
            x -= _axis_gradient(x, sys) / gxx
        points[row, 0] = x
    return points


def compiled_rhs(sys: Cr3bpSystem) -> CompiledRhs:
    return CompiledRhs(RHS_CR3BP, np.array([sys.mu]))


def compiled_variational_rhs(sys: Cr3bpSystem) -> CompiledRhs:
    return CompiledRhs(RHS_CR3BP_VAR, np.array([sys.mu]))
