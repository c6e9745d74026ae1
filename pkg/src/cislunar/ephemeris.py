"""Moon and Sun states relative to Earth versus epoch.

Two interchangeable providers: an analytic Keplerian model and a cubic
Hermite interpolation of a tabulated file. Earth is always the zero of
the frame. Epochs are seconds past 2020-01-01T00:00:00.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from . import constants


class BodyId(str, Enum):
    EARTH = "earth"
    MOON = "moon"
    SUN = "sun"


class EphemerisError(ValueError):
    pass


class CoverageError(EphemerisError):
    """Requested epoch lies outside the provider's coverage."""


class TableFormatError(EphemerisError):
    """Malformed ephemeris table file."""


@dataclass(frozen=True)
class OrbitalElements:
    """Classical elements of a two-body orbit about a parent body.

    a in km, angles in rad, gm_parent in km^3/s^2, epoch0 the epoch (s)
    at which the mean anomaly equals m0.
    """

    a: float
    e: float
    inc: float = 0.0
    raan: float = 0.0
    argp: float = 0.0
    m0: float = 0.0
    gm_parent: float = 1.0
    epoch0: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.e < 1.0:
            raise ValueError(f"eccentricity must be in [0, 1), got {self.e}")
        if self.a <= 0.0:
            raise ValueError("semi-major axis must be positive")
        if self.gm_parent <= 0.0:
            raise ValueError("gm_parent must be positive")

    @property
    def mean_motion(self) -> float:
        return math.sqrt(self.gm_parent / self.a**3)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.mean_motion

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.e, self.inc, self.raan, self.argp,
                         self.m0, self.gm_parent, self.epoch0])


def solve_kepler(mean_anomaly: float, e: float) -> float:
    """Eccentric anomaly E with E - e sin(E) = M, to 1e-13 rad.

    Newton iteration with a bisection fallback; always converges for
    0 <= e < 1.
    """
    if not 0.0 <= e < 1.0:
        raise ValueError(f"eccentricity must be in [0, 1), got {e}")
    two_pi = 2.0 * math.pi
    mw = math.fmod(mean_anomaly, two_pi)
    if mw < 0.0:
        mw += two_pi
    ecc = mw + e * math.sin(mw)
    converged = False
    for _ in range(50):
        f = ecc - e * math.sin(ecc) - mw
        delta = f / (1.0 - e * math.cos(ecc))
        ecc -= delta
        if abs(delta) < 5e-15:
            converged = True
            break
    if not converged:
        lo, hi = 0.0, two_pi
        for _ in range(200):
            ecc = 0.5 * (lo + hi)
            if ecc - e * math.sin(ecc) - mw > 0.0:
                hi = ecc
            else:
                lo = ecc
            if hi - lo < 1e-15:
                break
    return ecc + (mean_anomaly - mw)


def keplerian_state(el: OrbitalElements, t: float):
    """Inertial position (km) and velocity (km/s) of the orbit at epoch t."""
    mean = el.m0 + el.mean_motion * (t - el.epoch0)
    ecc = solve_kepler(mean, el.e)
    ce, se = math.cos(ecc), math.sin(ecc)
    b = math.sqrt(1.0 - el.e**2)
    r = el.a * (1.0 - el.e * ce)
    xp = el.a * (ce - el.e)
    yp = el.a * b * se
    kv = math.sqrt(el.gm_parent * el.a) / r
    vxp = -kv * se
    vyp = kv * b * ce
    co, so = math.cos(el.raan), math.sin(el.raan)
    ci, si = math.cos(el.inc), math.sin(el.inc)
    cw, sw = math.cos(el.argp), math.sin(el.argp)
    p = np.array([co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si])
    q = np.array([-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si])
    return xp * p + yp * q, vxp * p + vyp * q


_ZERO3 = np.zeros(3)


class KeplerianEphemeris:
    """Analytic provider: each body on a fixed two-body orbit about Earth.

    The Sun entry is the geocentric mirror of Earth's heliocentric orbit,
    so its gm_parent is the Sun+Earth combined parameter.
    """

    def __init__(self, elements: Mapping[BodyId, OrbitalElements]):
        self.elements = {BodyId(k): v for k, v in elements.items()}

    def covers(self, t: float) -> bool:
        return True

    def body_state(self, body: BodyId, t: float):
        body = BodyId(body)
        if body is BodyId.EARTH:
            return _ZERO3.copy(), _ZERO3.copy()
        el = self._element(body)
        return keplerian_state(el, t)

    def body_acceleration(self, body: BodyId, t: float) -> np.ndarray:
        body = BodyId(body)
        if body is BodyId.EARTH:
            return _ZERO3.copy()
        el = self._element(body)
        r, _ = keplerian_state(el, t)
        return -el.gm_parent * r / np.linalg.norm(r) ** 3

    def _element(self, body: BodyId) -> OrbitalElements:
        try:
            return self.elements[body]
        except KeyError:
            raise EphemerisError(f"provider carries no elements for {body.value}")

    def kernel_elements(self, body: BodyId) -> np.ndarray | None:
        el = self.elements.get(BodyId(body))
        return None if el is None else el.as_array()

    def describe(self) -> dict:
        return {
            "kind": "kepler",
            "bodies": {
                body.value: {
                    "a": el.a, "e": el.e, "inc": el.inc, "raan": el.raan,
                    "argp": el.argp, "m0": el.m0, "gm_parent": el.gm_parent,
                    "epoch0": el.epoch0,
                }
                for body, el in self.elements.items()
            },
        }

    @classmethod
    def from_description(cls, desc: Mapping) -> "KeplerianEphemeris":
        return cls({
            BodyId(name): OrbitalElements(**fields)
            for name, fields in desc["bodies"].items()
        })


def moon_elements(a: float = constants.EARTH_MOON_AXIS_KM,
                  e: float = constants.MOON_ECCENTRICITY,
                  inc: float = 0.0) -> OrbitalElements:
    return OrbitalElements(a=a, e=e, inc=inc,
                           gm_parent=constants.GM_EARTH + constants.GM_MOON)


def sun_elements(a: float = constants.SUN_EARTH_AXIS_KM,
                 e: float = constants.SUN_ECCENTRICITY) -> OrbitalElements:
    return OrbitalElements(a=a, e=e,
                           gm_parent=constants.GM_SUN + constants.GM_EARTH)


def keplerian_provider(moon_e: float = constants.MOON_ECCENTRICITY,
                       moon_inc: float = 0.0,
                       moon_a: float = constants.EARTH_MOON_AXIS_KM,
                       sun: bool = True) -> KeplerianEphemeris:
    elements = {BodyId.MOON: moon_elements(a=moon_a, e=moon_e, inc=moon_inc)}
    if sun:
        elements[BodyId.SUN] = sun_elements()
    return KeplerianEphemeris(elements)


def circular_provider(char_length: float = constants.EARTH_MOON_AXIS_KM,
                      sun: bool = True) -> KeplerianEphemeris:
    """Coplanar circular Moon at the characteristic distance.

    This is the configuration under which the ephemeris model reduces
    exactly to the circular three-body problem.
    """
    return keplerian_provider(moon_e=0.0, moon_a=char_length, sun=sun)


class TableEphemeris:
    """Cubic Hermite interpolation of tabulated states.

    Stored velocities serve as the interpolation derivatives, so a query
    at a sample epoch reproduces the stored state exactly.
    """

    def __init__(self, samples: Mapping[BodyId, tuple]):
        self._tables = {}
        for body, (t, pos, vel) in samples.items():
            body = BodyId(body)
            t = np.asarray(t, dtype=float)
            pos = np.asarray(pos, dtype=float)
            vel = np.asarray(vel, dtype=float)
            if t.size < 4:
                raise TableFormatError(
                    f"body {body.value!r} has {t.size} samples; at least 4 required")
            if not np.all(np.diff(t) > 0):
                raise TableFormatError(f"epochs for body {body.value!r} not strictly increasing")
            self._tables[body] = (t, pos, vel)

    def covers(self, t: float) -> bool:
        return all(tab[0][0] <= t <= tab[0][-1] for tab in self._tables.values())

    def _locate(self, body: BodyId, t: float):
        body = BodyId(body)
        try:
            times, pos, vel = self._tables[body]
        except KeyError:
            raise EphemerisError(f"table carries no samples for {body.value}")
        if t < times[0] or t > times[-1]:
            raise CoverageError(
                f"epoch {t} outside table coverage [{times[0]}, {times[-1]}] for {body.value}")
        i = int(np.searchsorted(times, t, side="right")) - 1
        i = min(max(i, 0), times.size - 2)
        return times, pos, vel, i

    def body_state(self, body: BodyId, t: float):
        if BodyId(body) is BodyId.EARTH:
            return _ZERO3.copy(), _ZERO3.copy()
        times, pos, vel, i = self._locate(body, t)
        dt = times[i + 1] - times[i]
        s = (t - times[i]) / dt
        p0, p1 = pos[i], pos[i + 1]
        v0, v1 = vel[i], vel[i + 1]
        h00 = (2 * s - 3) * s * s + 1
        h10 = ((s - 2) * s + 1) * s
        h01 = (3 - 2 * s) * s * s
        h11 = (s - 1) * s * s
        r = h00 * p0 + h10 * dt * v0 + h01 * p1 + h11 * dt * v1
        d00 = 6 * s * (s - 1)
        d10 = (3 * s - 4) * s + 1
        d01 = -6 * s * (s - 1)
        d11 = (3 * s - 2) * s
        v = (d00 * p0 + d01 * p1) / dt + d10 * v0 + d11 * v1
        return r, v

    def body_acceleration(self, body: BodyId, t: float) -> np.ndarray:
        if BodyId(body) is BodyId.EARTH:
            return _ZERO3.copy()
        times, pos, vel, i = self._locate(body, t)
        dt = times[i + 1] - times[i]
        s = (t - times[i]) / dt
        a00 = 12 * s - 6
        a10 = 6 * s - 4
        a01 = -12 * s + 6
        a11 = 6 * s - 2
        return (a00 * pos[i] + a01 * pos[i + 1]) / dt**2 + (a10 * vel[i] + a11 * vel[i + 1]) / dt

    def kernel_elements(self, body: BodyId):
        return None

    def describe(self) -> dict:
        return {"kind": "table", "bodies": sorted(b.value for b in self._tables)}


TABLE_HEADER = "epoch_s,body,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms"
_TABLE_BODIES = {"moon": BodyId.MOON, "sun": BodyId.SUN}


def load_ephemeris_table(path) -> TableEphemeris:
    """Read the ephemeris CSV format; rows sorted by (body, epoch)."""
    rows: dict[BodyId, list] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TABLE_HEADER:
            raise TableFormatError(f"line 1: expected header {TABLE_HEADER!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 8:
                raise TableFormatError(f"line {lineno}: expected 8 fields, got {len(parts)}")
            try:
                epoch = float(parts[0])
                values = [float(p) for p in parts[2:]]
            except ValueError as exc:
                raise TableFormatError(f"line {lineno}: {exc}") from exc
            body_name = parts[1].strip().lower()
            if body_name not in _TABLE_BODIES:
                raise TableFormatError(f"line {lineno}: unknown body {parts[1]!r}")
            body = _TABLE_BODIES[body_name]
            per_body = rows.setdefault(body, [])
            if per_body and epoch <= per_body[-1][0]:
                raise TableFormatError(
                    f"line {lineno}: epochs for body {body_name!r} not strictly increasing")
            per_body.append((epoch, values))
    if not rows:
        raise TableFormatError("table contains no samples")
    samples = {}
    for body, entries in rows.items():
        t = np.array([e[0] for e in entries])
        vals = np.array([e[1] for e in entries])
        samples[body] = (t, vals[:, :3], vals[:, 3:])
    return TableEphemeris(samples)


def write_ephemeris_table(path, provider, epochs, bodies=(BodyId.MOON, BodyId.SUN)) -> None:
    """Sample a provider onto the CSV table format (testing/export helper)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(TABLE_HEADER + "\n")
        for body in bodies:
            for t in epochs:
                r, v = provider.body_state(body, t)
                cols = ",".join(repr(float(c)) for c in (*r, *v))
                fh.write(f"{float(t)!r},{BodyId(body).value},{cols}\n")


def numeric_rate(f, t: float, h: float = 10.0):
    """Central difference (f(t+h) - f(t-h)) / 2h."""
    return (f(t + h) - f(t - h)) / (2.0 * h)
