"""Compiled propagation kernels.

The public dynamics modules expose plain numpy implementations of every
right-hand side; this module mirrors them in numba for the propagation
hot path. Kernels are selected by integer id (see the RHS_* constants in
cr3bp.py and hfem.py) with parameters packed into a flat float vector:

  CR3BP / CR3BP_VAR : p = [mu]
  HFEM / HFEM_VAR   : p = [gm_central, gm_moon, gm_sun,
                           moon elements (8), sun elements (8)]

where an element block is [a, e, inc, raan, argp, M0, gm_parent, epoch0]
and inactive perturbers carry gm = 0. Singularity guards return NaN; the
driver reports the failure instead of silently stiffening.

Consistency with the numpy implementations is covered by tests.
"""

import math

import numpy as np
from numba import njit

from ._rk78 import (
    A, B8, C, ERR_COEF, GROWTH_CLAMP, PI_ALPHA, PI_BETA, SAFETY, SHRINK_CLAMP,
    STATUS_BAD_RHS, STATUS_MAX_STEPS, STATUS_OK, STATUS_UNDERFLOW,
)

_EPS = 2.220446049250313e-16
_TWO_PI = 2.0 * math.pi

KERNEL_GUARD_KM = 1e-6  # matches the hfem singularity guard
KERNEL_GUARD_DU = 1e-12  # matches the cr3bp singularity guard


@njit(cache=True)
def kepler_eccentric_anomaly(mean_anomaly, e):
    mw = mean_anomaly % _TWO_PI
    ecc = mw + e * math.sin(mw)
    for _ in range(50):
        f = ecc - e * math.sin(ecc) - mw
        delta = f / (1.0 - e * math.cos(ecc))
        ecc -= delta
        if abs(delta) < 1e-14:
            break
    return ecc + (mean_anomaly - mw)


@njit(cache=True)
def elements_position(el, t, out):
    """Two-body position (km) of an element block at epoch t (s)."""
    a, e, inc, raan, argp, m0, gm, epoch0 = el[0], el[1], el[2], el[3], el[4], el[5], el[6], el[7]
    n = math.sqrt(gm / (a * a * a))
    ecc = kepler_eccentric_anomaly(m0 + n * (t - epoch0), e)
    ce = math.cos(ecc)
    se = math.sin(ecc)
    xp = a * (ce - e)
    yp = a * math.sqrt(1.0 - e * e) * se
    co, so = math.cos(raan), math.sin(raan)
    ci, si = math.cos(inc), math.sin(inc)
    cw, sw = math.cos(argp), math.sin(argp)
    px, py, pz = co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si
    qx, qy, qz = -co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si
    out[0] = xp * px + yp * qx
    out[1] = xp * py + yp * qy
    out[2] = xp * pz + yp * qz


@njit(cache=True)
def _cr3bp_core(y, p, out, variational):
    mu = p[0]
    x, yy, z = y[0], y[1], y[2]
    vx, vy, vz = y[3], y[4], y[5]
    d1x = x + mu
    d2x = x - 1.0 + mu
    r1sq = d1x * d1x + yy * yy + z * z
    r2sq = d2x * d2x + yy * yy + z * z
    r1 = math.sqrt(r1sq)
    r2 = math.sqrt(r2sq)
    if r1 < KERNEL_GUARD_DU or r2 < KERNEL_GUARD_DU:
        out[:] = np.nan
        return
    m1 = 1.0 - mu
    om1 = m1 / (r1sq * r1)
    om2 = mu / (r2sq * r2)
    out[0] = vx
    out[1] = vy
    out[2] = vz
    out[3] = x - om1 * d1x - om2 * d2x + 2.0 * vy
    out[4] = yy - om1 * yy - om2 * yy - 2.0 * vx
    out[5] = -om1 * z - om2 * z
    if not variational:
        return
    c1 = 3.0 * m1 / (r1sq * r1sq * r1)
    c2 = 3.0 * mu / (r2sq * r2sq * r2)
    uxx = 1.0 - om1 - om2 + c1 * d1x * d1x + c2 * d2x * d2x
    uyy = 1.0 - om1 - om2 + c1 * yy * yy + c2 * yy * yy
    uzz = -om1 - om2 + c1 * z * z + c2 * z * z
    uxy = c1 * d1x * yy + c2 * d2x * yy
    uxz = c1 * d1x * z + c2 * d2x * z
    uyz = c1 * yy * z + c2 * yy * z
    for j in range(6):
        p0 = y[6 + j]
        p1 = y[12 + j]
        p2 = y[18 + j]
        p3 = y[24 + j]
        p4 = y[30 + j]
        p5 = y[36 + j]
        out[6 + j] = p3
        out[12 + j] = p4
        out[18 + j] = p5
        out[24 + j] = uxx * p0 + uxy * p1 + uxz * p2 + 2.0 * p4
        out[30 + j] = uxy * p0 + uyy * p1 + uyz * p2 - 2.0 * p3
        out[36 + j] = uxz * p0 + uyz * p1 + uzz * p2


@njit(cache=True)
def _hfem_core(t, y, p, out, variational):
    gm_central = p[0]
    x, yy, z = y[0], y[1], y[2]
    rho_sq = x * x + yy * yy + z * z
    rho = math.sqrt(rho_sq)
    if rho < KERNEL_GUARD_KM:
        out[:] = np.nan
        return
    inv_r3 = gm_central / (rho_sq * rho)
    ax = -inv_r3 * x
    ay = -inv_r3 * yy
    az = -inv_r3 * z
    gxx = gyy = gzz = gxy = gxz = gyz = 0.0
    if variational:
        c = 3.0 * gm_central / (rho_sq * rho_sq * rho)
        gxx = c * x * x - inv_r3
        gyy = c * yy * yy - inv_r3
        gzz = c * z * z - inv_r3
        gxy = c * x * yy
        gxz = c * x * z
        gyz = c * yy * z
    body = np.empty(3)
    for ib in range(2):
        gm = p[1 + ib]
        if gm == 0.0:
            continue
        elements_position(p[3 + 8 * ib: 11 + 8 * ib], t, body)
        bx, by, bz = body[0], body[1], body[2]
        dx, dy, dz = bx - x, by - yy, bz - z
        dd_sq = dx * dx + dy * dy + dz * dz
        dd = math.sqrt(dd_sq)
        if dd < KERNEL_GUARD_KM:
            out[:] = np.nan
            return
        bsq = bx * bx + by * by + bz * bz
        bn = math.sqrt(bsq)
        inv_d3 = gm / (dd_sq * dd)
        inv_b3 = gm / (bsq * bn)
        ax += inv_d3 * dx - inv_b3 * bx
        ay += inv_d3 * dy - inv_b3 * by
        az += inv_d3 * dz - inv_b3 * bz
        if variational:
            c = 3.0 * gm / (dd_sq * dd_sq * dd)
            gxx += c * dx * dx - inv_d3
            gyy += c * dy * dy - inv_d3
            gzz += c * dz * dz - inv_d3
            gxy += c * dx * dy
            gxz += c * dx * dz
            gyz += c * dy * dz
    out[0] = y[3]
    out[1] = y[4]
    out[2] = y[5]
    out[3] = ax
    out[4] = ay
    out[5] = az
    if not variational:
        return
    for j in range(6):
        p0 = y[6 + j]
        p1 = y[12 + j]
        p2 = y[18 + j]
        out[6 + j] = y[24 + j]
        out[12 + j] = y[30 + j]
        out[18 + j] = y[36 + j]
        out[24 + j] = gxx * p0 + gxy * p1 + gxz * p2
        out[30 + j] = gxy * p0 + gyy * p1 + gyz * p2
        out[36 + j] = gxz * p0 + gyz * p1 + gzz * p2


@njit(cache=True)
def eval_rhs(rhs_id, t, y, p, out):
    if rhs_id == 0:
        _cr3bp_core(y, p, out, False)
    elif rhs_id == 1:
        _cr3bp_core(y, p, out, True)
    elif rhs_id == 2:
        _hfem_core(t, y, p, out, False)
    else:
        _hfem_core(t, y, p, out, True)


@njit(cache=True)
def _rms_scaled(vec, y_old, y_new, abs_tol, rel_tol):
    acc = 0.0
    for i in range(vec.size):
        m = abs(y_old[i])
        if abs(y_new[i]) > m:
            m = abs(y_new[i])
        r = vec[i] / (abs_tol + rel_tol * m)
        acc += r * r
    return math.sqrt(acc / vec.size)


@njit(cache=True)
def rk78_propagate(rhs_id, p, y0, t0, t1, rel_tol, abs_tol, h0, min_step,
                   max_step, max_steps, dense):
    """Compiled RKF7(8) loop; mirrors the python driver in integrate.py.

    Returns (status, t_at_failure, times, states) with times/states holding
    every accepted step when dense, else the first and last samples.
    """
    n = y0.size
    y = y0.copy()
    cap = 256 if dense else 2
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    ts[0] = t0
    ys[0] = y
    m = 1
    if t1 == t0:
        return STATUS_OK, t0, ts[:m], ys[:m]

    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    f0 = np.empty(n)
    eval_rhs(rhs_id, t0, y, p, f0)
    for i in range(n):
        if not math.isfinite(f0[i]):
            return STATUS_BAD_RHS, t0, ts[:m], ys[:m]

    if h0 > 0.0:
        h = direction * min(h0, span, max_step)
    else:
        # Hairer-style starting step from the first two derivative samples.
        d0 = 0.0
        d1 = 0.0
        for i in range(n):
            sc = abs_tol + rel_tol * abs(y[i])
            d0 += (y[i] / sc) ** 2
            d1 += (f0[i] / sc) ** 2
        d0 = math.sqrt(d0 / n)
        d1 = math.sqrt(d1 / n)
        if d0 < 1e-5 or d1 < 1e-5:
            hg = 1e-6 * span
        else:
            hg = 0.01 * d0 / d1
        hg = min(hg, span)
        y1 = y + direction * hg * f0
        f1 = np.empty(n)
        eval_rhs(rhs_id, t0 + direction * hg, y1, p, f1)
        d2 = 0.0
        ok = True
        for i in range(n):
            if not math.isfinite(f1[i]):
                ok = False
                break
            sc = abs_tol + rel_tol * abs(y[i])
            d2 += ((f1[i] - f0[i]) / sc) ** 2
        if ok:
            d2 = math.sqrt(d2 / n) / hg
        else:
            d2 = 1.0 / hg
        dmax = max(d1, d2)
        if dmax <= 1e-15:
            h1 = max(1e-6 * span, hg * 1e-3)
        else:
            h1 = (0.01 / dmax) ** (1.0 / 8.0)
        h = direction * min(100.0 * hg, min(h1, span))
        if abs(h) > max_step:
            h = direction * max_step
    t = t0
    err_prev = 1e-4
    k = np.empty((13, n))
    yi = np.empty(n)
    ynew = np.empty(n)
    errvec = np.empty(n)
    nsteps = 0
    while True:
        if nsteps >= max_steps:
            return STATUS_MAX_STEPS, t, ts[:m], ys[:m]
        last = False
        if (t + h - t1) * direction >= 0.0:
            h = t1 - t
            last = True
        tb = abs(t) if abs(t) > abs(t1) else abs(t1)
        hmin = 16.0 * _EPS * tb
        if min_step > hmin:
            hmin = min_step
        if abs(h) < hmin and not last:
            return STATUS_UNDERFLOW, t, ts[:m], ys[:m]

        eval_rhs(rhs_id, t, y, p, k[0])
        for s in range(1, 13):
            for i in range(n):
                acc = 0.0
                for q in range(s):
                    aq = A[s, q]
                    if aq != 0.0:
                        acc += aq * k[q, i]
                yi[i] = y[i] + h * acc
            eval_rhs(rhs_id, t + C[s] * h, yi, p, k[s])
        finite = True
        for i in range(n):
            acc = 0.0
            for s in range(13):
                bs = B8[s]
                if bs != 0.0:
                    acc += bs * k[s, i]
            ynew[i] = y[i] + h * acc
            errvec[i] = h * ERR_COEF * (k[0, i] + k[10, i] - k[11, i] - k[12, i])
            if not math.isfinite(ynew[i]):
                finite = False
        err = _rms_scaled(errvec, y, ynew, abs_tol, rel_tol) if finite else np.inf
        nsteps += 1
        if err <= 1.0:
            t = t1 if last else t + h
            for i in range(n):
                y[i] = ynew[i]
            if dense or last:
                if m == cap:
                    cap2 = 2 * cap
                    ts2 = np.empty(cap2)
                    ts2[:m] = ts[:m]
                    ts = ts2
                    ys2 = np.empty((cap2, n))
                    ys2[:m] = ys[:m]
                    ys = ys2
                    cap = cap2
                ts[m] = t
                ys[m] = y
                m += 1
            if last:
                return STATUS_OK, t, ts[:m], ys[:m]
            if err == 0.0:
                factor = GROWTH_CLAMP
            else:
                factor = SAFETY * err ** (-PI_ALPHA) * err_prev**PI_BETA
                if factor > GROWTH_CLAMP:
                    factor = GROWTH_CLAMP
                elif factor < SHRINK_CLAMP:
                    factor = SHRINK_CLAMP
            habs = abs(h) * factor
            if habs > max_step:
                habs = max_step
            h = direction * habs
            err_prev = err if err > 1e-4 else 1e-4
        else:
            if math.isinf(err):
                factor = SHRINK_CLAMP
            else:
                factor = SAFETY * err ** (-1.0 / 8.0)
                if factor > 1.0:
                    factor = 1.0
                elif factor < SHRINK_CLAMP:
                    factor = SHRINK_CLAMP
            h *= factor
            if abs(h) < hmin:
                return STATUS_UNDERFLOW, t, ts[:m], ys[:m]
