"""Runge-Kutta-Fehlberg 7(8) embedded pair: coefficients and step control.

Thirteen-stage pair; the eighth-order solution is propagated and the
difference to the seventh-order one provides the local error estimate,
which reduces to (41/840) h (k1 + k11 - k12 - k13). The step controller
is a PI controller with safety factor 0.9, growth clamped at x5 and
shrink at x0.1.
"""

import numpy as np

C = np.array(
    [0.0, 2 / 27, 1 / 9, 1 / 6, 5 / 12, 1 / 2, 5 / 6, 1 / 6, 2 / 3, 1 / 3, 1.0, 0.0, 1.0]
)

A = np.zeros((13, 12))
A[1, 0] = 2 / 27
A[2, :2] = [1 / 36, 1 / 12]
A[3, :3] = [1 / 24, 0, 1 / 8]
A[4, :4] = [5 / 12, 0, -25 / 16, 25 / 16]
A[5, :5] = [1 / 20, 0, 0, 1 / 4, 1 / 5]
A[6, :6] = [-25 / 108, 0, 0, 125 / 108, -65 / 27, 125 / 54]
A[7, :7] = [31 / 300, 0, 0, 0, 61 / 225, -2 / 9, 13 / 900]
A[8, :8] = [2, 0, 0, -53 / 6, 704 / 45, -107 / 9, 67 / 90, 3]
A[9, :9] = [-91 / 108, 0, 0, 23 / 108, -976 / 135, 311 / 54, -19 / 60, 17 / 6, -1 / 12]
A[10, :10] = [
    2383 / 4100, 0, 0, -341 / 164, 4496 / 1025, -301 / 82, 2133 / 4100,
    45 / 82, 45 / 164, 18 / 41,
]
A[11, :11] = [3 / 205, 0, 0, 0, 0, -6 / 41, -3 / 205, -3 / 41, 3 / 41, 6 / 41, 0]
A[12, :12] = [
    -1777 / 4100, 0, 0, -341 / 164, 4496 / 1025, -289 / 82, 2193 / 4100,
    51 / 82, 33 / 164, 12 / 41, 0, 1,
]

# Eighth-order propagating weights.
B8 = np.array(
    [0, 0, 0, 0, 0, 34 / 105, 9 / 35, 9 / 35, 9 / 280, 9 / 280, 0, 41 / 840, 41 / 840]
)

ERR_COEF = 41.0 / 840.0  # error estimate uses stages 1, 11, 12, 13

SAFETY = 0.9
GROWTH_CLAMP = 5.0
SHRINK_CLAMP = 0.1
# PI controller exponents for an order-7(8) pair.
PI_ALPHA = 0.7 / 8.0
PI_BETA = 0.4 / 8.0

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_UNDERFLOW = 2
STATUS_BAD_RHS = 3


def error_norm(err, y_old, y_new, abs_tol, rel_tol):
    sc = abs_tol + rel_tol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean((err / sc) ** 2)))


def initial_step(f, t0, y0, f0, direction, abs_tol, rel_tol, span):
    """Hairer-style initial step size guess."""
    sc = abs_tol + rel_tol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6 * span
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + direction * h0 * f0
    f1 = np.asarray(f(t0 + direction * h0, y1), dtype=float)
    d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    dmax = max(d1, d2)
    if dmax <= 1e-15:
        h1 = max(1e-6 * span, h0 * 1e-3)
    else:
        h1 = (0.01 / dmax) ** (1.0 / 8.0)
    return direction * min(100 * h0, h1, span)


def accept_factor(err, err_prev):
    if err == 0.0:
        return GROWTH_CLAMP
    factor = SAFETY * err ** (-PI_ALPHA) * err_prev ** PI_BETA
    return min(GROWTH_CLAMP, max(SHRINK_CLAMP, factor))


def reject_factor(err):
    factor = SAFETY * err ** (-1.0 / 8.0)
    return min(1.0, max(SHRINK_CLAMP, factor))
