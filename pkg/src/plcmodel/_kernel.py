"""Compiled Dormand-Prince 5(4) paths of the PC system, used by the fitter.

Same tableau, error norm, PI controller and simplex projection as
``integrate.dopri45``.  A batch of parameter sets is advanced with one
shared step sequence (the error norm is the maximum over the batch), so
finite differences between members are not polluted by step-size
switching.
"""

import numpy as np
from numba import njit

from .integrate import (
    _A21, _A31, _A32, _A41, _A42, _A43, _A51, _A52, _A53, _A54,
    _A61, _A62, _A63, _A64, _A65, _B1, _B3, _B4, _B5, _B6,
    _E1, _E3, _E4, _E5, _E6, _E7, _FAC_MAX, _FAC_MIN, _PI_ALPHA, _PI_BETA, _SAFETY,
)


@njit(cache=True)
def _project(x, y):
    excess = x + y - 1.0
    if excess > 0.0:
        x -= 0.5 * excess
        y -= 0.5 * excess
    if x < 0.0:
        x = 0.0
        y = min(max(y, 0.0), 1.0)
    elif y < 0.0:
        y = 0.0
        x = min(max(x, 0.0), 1.0)
    return x, y


@njit(cache=True)
def _rhs(P, X, Y, KX, KY):
    for i in range(X.shape[0]):
        x, y = _project(X[i], Y[i])
        KX[i] = P[i, 0] * x * (1.0 - x) - P[i, 1] * x * y
        KY[i] = P[i, 2] * y * (1.0 - y) - P[i, 3] * x * y


@njit(cache=True)
def plc_paths(P, t_eval, atol, rtol, h0, max_steps):
    """x and y of every batch member at the sorted positive times ``t_eval``.

    ``P`` has one row ``(alpha, beta, gamma, delta, x0, y0)`` per member.
    Returns ``(xs, ys, status)`` with arrays of shape ``(m, n)``; status is
    0 on success, -1 on step size underflow, -2 on a non-finite error,
    -3 when more than ``max_steps`` steps (accepted or rejected) were needed.
    """
    m = P.shape[0]
    n = t_eval.shape[0]
    xs = np.empty((m, n))
    ys = np.empty((m, n))
    t_end = t_eval[n - 1]
    hmin = 1e-12 * t_end
    X = P[:, 4].copy()
    Y = P[:, 5].copy()
    K = np.empty((14, m))
    T = np.empty((2, m))
    XN = np.empty(m)
    YN = np.empty(m)
    _rhs(P, X, Y, K[0], K[1])
    t = 0.0
    h = min(h0, t_end)
    err_prev = 1.0
    rejected_last = False
    ti = 0
    steps = 0
    while ti < n:
        steps += 1
        if steps > max_steps:
            return xs, ys, -3
        stop_at = t_eval[ti]
        h_ctrl = h
        landing = False
        if t + h >= stop_at:
            h = stop_at - t
            landing = True
        if h < hmin and not landing:
            return xs, ys, -1
        for i in range(m):
            T[0, i] = X[i] + h * _A21 * K[0, i]
            T[1, i] = Y[i] + h * _A21 * K[1, i]
        _rhs(P, T[0], T[1], K[2], K[3])
        for i in range(m):
            T[0, i] = X[i] + h * (_A31 * K[0, i] + _A32 * K[2, i])
            T[1, i] = Y[i] + h * (_A31 * K[1, i] + _A32 * K[3, i])
        _rhs(P, T[0], T[1], K[4], K[5])
        for i in range(m):
            T[0, i] = X[i] + h * (_A41 * K[0, i] + _A42 * K[2, i] + _A43 * K[4, i])
            T[1, i] = Y[i] + h * (_A41 * K[1, i] + _A42 * K[3, i] + _A43 * K[5, i])
        _rhs(P, T[0], T[1], K[6], K[7])
        for i in range(m):
            T[0, i] = X[i] + h * (_A51 * K[0, i] + _A52 * K[2, i] + _A53 * K[4, i] + _A54 * K[6, i])
            T[1, i] = Y[i] + h * (_A51 * K[1, i] + _A52 * K[3, i] + _A53 * K[5, i] + _A54 * K[7, i])
        _rhs(P, T[0], T[1], K[8], K[9])
        for i in range(m):
            T[0, i] = X[i] + h * (
                _A61 * K[0, i] + _A62 * K[2, i] + _A63 * K[4, i] + _A64 * K[6, i] + _A65 * K[8, i]
            )
            T[1, i] = Y[i] + h * (
                _A61 * K[1, i] + _A62 * K[3, i] + _A63 * K[5, i] + _A64 * K[7, i] + _A65 * K[9, i]
            )
        _rhs(P, T[0], T[1], K[10], K[11])
        for i in range(m):
            XN[i] = X[i] + h * (_B1 * K[0, i] + _B3 * K[4, i] + _B4 * K[6, i] + _B5 * K[8, i] + _B6 * K[10, i])
            YN[i] = Y[i] + h * (_B1 * K[1, i] + _B3 * K[5, i] + _B4 * K[7, i] + _B5 * K[9, i] + _B6 * K[11, i])
        _rhs(P, XN, YN, K[12], K[13])
        err = 0.0
        for i in range(m):
            ex = h * (_E1 * K[0, i] + _E3 * K[4, i] + _E4 * K[6, i] + _E5 * K[8, i] + _E6 * K[10, i] + _E7 * K[12, i])
            ey = h * (_E1 * K[1, i] + _E3 * K[5, i] + _E4 * K[7, i] + _E5 * K[9, i] + _E6 * K[11, i] + _E7 * K[13, i])
            sx = atol + rtol * max(abs(X[i]), abs(XN[i]))
            sy = atol + rtol * max(abs(Y[i]), abs(YN[i]))
            err = max(err, abs(ex) / sx, abs(ey) / sy)
        if not np.isfinite(err):
            return xs, ys, -2
        if err <= 1.0:
            t = stop_at if landing else t + h
            moved = False
            for i in range(m):
                xp, yp = _project(XN[i], YN[i])
                if P[i, 4] == 0.0:
                    xp = 0.0
                if P[i, 5] == 0.0:
                    yp = 0.0
                if xp != XN[i] or yp != YN[i]:
                    moved = True
                X[i] = xp
                Y[i] = yp
            if moved:
                _rhs(P, X, Y, K[0], K[1])
            else:
                K[0, :] = K[12]
                K[1, :] = K[13]
            if landing:
                xs[:, ti] = X
                ys[:, ti] = Y
                ti += 1
            err_c = max(err, 1e-10)
            fac = _SAFETY * err_c ** -_PI_ALPHA * err_prev ** _PI_BETA
            fac = min(_FAC_MAX, max(_FAC_MIN, fac))
            if rejected_last:
                fac = min(fac, 1.0)
            h = max(h * fac, h_ctrl) if landing else h * fac
            err_prev = err_c
            rejected_last = False
        else:
            h *= max(_FAC_MIN, _SAFETY * err ** -0.2)
            rejected_last = True
    return xs, ys, 0
