"""Adaptive Dormand-Prince 5(4) stepping for affine systems ``x' = M x + f``.

``M`` is passed as coordinate triplets since the moment drift is sparse.

The kernel runs until the rates stay below ``steady_tol * |x|`` for
``hold_time`` consecutive time units, or until ``t_max``.
"""
import numpy as np
from numba import njit

# Dormand-Prince tableau
_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
        [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
        [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4


@njit(cache=True)
def _rate(rows, cols, vals, f, x, out):
    for i in range(x.shape[0]):
        out[i] = f[i]
    for k in range(vals.shape[0]):
        out[rows[k]] += vals[k] * x[cols[k]]


@njit(cache=True)
def _norm(v):
    acc = 0.0
    for i in range(v.shape[0]):
        acc += v[i] * v[i]
    return np.sqrt(acc)


@njit(cache=True)
def dopri_to_steady(
    rows, cols, vals, f, x0, t_max, h_max, rtol, atol, steady_tol, hold_time, A, B5, E
):
    """Returns (x, t, steps, settled, residual, max_abs)."""
    n = x0.shape[0]
    x = x0.copy()
    K = np.zeros((7, n))
    xs = np.zeros(n)
    xnew = np.zeros(n)
    max_abs = np.abs(x0)
    _rate(rows, cols, vals, f, x, K[0])
    t = 0.0
    h = min(h_max, 1e-3 * h_max + 1e-12)
    steps = 0
    held = 0.0
    residual = _norm(K[0])
    while t < t_max:
        if t + h > t_max:
            h = t_max - t
        for s in range(1, 7):
            for i in range(n):
                acc = x[i]
                for r in range(s):
                    acc += h * A[s, r] * K[r, i]
                xs[i] = acc
            _rate(rows, cols, vals, f, xs, K[s])
        err = 0.0
        for i in range(n):
            acc = x[i]
            e = 0.0
            for s in range(7):
                acc += h * B5[s] * K[s, i]
                e += h * E[s] * K[s, i]
            xnew[i] = acc
            sc = atol + rtol * max(abs(x[i]), abs(acc))
            err += (e / sc) ** 2
        err = np.sqrt(err / n)
        if err <= 1.0:
            t += h
            steps += 1
            for i in range(n):
                x[i] = xnew[i]
                if abs(x[i]) > max_abs[i]:
                    max_abs[i] = abs(x[i])
                K[0, i] = K[6, i]
            residual = _norm(K[0])
            if residual <= steady_tol * _norm(x):
                held += h
                if held >= hold_time:
                    return x, t, steps, True, residual, max_abs
            else:
                held = 0.0
        if err == 0.0:
            fac = 5.0
        else:
            fac = min(5.0, max(0.2, 0.9 * err ** (-0.2)))
        h = min(h * fac, h_max)
    return x, t, steps, False, residual, max_abs


def integrate_affine(M, f, x0, *, t_max, h_max, rtol=1e-10, atol=1e-12, steady_tol, hold_time):
    M = np.asarray(M, dtype=float)
    rows, cols = np.nonzero(M)
    vals = np.ascontiguousarray(M[rows, cols])
    f = np.ascontiguousarray(f, dtype=float)
    x0 = np.ascontiguousarray(x0, dtype=float)
    return dopri_to_steady(
        rows.astype(np.int64), cols.astype(np.int64), vals, f, x0,
        float(t_max), float(h_max), rtol, atol, steady_tol, hold_time,
        _A, _B5, _E,
    )
