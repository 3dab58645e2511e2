"""Compiled right-hand side and embedded Runge-Kutta stepper.

The stepper follows the usual Hairer-Norsett-Wanner step-size control
(safety 0.9, factor clamped to [0.2, 10]) with the Dormand-Prince 5(4) and
8(5,3) tableaux shipped by scipy. Samples are hit exactly by shortening the
step that would overshoot them.
"""
import math

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dop
from scipy.integrate._ivp.rk import RK45 as _RK45

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0

RK45, DOP853 = 0, 1


def _tableau(method):
    if method == DOP853:
        n = _dop.N_STAGES
        return (n, np.ascontiguousarray(_dop.A[:n, :n]), _dop.B.copy(),
                _dop.C[:n].copy(), _dop.E5.copy(), _dop.E3.copy(), 7)
    n = _RK45.n_stages
    A = np.zeros((n, n))
    A[:, :_RK45.A.shape[1]] = _RK45.A
    return (n, A, _RK45.B.copy(), _RK45.C.copy(), _RK45.E.copy(),
            np.zeros_like(_RK45.E), 4)


TABLEAUX = {m: _tableau(m) for m in (RK45, DOP853)}


@njit(cache=True)
def sech_value(x, kt, k):
    # x is the scaled time kt * t
    ratio = k / kt
    if x < 0.0:
        e = math.exp(x)
        num = (k - kt) + 2.0 * kt / (1.0 + e)
        return num * math.exp(0.5 * x) / (2.0 * math.sqrt(ratio + (ratio - 1.0) * e))
    e = math.exp(-x)
    num = (k - kt) + 2.0 * kt * e / (1.0 + e)
    return num / (2.0 * math.sqrt((ratio - 1.0) + ratio * e))


@njit(cache=True)
def control_value(c, t):
    kind = int(c[0])
    if kind == 0:
        return 0.0
    if kind == 1:
        return c[1]
    if kind == 2:
        return sech_value(c[3] * (c[1] * t + c[2]), c[3], c[4])
    if kind == 3:
        return sech_value(c[2] * (c[1] - abs(t)), c[2], c[3])
    if kind == 4:
        return c[1] * math.sin(c[2] * t + c[3])
    return math.nan


@njit(cache=True)
def rhs(t, y, out, qf, rf, wf, G, ctrls):
    a = control_value(ctrls[0], t)
    b = control_value(ctrls[1], t)
    q1 = y[0]
    q2 = y[1]
    c1 = y[2]
    c2 = y[3]
    s1 = 0j
    s2 = 0j
    n = wf.shape[0]
    for i in range(n):
        p = y[4 + i]
        g1 = G[i, 0]
        g2 = G[i, 1]
        s1 += g1 * p
        s2 += g2 * p
        v = wf[i] * p + g1 * c1 + g2 * c2
        out[4 + i] = complex(v.imag, -v.real)
    v = qf[0] * q1 + a * c1
    out[0] = complex(v.imag, -v.real)
    v = qf[1] * q2 + b * c2
    out[1] = complex(v.imag, -v.real)
    v = rf[0] * c1 + s1 + a * q1
    out[2] = complex(v.imag, -v.real)
    v = rf[1] * c2 + s2 + b * q2
    out[3] = complex(v.imag, -v.real)


@njit(cache=True)
def _rms(v, scale):
    s = 0.0
    for i in range(v.shape[0]):
        x = v[i] / scale[i]
        s += x.real * x.real + x.imag * x.imag
    return math.sqrt(s / v.shape[0])


@njit(cache=True)
def _sqnorm(y):
    s = 0.0
    for i in range(y.shape[0]):
        s += y[i].real * y[i].real + y[i].imag * y[i].imag
    return s


@njit(cache=True)
def integrate_kernel(y0, t0, t_end, samples, rtol, atol, h_init, max_steps,
                     n_stages, A, B, C, E5, E3, err_order, dop,
                     qf, rf, wf, G, ctrls):
    """Integrate from t0 to t_end; returns (samples, stats, status, fail_time).

    stats = [accepted, rejected, n_eval, max |N(t) - N(t0)|, last h];
    status 0 ok, 1 step underflow, 2 step budget exhausted.
    """
    dim = y0.shape[0]
    K = np.zeros((n_stages + 1, dim), dtype=np.complex128)
    out = np.zeros((samples.shape[0], dim), dtype=np.complex128)
    stats = np.zeros(5)
    y = y0.copy()
    t = t0
    n0 = _sqnorm(y0)
    max_drift = 0.0
    ynew = np.empty_like(y)
    ytmp = np.empty_like(y)
    f = np.empty_like(y)
    scale = np.empty(dim)
    rhs(t, y, f, qf, rf, wf, G, ctrls)
    nfev = 1
    exponent = -1.0 / (err_order + 1.0)

    k = 0
    while k < samples.shape[0] and samples[k] <= t0:
        out[k] = y
        k += 1

    # initial step (Hairer-Wanner heuristic)
    h_abs = h_init
    if h_abs <= 0.0:
        for i in range(dim):
            scale[i] = atol + abs(y[i]) * rtol
        d0 = _rms(y, scale)
        d1 = _rms(f, scale)
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6 * (t_end - t0)
        else:
            h0 = 0.01 * d0 / d1
        h0 = min(h0, t_end - t0)
        for i in range(dim):
            ytmp[i] = y[i] + h0 * f[i]
        rhs(t + h0, ytmp, ynew, qf, rf, wf, G, ctrls)
        nfev += 1
        for i in range(dim):
            ynew[i] = ynew[i] - f[i]
        d2 = _rms(ynew, scale) / h0
        if d1 <= 1e-15 and d2 <= 1e-15:
            h1 = max(1e-6 * (t_end - t0), h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1.0 / (err_order + 1.0))
        h_abs = min(100.0 * h0, h1)

    accepted = 0
    rejected = 0
    status = 0
    fail_time = math.nan
    while t < t_end:
        if accepted + rejected >= max_steps:
            status = 2
            fail_time = t
            break
        stop = t_end
        if k < samples.shape[0] and samples[k] < stop:
            stop = samples[k]
        min_step = 10.0 * abs(np.nextafter(t, math.inf) - t)
        if h_abs < min_step:
            status = 1
            fail_time = t
            break
        t_new = t + h_abs
        clipped = False
        free_h = h_abs
        if t_new >= stop:
            t_new = stop
            clipped = True
        h = t_new - t

        # stages
        for i in range(dim):
            K[0, i] = f[i]
        for s in range(1, n_stages):
            for i in range(dim):
                acc = 0j
                for j in range(s):
                    acc += A[s, j] * K[j, i]
                ytmp[i] = y[i] + h * acc
            rhs(t + C[s] * h, ytmp, K[s], qf, rf, wf, G, ctrls)
        for i in range(dim):
            acc = 0j
            for s in range(n_stages):
                acc += B[s] * K[s, i]
            ynew[i] = y[i] + h * acc
        rhs(t_new, ynew, K[n_stages], qf, rf, wf, G, ctrls)
        nfev += n_stages

        for i in range(dim):
            scale[i] = atol + max(abs(y[i]), abs(ynew[i])) * rtol
        if dop:
            e5 = 0.0
            e3 = 0.0
            for i in range(dim):
                a5 = 0j
                a3 = 0j
                for s in range(n_stages + 1):
                    a5 += E5[s] * K[s, i]
                    a3 += E3[s] * K[s, i]
                a5 /= scale[i]
                a3 /= scale[i]
                e5 += a5.real * a5.real + a5.imag * a5.imag
                e3 += a3.real * a3.real + a3.imag * a3.imag
            if e5 == 0.0 and e3 == 0.0:
                err = 0.0
            else:
                err = abs(h) * e5 / math.sqrt((e5 + 0.01 * e3) * dim)
        else:
            e = 0.0
            for i in range(dim):
                a5 = 0j
                for s in range(n_stages + 1):
                    a5 += E5[s] * K[s, i]
                a5 = h * a5 / scale[i]
                e += a5.real * a5.real + a5.imag * a5.imag
            err = math.sqrt(e / dim)

        if err < 1.0:
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = min(MAX_FACTOR, SAFETY * err ** exponent)
            accepted += 1
            t = t_new
            for i in range(dim):
                y[i] = ynew[i]
                f[i] = K[n_stages, i]
            h_abs = h * factor
            if clipped:
                h_abs = max(h_abs, min(free_h, h * MAX_FACTOR))
            drift = abs(_sqnorm(y) - n0)
            if drift > max_drift:
                max_drift = drift
            while k < samples.shape[0] and samples[k] <= t:
                out[k] = y
                k += 1
        else:
            rejected += 1
            h_abs = h * max(MIN_FACTOR, SAFETY * err ** exponent)

    stats[0] = accepted
    stats[1] = rejected
    stats[2] = nfev
    stats[3] = max_drift
    stats[4] = h_abs
    return out, stats, status, fail_time
