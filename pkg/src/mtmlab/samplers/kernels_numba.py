"""Jit-compiled chunk kernels for the Gaussian chains.

Each kernel advances one chain through a chunk of steps, consuming
pregenerated per-step randoms. The arithmetic mirrors steps.py exactly:
log pi(x) = -|x|^2/2, Gumbel-argmax selection with first-index ties,
log-sum-exp weight sums, acceptance test log(u) < log_alpha.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _logpi(x):
    s = 0.0
    for i in range(x.shape[0]):
        s += x[i] * x[i]
    return -0.5 * s


@njit(cache=True)
def mh_chunk(x, noise, acc_u, sigma, out_states, out_la, out_acc):
    count, d = noise.shape
    lpx = _logpi(x)
    y = np.empty(d)
    for k in range(count):
        for i in range(d):
            y[i] = x[i] + sigma * noise[k, i]
        lpy = _logpi(y)
        la = lpy - lpx
        if la > 0.0:
            la = 0.0
        out_la[k] = la
        if np.log(acc_u[k]) < la:
            out_acc[k] = True
            for i in range(d):
                x[i] = y[i]
            lpx = lpy
        for i in range(d):
            out_states[k, i] = x[i]


@njit(cache=True)
def ideal_chunk(x, noise, acc_u, sigma, theta, out_states, out_la, out_acc):
    count, d = noise.shape
    s2 = sigma * sigma
    rho = 1.0 / (1.0 + theta * s2)
    sd = np.sqrt(s2 * rho)
    # log alpha = (1 - 2 theta) (lpy - lpx) + theta^2 s2 (|x|^2 - |y|^2) / (2 (1 + theta s2))
    c_qw = theta * theta * s2 * rho / 2.0
    y = np.empty(d)
    lpx = _logpi(x)
    for k in range(count):
        for i in range(d):
            y[i] = rho * x[i] + sd * noise[k, i]
        lpy = _logpi(y)
        # |x|^2 - |y|^2 == 2 (lpy - lpx)
        la = (1.0 - 2.0 * theta) * (lpy - lpx) + 2.0 * c_qw * (lpy - lpx)
        if la > 0.0:
            la = 0.0
        out_la[k] = la
        if np.log(acc_u[k]) < la:
            out_acc[k] = True
            for i in range(d):
                x[i] = y[i]
            lpx = lpy
        for i in range(d):
            out_states[k, i] = x[i]


@njit(cache=True)
def _logsumexp(v):
    m = v[0]
    for i in range(1, v.shape[0]):
        if v[i] > m:
            m = v[i]
    s = 0.0
    for i in range(v.shape[0]):
        s += np.exp(v[i] - m)
    return m + np.log(s)


@njit(cache=True)
def mtm_chunk(
    x, prop, sel_u, shadow, acc_u, lazy_u, sigma, theta, lazy,
    out_states, out_la, out_acc, out_sel, out_lazy,
):
    count, n, d = prop.shape
    ys = np.empty((n, d))
    lw_xy = np.empty(n)
    lw_yz = np.empty(n)
    lpy_all = np.empty(n)
    lpx = _logpi(x)
    for k in range(count):
        if lazy and lazy_u[k] < 0.5:
            out_lazy[k] = True
            out_sel[k] = -1
            out_la[k] = -np.inf
            for i in range(d):
                out_states[k, i] = x[i]
            continue
        for j in range(n):
            for i in range(d):
                ys[j, i] = x[i] + sigma * prop[k, j, i]
            lpy_all[j] = _logpi(ys[j])
            lw_xy[j] = theta * (lpy_all[j] - lpx)
        best = -np.inf
        I = 0
        for j in range(n):
            score = lw_xy[j] - np.log(-np.log(sel_u[k, j]))
            if score > best:
                best = score
                I = j
        lse_x = _logsumexp(lw_xy)
        lpy = lpy_all[I]
        lw_sel = lw_xy[I]
        for j in range(n):
            if j == I:
                lw_yz[j] = -lw_sel
            else:
                s = 0.0
                for i in range(d):
                    z = ys[I, i] + sigma * shadow[k, j, i]
                    s += z * z
                lw_yz[j] = theta * (-0.5 * s - lpy)
        lse_y = _logsumexp(lw_yz)
        la = (1.0 - 2.0 * theta) * (lpy - lpx) + (lse_x - lse_y)
        if la > 0.0:
            la = 0.0
        out_la[k] = la
        out_sel[k] = I
        if np.log(acc_u[k]) < la:
            out_acc[k] = True
            for i in range(d):
                x[i] = ys[I, i]
            lpx = lpy
        for i in range(d):
            out_states[k, i] = x[i]
