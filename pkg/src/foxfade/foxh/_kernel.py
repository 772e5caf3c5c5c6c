"""Compiled inner loop of the tensor sum.

The outer grid (all variables but one) carries a precomputed log-tensor. The
innermost variable is swept here together with every factor whose support
includes it, so no N^d array is ever materialized.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_STIRLING = np.array([
    1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0,
    -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0, 43867.0 / 244188.0,
    -174611.0 / 125400.0,
])
_HALF_LN_2PI = 0.5 * math.log(2.0 * math.pi)


@njit(cache=True)
def lgamma_c(z):
    """log Gamma(z) up to a multiple of 2 pi i; +inf at poles."""
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        return complex(np.inf, 0.0)
    acc = 0j
    prod = 1.0 + 0j
    # ten Stirling terms are exact to rounding once |z| >= 7
    while z.real < 0.0 or z.real * z.real + z.imag * z.imag < 49.0:
        prod *= z
        z += 1.0
        if abs(prod.real) + abs(prod.imag) > 1e150:
            acc += np.log(prod)
            prod = 1.0 + 0j
    acc += np.log(prod)
    inv = 1.0 / z
    inv2 = inv * inv
    ser = complex(_STIRLING[9], 0.0)
    for k in range(8, -1, -1):
        ser = ser * inv2 + _STIRLING[k]
    return (z - 0.5) * np.log(z) - z + _HALF_LN_2PI + ser * inv - acc


@njit(cache=True)
def sweep_log(B, X, W, kind, sign, nrat, s_in, f_in, lvl_out, lvl_in):
    """General path: gamma factors in log space, rational ones as a running product.

    ``lvl_out``/``lvl_in`` give each node's sub-lattice level (1: on the 2h
    lattice, 2: on the 4h lattice). Returns (log_scale, total, sub_total,
    sub2_total, abs_total) with sums scaled by exp(-log_scale).
    """
    n_out = B.shape[0]
    n_in = s_in.shape[0]
    nf = W.shape[0]
    buf = np.empty(n_in, dtype=np.complex128)
    rbuf = np.empty(n_in, dtype=np.complex128)
    M = -np.inf
    S = 0j
    Ssub = 0j
    Ssub2 = 0j
    A = 0.0
    for i in range(n_out):
        b = B[i]
        if b.real == -np.inf:
            continue
        rowmax = -np.inf
        for j in range(n_in):
            L = b + f_in[j]
            R = 1.0 + 0j
            for f in range(nf):
                arg = X[f, i] + W[f] * s_in[j]
                if kind[f] == 0:
                    g = lgamma_c(arg)
                    if sign[f] > 0:
                        L += g
                    else:
                        L -= g
                else:
                    # rational factors stay multiplicative; they are O(poly(s))
                    for k in range(nrat[f]):
                        if sign[f] > 0:
                            R *= arg + k
                        else:
                            R /= arg + k
            buf[j] = L
            rbuf[j] = R
            if L.real > rowmax:
                rowmax = L.real
        if rowmax == -np.inf or math.isnan(rowmax):
            continue
        if rowmax > M:
            if M > -np.inf:
                sc = math.exp(M - rowmax)
                S *= sc
                Ssub *= sc
                Ssub2 *= sc
                A *= sc
            M = rowmax
        lo = lvl_out[i]
        for j in range(n_in):
            L = buf[j]
            if L.real == -np.inf:
                continue
            e = np.exp(L - M) * rbuf[j]
            S += e
            A += abs(e)
            lv = min(lo, lvl_in[j])
            if lv >= 1:
                Ssub += e
                if lv >= 2:
                    Ssub2 += e
    return M, S, Ssub, Ssub2, A


@njit(cache=True)
def sweep_rational(EB, X, W, sign, nrat, s_in, EF, lvl_out, lvl_in):
    """Fast path when every inner factor is rational: pure complex arithmetic.

    ``EB`` and ``EF`` are the outer and inner exponentials, already scaled.
    """
    n_out = EB.shape[0]
    n_in = s_in.shape[0]
    nf = W.shape[0]
    S = 0j
    Ssub = 0j
    Ssub2 = 0j
    A = 0.0
    for i in range(n_out):
        eb = EB[i]
        if eb == 0:
            continue
        lo = lvl_out[i]
        row = 0j
        rowsub = 0j
        rowsub2 = 0j
        rowabs = 0.0
        for j in range(n_in):
            v = EF[j]
            for f in range(nf):
                arg = X[f, i] + W[f] * s_in[j]
                for k in range(nrat[f]):
                    if sign[f] > 0:
                        v *= arg + k
                    else:
                        v /= arg + k
            row += v
            rowabs += abs(v)
            lv = min(lo, lvl_in[j])
            if lv >= 1:
                rowsub += v
                if lv >= 2:
                    rowsub2 += v
        S += eb * row
        A += abs(eb) * rowabs
        Ssub += eb * rowsub
        Ssub2 += eb * rowsub2
    return S, Ssub, Ssub2, A
