"""Compiled RK4 chunk integrator for the shipped function instances.

Only configs whose saturations and shaping function carry a ``kernel`` tag
take this path; everything else steps through the numpy evaluators.  The
formulas mirror :func:`satctl.controllers.control_kernel` exactly and the
test suite checks the two against each other.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_KINDS = {"tanh": 0, "atan": 1}


@njit(cache=True)
def _sat(kind, b, x):
    if kind == 0:
        return b * math.tanh(x / b)
    k = math.pi / (2.0 * b)
    return math.atan(k * x) / k


@njit(cache=True)
def _dsat(kind, b, x):
    if kind == 0:
        e = math.exp(-2.0 * abs(x / b))
        return 4.0 * e / (1.0 + e) ** 2
    k = math.pi / (2.0 * b)
    return 1.0 / (1.0 + (k * x) ** 2)


@njit(cache=True)
def _xi(r, n, s):
    a = abs(s) - r
    if a <= 0.0:
        return s
    return s + math.copysign(a ** n / (n * r ** (n - 2)), s)


@njit(cache=True)
def _dxi(r, n, s):
    a = abs(s) - r
    if a <= 0.0:
        return 1.0
    return 1.0 + a ** (n - 1) / r ** (n - 2)


@njit(cache=True)
def _u(params, p, v):
    opt, sk, sb, rk, rb, zero_rho, r, n, k = params
    sig = _sat(int(sk), sb, p)
    if opt == 2.0:
        return -sig - _sat(int(rk), rb, v)
    ni = int(n)
    xv = _xi(r, ni, v)
    dxv = _dxi(r, ni, v)
    den = xv + sig
    ratio = 1.0
    if abs(v) > r:
        ratio = (v + sig) / den
    out = -(ratio * k * sig + _dsat(int(sk), sb, p) * v) / dxv
    if zero_rho == 0.0:
        out -= _sat(int(rk), rb, den)
    return out


@njit(cache=True)
def rk4_chunk(params, p, v, dt, P, V):
    """Fill rows 1.. of ``P``/``V`` by stepping from row 0; advance ``p``/``v`` in place."""
    m, batch = P.shape
    half = 0.5 * dt
    for i in range(batch):
        x = P[0, i]
        y = V[0, i]
        for j in range(1, m):
            a1 = _u(params, x, y)
            x2 = x + half * y
            y2 = y + half * a1
            a2 = _u(params, x2, y2)
            x3 = x + half * y2
            y3 = y + half * a2
            a3 = _u(params, x3, y3)
            x4 = x + dt * y3
            y4 = y + dt * a3
            a4 = _u(params, x4, y4)
            x = x + dt / 6.0 * (y + 2.0 * y2 + 2.0 * y3 + y4)
            y = y + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            P[j, i] = x
            V[j, i] = y
        p[i] = x
        v[i] = y


def kernel_params(c):
    """Packed parameter vector for :func:`rk4_chunk`, or None if unsupported."""
    sk = c.sigma.kernel
    if sk is None or sk[0] not in _KINDS:
        return None
    if c.zero_rho:
        rk = ("tanh", 1.0)
    else:
        rk = c.rho.kernel
        if rk is None or rk[0] not in _KINDS:
            return None
    r, n = 1.0, 4
    if int(c.option) == 1:
        if c.xi.kernel is None:
            return None
        r, n = c.xi.kernel
    return np.array([float(int(c.option)), _KINDS[sk[0]], sk[1], _KINDS[rk[0]], rk[1],
                     1.0 if c.zero_rho else 0.0, r, n, c.k_sigma])
