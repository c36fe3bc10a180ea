"""High-precision reference implementations used as test oracles.

Everything here is written directly from the defining formulas with mpmath
and shares no code with the package.
"""

import mpmath as mp

mp.mp.dps = 40


def tanh_sat(b):
    b = mp.mpf(b)
    return (lambda s: b * mp.tanh(s / b)), (lambda s: mp.sech(s / b) ** 2)


def atan_sat(b):
    k = mp.pi / (2 * mp.mpf(b))
    return (lambda s: mp.atan(k * s) / k), (lambda s: 1 / (1 + (k * s) ** 2))


def xi_quartic(r):
    r = mp.mpf(r)

    def xi(s):
        a = abs(s) - r
        return s if a <= 0 else s + mp.sign(s) * a ** 4 / (4 * r ** 2)

    def dxi(s):
        a = abs(s) - r
        return mp.mpf(1) if a <= 0 else 1 + a ** 3 / r ** 2

    return xi, dxi


def integral(f, x):
    return mp.quad(f, [0, x])


def u_option1(p, v, sig=tanh_sat(1), rho=tanh_sat(1), xi=xi_quartic(1), k=1, r=1):
    p, v = mp.mpf(p), mp.mpf(v)
    s, ds = sig
    x, dx = xi
    z = x(v) + s(p)
    ratio = 1 if abs(v) <= r else (v + s(p)) / z
    damping = 0 if rho is None else rho[0](z)
    return -damping - ratio * k * s(p) / dx(v) - ds(p) * v / dx(v)


def lyap_option1(p, v, sig=tanh_sat(1), rho=tanh_sat(1), xi=xi_quartic(1), k=1):
    p, v = mp.mpf(p), mp.mpf(v)
    s, _ = sig
    x, dx = xi
    z = x(v) + s(p)
    V = k * integral(s, p) + z * z / 2
    W = k * s(p) ** 2 + (0 if rho is None else dx(v) * z * rho[0](z))
    return V, W


def u_option2(p, v, sig=tanh_sat(1), rho=tanh_sat(1)):
    return -sig[0](mp.mpf(p)) - rho[0](mp.mpf(v))


def lyap_option2(p, v, beta, sig=tanh_sat(1), rho=tanh_sat(1), sb=1, rb=1):
    """Components built from their integral definitions, not simplified forms."""
    p, v, beta = mp.mpf(p), mp.mpf(v), mp.mpf(beta)
    s, ds = sig
    g, dg = rho
    V1 = sb * integral(s, p)
    V2 = beta * integral(lambda t: rb ** 2 * t - dg(t) * g(t), v)
    V3 = beta * rb ** 2 * integral(s, p) + beta * s(p) * g(v) + sb * v * v / 2
    return V1, V2, V3


def vdot(lyap_v, u, p, v):
    """dV/dt along p' = v, v' = u from mpmath derivatives of V."""
    p, v = mp.mpf(p), mp.mpf(v)
    gp = mp.diff(lambda x: lyap_v(x, v), p)
    gv = mp.diff(lambda y: lyap_v(p, y), v)
    return gp * v + gv * u(p, v)
