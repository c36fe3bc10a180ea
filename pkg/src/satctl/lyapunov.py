"""Lyapunov functions and dissipation rates for both feedback laws.

``W`` is always the closed-form rate with ``dV/dt = -W`` along the closed
loop; nothing here differentiates ``V``.  The certifier checks that
identity independently with finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .controllers import ControllerConfig, Option, State
from .errors import ParameterError
from .sat_functions import integral_of

SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class LyapunovEvaluation:
    V: object
    W: object
    components: Optional[dict] = None


def _require(c: ControllerConfig, option: Option):
    if c.option is not option:
        raise ParameterError(f"expected an Option {int(option)} config, got Option {int(c.option)}")


def lyap_option1(s: State, c: ControllerConfig) -> LyapunovEvaluation:
    """``V = k int_0^p sigma + (xi(v) + sigma(p))^2 / 2`` and its rate.

    With ``zero_rho`` the rate reduces to ``k sigma(p)^2``.
    """
    _require(c, Option.ONE)
    p, v = s.arrays()
    sig = c.sigma.value_at(p)
    z = c.xi.value_at(v) + sig
    V = c.k_sigma * integral_of(c.sigma, p) + 0.5 * z * z
    W = c.k_sigma * sig * sig
    if not c.zero_rho:
        W = W + c.xi.deriv_at(v) * z * c.rho.value_at(z)
    return LyapunovEvaluation(V, W)


def lyap_option2(s: State, c: ControllerConfig) -> LyapunovEvaluation:
    """Composite ``V4 = V1 + V2 + V3`` with every component exposed."""
    _require(c, Option.TWO)
    p, v = s.arrays()
    beta = c.beta
    sb = c.sigma.chi_prime_bar
    rb2 = c.rho.chi_prime_bar ** 2
    sig = c.sigma.value_at(p)
    dsig = c.sigma.deriv_at(p)
    rho = c.rho.value_at(v)
    drho = c.rho.deriv_at(v)
    int_sig = integral_of(c.sigma, p)

    V1 = sb * int_sig
    # int_0^v (rb2 s - rho' rho) ds in closed form
    V2 = beta * (0.5 * rb2 * v * v - 0.5 * rho * rho)
    V3 = beta * rb2 * int_sig + beta * sig * rho + 0.5 * sb * v * v

    W1 = -sb * sig * v
    lead = beta * (rb2 * v - drho * rho)
    W21 = lead * sig
    W22 = lead * rho
    W3 = (-beta * rb2 * sig * v - beta * dsig * rho * v + beta * sig * sig * drho
          + beta * sig * drho * rho + sb * v * (sig + rho))
    W4 = beta * drho * sig * sig + W22 + sb * v * rho * (1.0 - beta * dsig / sb)
    V4 = V1 + V2 + V3
    comps = {"V1": V1, "V2": V2, "V3": V3, "W1": W1, "W21": W21, "W22": W22, "W3": W3}
    return LyapunovEvaluation(V4, W4, comps)


def lyapunov(s: State, c: ControllerConfig) -> LyapunovEvaluation:
    return lyap_option1(s, c) if c.option is Option.ONE else lyap_option2(s, c)


def lyap_gradient(s: State, c: ControllerConfig):
    """Closed-form ``(dV/dp, dV/dv)``."""
    p, v = s.arrays()
    sig = c.sigma.value_at(p)
    dsig = c.sigma.deriv_at(p)
    if c.option is Option.ONE:
        z = c.xi.value_at(v) + sig
        return c.k_sigma * sig + z * dsig, z * c.xi.deriv_at(v)
    beta = c.beta
    sb = c.sigma.chi_prime_bar
    rb2 = c.rho.chi_prime_bar ** 2
    rho = c.rho.value_at(v)
    drho = c.rho.deriv_at(v)
    gp = sb * sig + beta * rb2 * sig + beta * dsig * rho
    gv = beta * (rb2 * v - drho * rho) + beta * sig * drho + sb * v
    return gp, gv


def rho_over_v(c: ControllerConfig, v):
    """``rho(v) / v`` with the removable singularity at 0 filled in."""
    v = np.asarray(v, dtype=float)
    small = np.abs(v) < SERIES_CUTOFF
    safe = np.where(small, 1.0, v)
    near = 0.5 * (c.rho.deriv_at(0.0) + c.rho.deriv_at(v))
    return np.where(small, near, c.rho.value_at(v) / safe)


def matrix_lower_bound(s: State, c: ControllerConfig):
    """Quadratic lower bound on ``V3`` in ``(sigma(p), v)`` and the determinant term.

    Returns ``(q, det)`` where ``q = x^T Q x / 2`` with
    ``Q = [[beta rb'^2 / sb', beta rho(v)/v], [beta rho(v)/v, sb']]`` and
    ``det = beta rb'^2 (1 - beta (rho(v) / (rb' v))^2)``.
    """
    _require(c, Option.TWO)
    p, v = s.arrays()
    beta = c.beta
    sb = c.sigma.chi_prime_bar
    rb = c.rho.chi_prime_bar
    sig = c.sigma.value_at(p)
    off = beta * rho_over_v(c, v)
    q = 0.5 * (beta * rb * rb / sb * sig * sig + 2.0 * off * sig * v + sb * v * v)
    det = beta * rb * rb * (1.0 - beta * (rho_over_v(c, v) / rb) ** 2)
    return q, det


def matrix_entries(s: State, c: ControllerConfig):
    """Entries ``(Q11, Q12, Q22)`` of the lower-bound matrix."""
    _require(c, Option.TWO)
    _, v = s.arrays()
    sb = c.sigma.chi_prime_bar
    rb2 = c.rho.chi_prime_bar ** 2
    off = c.beta * rho_over_v(c, v)
    return c.beta * rb2 / sb * np.ones_like(off), off, sb * np.ones_like(off)
