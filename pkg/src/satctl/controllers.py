"""The two bounded feedback laws for the double integrator ``p'' = u``.

Option 1 shapes the velocity through ``xi`` and cancels the cross terms of
its Lyapunov function; Option 2 is the plain sum of two saturations.
Evaluators are vectorized: a :class:`State` may hold equally shaped arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError, ParameterError, SingularityError
from .sat_functions import SaturationFunction, ShapingFunction, make_saturation, make_shaping_xi


class Option(enum.IntEnum):
    ONE = 1
    TWO = 2


@dataclass(frozen=True)
class State:
    p: object
    v: object

    def __post_init__(self):
        if not (np.all(np.isfinite(self.p)) and np.all(np.isfinite(self.v))):
            raise InputError(f"state must be finite, got p={self.p!r}, v={self.v!r}")

    def arrays(self):
        return np.asarray(self.p, dtype=float), np.asarray(self.v, dtype=float)


@dataclass(frozen=True)
class ControllerConfig:
    """Controller option, its functions and gains.

    ``beta`` only enters the Option 2 Lyapunov analysis.  ``zero_rho``
    selects the degenerate Option 1 variant without the damping term.
    """

    option: Option
    sigma: SaturationFunction
    rho: Optional[SaturationFunction] = None
    xi: Optional[ShapingFunction] = None
    k_sigma: float = 1.0
    beta: float = 0.5
    zero_rho: bool = False

    def __post_init__(self):
        object.__setattr__(self, "option", Option(self.option))
        if self.sigma is None:
            raise ParameterError("sigma is required")
        if not (math.isfinite(self.beta) and 0.0 < self.beta < 1.0):
            raise ParameterError(f"beta must lie in the open interval (0, 1), got {self.beta!r}")
        if self.option is Option.ONE:
            if self.xi is None:
                raise ParameterError("Option 1 requires a shaping function xi")
            if not (math.isfinite(self.k_sigma) and self.k_sigma > 0):
                raise ParameterError(f"k_sigma must be > 0, got {self.k_sigma!r}")
            if self.xi.linearity_radius < self.sigma.chi_inf:
                raise ParameterError(
                    f"xi linearity radius {self.xi.linearity_radius} must be >= sup|sigma| = {self.sigma.chi_inf}")
            if self.zero_rho:
                if self.rho is not None:
                    raise ParameterError("zero_rho excludes an explicit rho")
            else:
                self._require_strict_rho()
        else:
            if self.zero_rho:
                raise ParameterError("zero_rho is only allowed for Option 1")
            if self.xi is not None:
                raise ParameterError("Option 2 takes no shaping function xi")
            self._require_strict_rho()
            if not float(self.rho.deriv_at(0.0)) > 0:
                raise ParameterError("Option 2 requires rho'(0) > 0")

    def _require_strict_rho(self):
        if self.rho is None:
            raise ParameterError("rho is required")
        if not self.rho.strictly_increasing:
            raise ParameterError(f"rho must be strictly increasing, {self.rho.name} is not")

    def rho_value(self, s):
        if self.zero_rho:
            return np.zeros_like(np.asarray(s, dtype=float))
        return self.rho.value_at(s)

    @property
    def rho_bound(self) -> float:
        return 0.0 if self.zero_rho else self.rho.chi_inf

    def summary(self) -> dict:
        out = {
            "option": int(self.option),
            "sigma": self.sigma.name,
            "rho": "zero" if self.zero_rho else self.rho.name,
        }
        if self.option is Option.ONE:
            out["xi"] = self.xi.name
            out["ratio_bound"] = float(self.xi.ratio_bound)
            out["k_sigma"] = float(self.k_sigma)
        else:
            out["beta"] = float(self.beta)
        return out


def build_config(option=2, sigma="tanh", sigma_bound=1.0, rho="tanh", rho_bound=1.0,
                 xi_radius=None, xi_power=4, k_sigma=1.0, beta=0.5, zero_rho=False) -> ControllerConfig:
    """Assemble a config from instance names and bounds.

    ``xi_radius`` defaults to ``sigma_bound``, the smallest admissible value.
    """
    option = Option(int(option))
    sig = make_saturation(sigma, sigma_bound)
    rh = None if zero_rho else make_saturation(rho, rho_bound)
    xi = None
    if option is Option.ONE:
        xi = make_shaping_xi(sig.chi_inf if xi_radius is None else xi_radius, xi_power)
    return ControllerConfig(option, sig, rh, xi, k_sigma=k_sigma, beta=beta, zero_rho=zero_rho)


def _option1_ratio(p, v, c: ControllerConfig):
    """``(v + sigma(p)) / (xi(v) + sigma(p))``, exactly 1 inside the linear region."""
    sig = c.sigma.value_at(p)
    xv = c.xi.value_at(v)
    den = xv + sig
    outside = np.abs(v) > c.xi.linearity_radius
    if np.any(outside & (np.abs(den) < 1e-300)):
        raise SingularityError("xi(v) + sigma(p) vanished outside the linear region")
    safe = np.where(outside, den, 1.0)
    return np.where(outside, (v + sig) / safe, 1.0)


def control_option1(s: State, c: ControllerConfig):
    if c.option is not Option.ONE:
        raise ParameterError("control_option1 needs an Option 1 config")
    p, v = s.arrays()
    sig = c.sigma.value_at(p)
    dsig = c.sigma.deriv_at(p)
    xv = c.xi.value_at(v)
    dxv = c.xi.deriv_at(v)
    ratio = _option1_ratio(p, v, c)
    return -c.rho_value(xv + sig) - ratio * c.k_sigma * sig / dxv - dsig * v / dxv


def control_option2(s: State, c: ControllerConfig):
    if c.option is not Option.TWO:
        raise ParameterError("control_option2 needs an Option 2 config")
    p, v = s.arrays()
    return -c.sigma.value_at(p) - c.rho.value_at(v)


def control(s: State, c: ControllerConfig):
    return control_option1(s, c) if c.option is Option.ONE else control_option2(s, c)


def control_kernel(c: ControllerConfig):
    """Unchecked ``u(p, v)`` on raw float arrays, for inner integration loops."""
    sig_f, dsig_f = c.sigma.value, c.sigma.deriv
    if c.option is Option.TWO:
        rho_f = c.rho.value
        return lambda p, v: -sig_f(p) - rho_f(v)
    xi_f, dxi_f, r, k = c.xi.value, c.xi.deriv, c.xi.linearity_radius, c.k_sigma
    rho_f = None if c.zero_rho else c.rho.value

    def u(p, v):
        sig = sig_f(p)
        xv = xi_f(v)
        dxv = dxi_f(v)
        den = xv + sig
        outside = np.abs(v) > r
        ratio = np.where(outside, (v + sig) / np.where(outside, den, 1.0), 1.0)
        out = -(ratio * k * sig + dsig_f(p) * v) / dxv
        return out if rho_f is None else out - rho_f(den)

    return u


def theoretical_bound(c: ControllerConfig) -> float:
    """Analytic supremum of ``|u|`` over the whole plane."""
    if c.option is Option.ONE:
        return c.xi.ratio_bound * (c.k_sigma + c.sigma.chi_prime_bar) + c.rho_bound
    return c.sigma.chi_inf + c.rho.chi_inf


def empirical_lipschitz(c: ControllerConfig, p_axis, v_axis) -> float:
    """Largest ``|du| / |ds|`` between axis-adjacent grid nodes (diagnostic)."""
    p_axis = np.asarray(p_axis, dtype=float)
    v_axis = np.asarray(v_axis, dtype=float)
    P, Vv = np.meshgrid(p_axis, v_axis, indexing="ij")
    u = control(State(P, Vv), c)
    lp = np.abs(np.diff(u, axis=0)) / np.diff(p_axis)[:, None]
    lv = np.abs(np.diff(u, axis=1)) / np.diff(v_axis)[None, :]
    return float(max(lp.max(initial=0.0), lv.max(initial=0.0)))
