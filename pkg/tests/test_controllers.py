import math

import numpy as np
import pytest

import oracles as o
from satctl.controllers import (
    ControllerConfig,
    Option,
    State,
    build_config,
    control,
    control_kernel,
    control_option1,
    control_option2,
    empirical_lipschitz,
    theoretical_bound,
)
from satctl.errors import InputError, ParameterError, SingularityError
from satctl.sat_functions import SaturationFunction, make_shaping, make_tanh_saturation

POINTS = [(0.0, 0.5), (1.0, 0.5), (-3.0, 2.5), (4.0, -7.0), (0.2, 1.0), (-9.5, 9.5), (0.0, 0.0)]


def test_option2_reference_value(opt2):
    assert float(control(State(1.0, 0.5), opt2)) == pytest.approx(-1.223711313215774647, abs=1e-14)


def test_option1_reference_value(opt1):
    assert float(control(State(0.0, 0.5), opt1)) == pytest.approx(-0.962117157260009759, abs=1e-14)


@pytest.mark.parametrize("p,v", POINTS)
def test_option1_matches_oracle(opt1, p, v):
    assert float(control(State(p, v), opt1)) == pytest.approx(float(o.u_option1(p, v)), abs=1e-13)


@pytest.mark.parametrize("p,v", POINTS)
def test_option1_zero_rho_matches_oracle(opt1_zero, p, v):
    assert float(control(State(p, v), opt1_zero)) == pytest.approx(float(o.u_option1(p, v, rho=None)), abs=1e-13)


@pytest.mark.parametrize("p,v", POINTS)
def test_option2_matches_oracle(opt2, p, v):
    assert float(control(State(p, v), opt2)) == pytest.approx(float(o.u_option2(p, v)), abs=1e-14)


def test_atan_instances_match_oracle():
    c = build_config(1, sigma="atan", sigma_bound=0.8, rho="atan", rho_bound=0.6, k_sigma=2.0)
    for p, v in POINTS:
        ref = o.u_option1(p, v, sig=o.atan_sat(0.8), rho=o.atan_sat(0.6), xi=o.xi_quartic(0.8), k=2, r=0.8)
        assert float(control(State(p, v), c)) == pytest.approx(float(ref), abs=1e-13)


def test_origin_is_equilibrium(opt1, opt1_zero, opt2):
    for c in (opt1, opt1_zero, opt2):
        assert float(control(State(0.0, 0.0), c)) == 0.0


def test_vectorized_shapes(opt1, opt2):
    P, V = np.meshgrid(np.linspace(-3, 3, 7), np.linspace(-4, 4, 5), indexing="ij")
    for c in (opt1, opt2):
        u = control(State(P, V), c)
        assert u.shape == P.shape
        scalar = np.array([[float(control(State(a, b), c)) for a, b in zip(ra, rb)] for ra, rb in zip(P, V)])
        np.testing.assert_array_equal(u, scalar)


def test_kernel_matches_checked_law(opt1, opt1_zero, opt2):
    rng = np.random.default_rng(3)
    P = rng.uniform(-20, 20, 5000)
    V = rng.uniform(-20, 20, 5000)
    for c in (opt1, opt1_zero, opt2):
        np.testing.assert_allclose(control_kernel(c)(P, V), control(State(P, V), c), rtol=0, atol=2e-16 * 10)


def test_dispatch_guards(opt1, opt2):
    with pytest.raises(ParameterError):
        control_option1(State(0.0, 0.0), opt2)
    with pytest.raises(ParameterError):
        control_option2(State(0.0, 0.0), opt1)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_state_rejected(bad):
    with pytest.raises(InputError):
        State(bad, 0.0)
    with pytest.raises(InputError):
        State(0.0, np.array([0.0, bad]))


@pytest.mark.parametrize("beta", [0.0, 1.0, -0.2, 1.5, math.nan])
def test_beta_outside_open_interval(beta):
    with pytest.raises(ParameterError, match="open interval"):
        build_config(2, beta=beta)


def test_option1_parameter_validation():
    with pytest.raises(ParameterError):
        build_config(1, k_sigma=0.0)
    with pytest.raises(ParameterError):
        build_config(1, sigma_bound=2.0, xi_radius=1.0)
    sig = make_tanh_saturation(1.0)
    with pytest.raises(ParameterError):
        ControllerConfig(Option.ONE, sig, None, None)
    with pytest.raises(ParameterError):
        ControllerConfig(Option.ONE, sig, sig, build_config(1).xi, zero_rho=True)


def test_option2_parameter_validation():
    sig = make_tanh_saturation(1.0)
    with pytest.raises(ParameterError):
        build_config(2, zero_rho=True)
    with pytest.raises(ParameterError):
        ControllerConfig(Option.TWO, sig, sig, build_config(1).xi)
    flat = SaturationFunction("flat-at-zero", value=lambda s: s ** 3 / (1 + s * s),
                              deriv=lambda s: (s ** 4 + 3 * s * s) / (1 + s * s) ** 2,
                              chi_inf=1e9, chi_prime_bar=2.0, strictly_increasing=True)
    with pytest.raises(ParameterError, match="rho'\\(0\\) > 0"):
        ControllerConfig(Option.TWO, sig, flat)
    weak = SaturationFunction("nonstrict", sig.value, sig.deriv, 1.0, 1.0)
    with pytest.raises(ParameterError, match="strictly increasing"):
        ControllerConfig(Option.TWO, sig, weak)


def test_singular_ratio_raises():
    # deliberately inconsistent sigma: constant -2.25 cancels xi(2) = 2.25
    liar = SaturationFunction("constant", value=lambda s: np.full_like(np.asarray(s, dtype=float), -2.25),
                              deriv=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                              chi_inf=1.0, chi_prime_bar=1.0)
    c = build_config(1)
    c = ControllerConfig(Option.ONE, liar, c.rho, c.xi)
    with pytest.raises(SingularityError):
        control(State(0.0, 2.0), c)


def test_theoretical_bounds(opt1, opt2):
    assert theoretical_bound(opt2) == 2.0
    assert theoretical_bound(opt1) == pytest.approx(2 * 4 / 3 + 1, rel=1e-12)
    c = build_config(1, zero_rho=True, k_sigma=3.0)
    assert theoretical_bound(c) == pytest.approx(4 * 4 / 3, rel=1e-12)


def test_empirical_lipschitz_is_finite(opt1, opt2):
    axis = np.linspace(-10, 10, 201)
    for c in (opt1, opt2):
        L = empirical_lipschitz(c, axis, axis)
        assert 0 < L < 50


def test_identity_shaping_is_rejected_only_if_radius_small():
    sig = make_tanh_saturation(1.0)
    wide = make_shaping("identity", lambda s: s + 0.0, lambda s: np.ones_like(s), 1.0)
    c = ControllerConfig(Option.ONE, sig, sig, wide)
    assert c.xi.range_limited
    narrow = make_shaping("identity", lambda s: s + 0.0, lambda s: np.ones_like(s), 0.5)
    with pytest.raises(ParameterError):
        ControllerConfig(Option.ONE, sig, sig, narrow)


def test_summary(opt1, opt2):
    assert opt2.summary() == {"option": 2, "sigma": opt2.sigma.name, "rho": opt2.rho.name, "beta": 0.5}
    s = opt1.summary()
    assert s["option"] == 1 and s["ratio_bound"] == pytest.approx(4 / 3)
