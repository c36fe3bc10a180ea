"""Bounded saturation functions and the velocity shaping function.

A :class:`SaturationFunction` is a bounded, sign-preserving, smooth scalar
map with a bounded derivative.  The strictly increasing ones are the
admissible damping terms.  A :class:`ShapingFunction` is an odd map that is
the identity on ``[-r, r]`` and grows fast enough outside that
``|s / xi'(s)|`` stays bounded.

All evaluators accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .checks import MembershipReport, margin_check
from .errors import InputError, ParameterError

ArrayFn = Callable[[np.ndarray], np.ndarray]

QUAD_ABS_TOL = 1e-10
SIGN_SLACK = 1e-10


@dataclass(frozen=True)
class SaturationFunction:
    """A member of the bounded family, with declared bounds.

    ``chi_inf`` bounds ``|chi|`` and ``chi_prime_bar`` bounds ``|chi'|``.
    When ``antiderivative`` is None the integral falls back to adaptive
    quadrature.
    """

    name: str
    value: ArrayFn
    deriv: ArrayFn
    chi_inf: float
    chi_prime_bar: float
    strictly_increasing: bool = False
    antiderivative: Optional[ArrayFn] = None
    kernel: Optional[tuple] = None

    def __post_init__(self):
        for label, x in (("chi_inf", self.chi_inf), ("chi_prime_bar", self.chi_prime_bar)):
            if not (math.isfinite(x) and x > 0):
                raise ParameterError(f"{label} must be a finite positive number, got {x!r}")

    def value_at(self, s):
        return self.value(np.asarray(s, dtype=float))

    def deriv_at(self, s):
        return self.deriv(np.asarray(s, dtype=float))

    def integral_to(self, s):
        return integral_of(self, s)


@dataclass(frozen=True)
class ShapingFunction:
    name: str
    value: ArrayFn
    deriv: ArrayFn
    linearity_radius: float
    ratio_bound: float
    range_limited: bool = False
    kernel: Optional[tuple] = None

    def value_at(self, s):
        return self.value(np.asarray(s, dtype=float))

    def deriv_at(self, s):
        return self.deriv(np.asarray(s, dtype=float))


def _check_positive(label: str, x: float) -> float:
    x = float(x)
    if not (math.isfinite(x) and x > 0):
        raise ParameterError(f"{label} must be a finite positive number, got {x!r}")
    return x


def _log_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


def _sech2(x):
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def make_tanh_saturation(bound: float) -> SaturationFunction:
    """``bound * tanh(s / bound)``; unit slope at the origin."""
    b = _check_positive("bound", bound)
    return SaturationFunction(
        name=f"tanh(bound={b:g})",
        value=lambda s: b * np.tanh(s / b),
        deriv=lambda s: _sech2(s / b),
        chi_inf=b,
        chi_prime_bar=1.0,
        strictly_increasing=True,
        antiderivative=lambda s: b * b * _log_cosh(s / b),
        kernel=("tanh", b),
    )


def make_atan_saturation(bound: float) -> SaturationFunction:
    """``(2 bound / pi) * atan(pi s / (2 bound))``; unit slope at the origin."""
    b = _check_positive("bound", bound)
    k = math.pi / (2.0 * b)

    def antiderivative(s):
        ks = k * s
        return (s * np.arctan(ks) - np.log1p(ks * ks) / (2.0 * k)) / k

    return SaturationFunction(
        name=f"atan(bound={b:g})",
        value=lambda s: np.arctan(k * s) / k,
        deriv=lambda s: 1.0 / (1.0 + (k * s) ** 2),
        chi_inf=b,
        chi_prime_bar=1.0,
        strictly_increasing=True,
        antiderivative=antiderivative,
        kernel=("atan", b),
    )


SATURATIONS = {"tanh": make_tanh_saturation, "atan": make_atan_saturation}


def make_saturation(kind: str, bound: float) -> SaturationFunction:
    try:
        factory = SATURATIONS[kind]
    except KeyError:
        raise ParameterError(f"unknown saturation {kind!r}; choose from {sorted(SATURATIONS)}") from None
    return factory(bound)


def integral_of(f: SaturationFunction, s):
    """Integral of ``f`` from 0 to ``s`` (closed form or adaptive quadrature)."""
    arr = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"integration limit must be finite, got {s!r}")
    if f.antiderivative is not None:
        return f.antiderivative(arr) - f.antiderivative(np.zeros(()))

    def one(x):
        val, _ = integrate.quad(lambda r: float(f.value(np.asarray(r))), 0.0, float(x),
                                epsabs=QUAD_ABS_TOL, epsrel=0.0, limit=200)
        return val

    if arr.ndim == 0:
        return np.float64(one(arr))
    return np.vectorize(one, otypes=[float])(arr)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def cumulative_integral(integrand: ArrayFn, s) -> np.ndarray:
    """``int_0^s integrand`` at every point of ``s`` by chained Gauss-Legendre panels.

    Panels run between consecutive sorted sample points, outward from 0, so
    the cost is one fixed-order rule per sample.
    """
    s = np.asarray(s, dtype=float)
    flat = s.ravel()
    out = np.zeros_like(flat)
    for sign in (1.0, -1.0):
        idx = np.flatnonzero(sign * flat > 0)
        if idx.size == 0:
            continue
        order = idx[np.argsort(sign * flat[idx])]
        ends = flat[order]
        starts = np.concatenate(([0.0], ends[:-1]))
        half = 0.5 * (ends - starts)
        mid = 0.5 * (ends + starts)
        nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        panel = half * (integrand(nodes) @ _GL_WEIGHTS)
        out[order] = np.cumsum(panel)
    return out.reshape(s.shape)


INTEGRAL_LOWER_BOUND = "integral lower bound: int chi >= chi^2/(2 chi_prime_bar)"
INTEGRAL_GAP = "integral gap: int (chi_prime_bar^2 r - chi' chi) >= 0"


def verify_sigma_membership(f: SaturationFunction, sample_count: int = 10001,
                            extent: float = 20.0) -> MembershipReport:
    """Sample ``[-extent, extent]`` and check every family condition.

    Violations are reported, never raised.
    """
    if sample_count < 100:
        raise ParameterError(f"sample_count must be >= 100, got {sample_count}")
    _check_positive("extent", extent)
    s = np.linspace(-extent, extent, sample_count)
    nz = s[s != 0.0]
    chi = f.value_at(s)
    dchi = f.deriv_at(s)
    chi_nz = f.value_at(nz)
    cb = f.chi_prime_bar
    rep = MembershipReport(subject=f.name)
    add = rep.checks.append

    add(margin_check("sign chi(s)*s > 0", chi_nz * nz, [nz], strict=True))
    add(margin_check("bound |chi| <= chi_inf", f.chi_inf - np.abs(chi), [s]))
    add(margin_check("bound |chi'| <= chi_prime_bar", cb - np.abs(dchi), [s]))
    add(margin_check("ratio chi(r)/(chi_prime_bar r) in [-1,1]",
                     1.0 - np.abs(chi_nz / (cb * nz)), [nz], SIGN_SLACK))
    add(margin_check("ratio chi'(r)/chi_prime_bar in [-1,1]", 1.0 - np.abs(dchi) / cb, [s], SIGN_SLACK))
    odd = np.maximum(np.abs(chi + f.value_at(-s)), np.abs(f.value_at(0.0)))
    add(margin_check("odd symmetry", -odd, [s], 1e-12))
    if f.strictly_increasing:
        add(margin_check("strictly increasing chi'(s) > 0", f.deriv_at(nz), [nz], strict=True))

    quad_int = cumulative_integral(f.value, s)
    closed = f.integral_to(s)
    add(margin_check("integral evaluator vs quadrature", -np.abs(closed - quad_int), [s], 1e-9))
    add(margin_check(INTEGRAL_LOWER_BOUND,
                     closed - chi ** 2 / (2.0 * cb), [s], SIGN_SLACK))
    gap = cumulative_integral(lambda r: cb * cb * r - f.deriv(r) * f.value(r), s)
    add(margin_check(INTEGRAL_GAP, gap, [s], SIGN_SLACK))
    return rep


# --- shaping function -------------------------------------------------------

RATIO_SCAN_POINTS = 100_000
RATIO_SCAN_RADII = 100.0


def compute_ratio_bound(deriv: ArrayFn, linearity_radius: float):
    """Numerically maximize ``|s / xi'(s)|``.

    Returns ``(M, range_limited)``.  A dense scan over ``|s| <= 100 r`` is
    refined around its argmax by bounded scalar maximization; beyond the scan
    edge the ratio must be seen decreasing over geometrically spaced probes,
    otherwise the result is flagged as range-limited.
    """
    r = linearity_radius
    edge = RATIO_SCAN_RADII * r
    s = np.linspace(-edge, edge, 2 * RATIO_SCAN_POINTS + 1)
    g = np.abs(s / deriv(s))
    i = int(np.argmax(g))
    best = float(g[i])
    lo, hi = s[max(i - 1, 0)], s[min(i + 1, s.size - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda x: -abs(x / float(deriv(np.asarray(x)))),
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12 * max(1.0, abs(s[i]))})
        best = max(best, -float(res.fun))
    probes = edge * 2.0 ** np.arange(0, 11)
    tail = np.maximum(np.abs(probes / deriv(probes)), np.abs(-probes / deriv(-probes)))
    decreasing = bool(np.all(np.diff(tail) < 0) and tail[0] <= best)
    return best, not decreasing


def make_shaping(name: str, value: ArrayFn, deriv: ArrayFn, linearity_radius: float,
                 kernel: Optional[tuple] = None) -> ShapingFunction:
    r = _check_positive("linearity_radius", linearity_radius)
    m, limited = compute_ratio_bound(deriv, r)
    return ShapingFunction(name, value, deriv, r, m, limited, kernel)


def make_shaping_xi(linearity_radius: float, power: int = 4) -> ShapingFunction:
    """Identity on ``[-r, r]``, polynomial growth ``(|s| - r)^power`` outside.

    ``power=4`` is the smallest integer exponent giving a C^3 junction; other
    powers exist for testing the junction check.
    """
    r = _check_positive("linearity_radius", linearity_radius)
    if int(power) != power or power < 2:
        raise ParameterError(f"power must be an integer >= 2, got {power!r}")
    n = int(power)
    scale = r ** (n - 2)

    def value(s):
        x = np.maximum(np.abs(s) - r, 0.0)
        return s + np.sign(s) * x ** n / (n * scale)

    def deriv(s):
        x = np.maximum(np.abs(s) - r, 0.0)
        return 1.0 + x ** (n - 1) / scale

    return make_shaping(f"xi(radius={r:g}, power={n})", value, deriv, r, kernel=(r, n))


def one_sided_derivatives(xi: ShapingFunction, point: float, side: int, step: Optional[float] = None):
    """First three derivatives of ``xi`` at ``point`` from one side.

    Least-squares polynomial stencils on ``point + side*k*h``, k = 0..8: the
    first derivative from ``value_at``, the second and third from
    ``deriv_at``.
    """
    h = (1e-2 * xi.linearity_radius if step is None else step) * side
    k = np.arange(9, dtype=float)
    x = point + k * h
    cv = np.polynomial.polynomial.polyfit(k, xi.value_at(x) - xi.value_at(point), 6)
    cd = np.polynomial.polynomial.polyfit(k, xi.deriv_at(x), 5)
    return np.array([cv[1] / h, cd[1] / h, 2.0 * cd[2] / h ** 2])


def verify_xi_properties(xi: ShapingFunction, sample_count: int = 10001,
                         extent: float = 50.0) -> MembershipReport:
    if sample_count < 100:
        raise ParameterError(f"sample_count must be >= 100, got {sample_count}")
    r = xi.linearity_radius
    if not extent > r:
        raise ParameterError(f"extent must exceed the linearity radius {r}, got {extent}")
    s = np.linspace(-extent, extent, sample_count)
    s = np.union1d(s, [-r, r])
    val = xi.value_at(s)
    d = xi.deriv_at(s)
    m = xi.ratio_bound
    rep = MembershipReport(subject=xi.name, range_limited=xi.range_limited)
    add = rep.checks.append
    limited_note = "range-limited: supremum taken over the scanned range only" if xi.range_limited else ""

    add(margin_check("|xi(s)| >= |s|", np.abs(val) - np.abs(s), [s]))
    add(margin_check("xi'(s) > 0", d, [s], strict=True))
    inner = np.union1d(s[np.abs(s) <= r], np.linspace(-r, r, 1001))
    add(margin_check("xi(s) = s on [-r, r]", -np.abs(xi.value_at(inner) - inner), [inner]))
    odd = np.abs(val + xi.value_at(-s)) / np.maximum(1.0, np.abs(val))
    add(margin_check("odd symmetry", -odd, [s], 1e-12))
    ratio = np.abs(s / d)
    add(margin_check("sampled |s/xi'(s)| <= M", m - ratio, [s], 1e-12 * m, note=limited_note))
    add(margin_check("M >= linearity radius", np.array([m - r]), [np.array([r])]))
    add(margin_check("sup 1/xi' <= M/r", m / r - 1.0 / d, [s], 1e-12 * m / r, note=limited_note))

    disc, where = [], []
    for point in (-r, r):
        left = one_sided_derivatives(xi, point, -1)
        right = one_sided_derivatives(xi, point, +1)
        rel = np.abs(left - right) / np.maximum(1.0, np.maximum(np.abs(left), np.abs(right)))
        disc.extend(rel)
        where.extend([point] * 3)
    add(margin_check("C3 junction (one-sided derivatives 1..3)", -np.array(disc), [np.array(where)], 1e-6))
    return rep
