"""Grid certification of the Lyapunov inequalities.

Every inequality is evaluated at every node of a rectangular grid and
reduced to a :class:`~satctl.checks.Check`.  Evaluations are pure and
reductions are min/max, so reports are deterministic.

A fault-injection hook scales individual evaluators (``u``, ``V`` or
``W``) so that tests can confirm that the certifier is not vacuous.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .checks import Check, MembershipReport, margin_check
from .controllers import ControllerConfig, Option, State, _option1_ratio, control, theoretical_bound
from .errors import InputError, NotApplicableError, ParameterError, ReportError
from .lyapunov import lyap_gradient, lyapunov, matrix_entries, matrix_lower_bound
from .sat_functions import one_sided_derivatives

ORIGIN_RADIUS = 1e-6

OPTION1_CHECKS = ("control bound", "V positive definite", "W nonnegative", "Vdot identity")
OPTION2_CHECKS = OPTION1_CHECKS + ("V2 nonnegative", "matrix lower bound V3 >= q",
                                   "determinant positive", "W4 zero-set localization")


@dataclass(frozen=True)
class Region:
    p_min: float
    p_max: float
    v_min: float
    v_max: float
    grid_n: int = 201

    def __post_init__(self):
        bounds = (self.p_min, self.p_max, self.v_min, self.v_max)
        if not all(math.isfinite(float(b)) for b in bounds):
            raise InputError(f"region bounds must be finite, got {bounds}")
        if not (self.p_min < self.p_max and self.v_min < self.v_max):
            raise InputError(f"region must be a nondegenerate rectangle, got {bounds}")
        if int(self.grid_n) != self.grid_n or self.grid_n < 3:
            raise ParameterError(f"grid_n must be an integer >= 3, got {self.grid_n!r}")

    def axes(self):
        n = int(self.grid_n)
        return np.linspace(self.p_min, self.p_max, n), np.linspace(self.v_min, self.v_max, n)

    def mesh(self):
        pa, va = self.axes()
        return np.meshgrid(pa, va, indexing="ij")

    def as_dict(self) -> dict:
        return {"p_min": float(self.p_min), "p_max": float(self.p_max),
                "v_min": float(self.v_min), "v_max": float(self.v_max), "grid_n": int(self.grid_n)}


@dataclass(frozen=True)
class Tolerances:
    """Tolerance set and finite-difference settings.

    The derivative of ``V`` uses a central stencil with ``2 * fd_half_width + 1``
    points and steps ``fd_step_p * max(1, |p|)``, ``fd_step_v * max(1, |v|)``.
    """

    vdot_atol: float = 1e-6
    sign_slack: float = 1e-10
    bound_tol: float = 0.0
    decomposition_rtol: float = 1e-12
    fd_half_width: int = 5
    fd_step_p: float = 2e-2
    fd_step_v: float = 1e-2
    zero_set_radii: tuple = (1.0, 0.1, 0.01)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["zero_set_radii"] = [float(r) for r in self.zero_set_radii]
        return d


def central_weights(half_width: int) -> np.ndarray:
    """Weights ``w_k`` with ``f'(x) ~ sum_k w_k (f(x + k h) - f(x - k h)) / h``."""
    m = int(half_width)
    if m < 1:
        raise ParameterError(f"stencil half width must be >= 1, got {half_width}")
    k = np.arange(1, m + 1, dtype=float)
    A = k[None, :] ** (2 * np.arange(m)[:, None] + 1)
    b = np.zeros(m)
    b[0] = 0.5
    return np.linalg.solve(A, b)


def central_difference(f, x, h, half_width: int = 1):
    w = central_weights(half_width)
    acc = 0.0
    for k, wk in enumerate(w, start=1):
        acc = acc + wk * (f(x + k * h) - f(x - k * h))
    return acc / h


class _Evaluators:
    """Closed-loop evaluators with optional multiplicative faults."""

    def __init__(self, c: ControllerConfig, faults: Optional[Mapping[str, float]] = None):
        faults = dict(faults or {})
        unknown = set(faults) - {"u", "V", "W"}
        if unknown:
            raise ParameterError(f"unknown fault targets {sorted(unknown)}; use u, V or W")
        self.c = c
        self.su = float(faults.get("u", 1.0))
        self.sV = float(faults.get("V", 1.0))
        self.sW = float(faults.get("W", 1.0))

    def u(self, p, v):
        return self.su * control(State(p, v), self.c)

    def lyap(self, p, v):
        ev = lyapunov(State(p, v), self.c)
        return self.sV * ev.V, self.sW * ev.W, ev.components

    def V(self, p, v):
        return self.sV * lyapunov(State(p, v), self.c).V

    def W(self, p, v):
        return self.sW * lyapunov(State(p, v), self.c).W


@dataclass
class CertificationReport:
    config: dict
    region: dict
    tolerances: dict
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def validate(self):
        if not self.checks:
            raise ReportError("report has no checks")
        option = self.config.get("option")
        required = OPTION1_CHECKS if option == 1 else OPTION2_CHECKS
        names = {c.name.split(" [")[0] for c in self.checks}
        missing = [n for n in required if n not in names]
        if missing:
            raise ReportError(f"report lacks mandatory checks: {missing}")

    def to_dict(self) -> dict:
        self.validate()
        return {
            "config": self.config,
            "region": self.region,
            "tolerances": self.tolerances,
            "checks": [c.as_dict() for c in self.checks],
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True) + "\n"

    def summary_lines(self) -> list:
        return [f"{'PASS' if c.passed else 'FAIL'}  {c.name}  worst={c.worst_residual!r}  at={c.worst_location}"
                for c in self.checks]


def vdot_residual(ev: _Evaluators, P, V, tol: Tolerances):
    """``|dV/dt + W|`` with ``dV/dt`` from central differences of ``V``."""
    hp = tol.fd_step_p * np.maximum(1.0, np.abs(P))
    hv = tol.fd_step_v * np.maximum(1.0, np.abs(V))
    dVdp = central_difference(lambda x: ev.V(x, V), P, hp, tol.fd_half_width)
    dVdv = central_difference(lambda x: ev.V(P, x), V, hv, tol.fd_half_width)
    vdot = dVdp * V + dVdv * ev.u(P, V)
    return np.abs(vdot + ev.W(P, V))


def _zero_set_entries(W, P, V, radii):
    dist = np.hypot(P, V)
    entries = []
    for r in radii:
        mask = dist >= r
        if not mask.any():
            entries.append({"radius": float(r), "min_W": None, "p": None, "v": None, "vacuous": True})
            continue
        idx = np.flatnonzero(mask.ravel())
        j = idx[int(np.argmin(W.ravel()[idx]))]
        entries.append({"radius": float(r), "min_W": float(W.ravel()[j]), "p": float(P.ravel()[j]),
                        "v": float(V.ravel()[j]), "vacuous": False})
    return entries


def _check_radii(radii: Sequence[float]):
    radii = [float(r) for r in radii]
    if not radii or any(not (math.isfinite(r) and r > 0) for r in radii):
        raise ParameterError(f"radii must be positive, got {radii}")
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ParameterError(f"radii must be strictly descending, got {radii}")
    return radii


@dataclass
class ZeroSetReport:
    entries: list
    passed: bool
    monotone: bool

    @property
    def minima(self) -> list:
        return [e["min_W"] for e in self.entries]


def _zero_set_report(entries) -> ZeroSetReport:
    live = [e for e in entries if not e["vacuous"]]
    positive = all(e["min_W"] > 0 for e in live)
    mins = [e["min_W"] for e in live]
    monotone = all(b <= a for a, b in zip(mins, mins[1:]))
    return ZeroSetReport(entries, positive and monotone, monotone)


def zero_set_localization(c: ControllerConfig, r: Region, radii: Sequence[float] = (1.0, 0.1, 0.01),
                          faults: Optional[Mapping[str, float]] = None) -> ZeroSetReport:
    """Minimum of ``W4`` outside shrinking origin balls.

    Passes when every non-vacuous minimum is positive and the minima do not
    increase as the radius shrinks.
    """
    if c.option is not Option.TWO:
        raise NotApplicableError("zero-set localization applies to Option 2 only")
    radii = _check_radii(radii)
    P, V = r.mesh()
    W = _Evaluators(c, faults).W(P, V)
    return _zero_set_report(_zero_set_entries(W, P, V, radii))


def _zero_set_check(zs: ZeroSetReport, total: int) -> Check:
    live = [e for e in zs.entries if not e["vacuous"]]
    if not live:
        return Check("W4 zero-set localization", True, None, None, 0.0, total, True, "vacuous")
    worst = min(live, key=lambda e: e["min_W"])
    note = "minima " + ", ".join(f"r={e['radius']:g}:{e['min_W']!r}" if not e["vacuous"]
                                 else f"r={e['radius']:g}:vacuous" for e in zs.entries)
    if not zs.monotone:
        note += "; not monotone"
    return Check("W4 zero-set localization", zs.passed, worst["min_W"], (worst["p"], worst["v"]),
                 0.0, total, True, note)


def certify(c: ControllerConfig, r: Region, tol: Optional[Tolerances] = None,
            faults: Optional[Mapping[str, float]] = None) -> CertificationReport:
    tol = Tolerances() if tol is None else tol
    ev = _Evaluators(c, faults)
    P, V = r.mesh()
    n = P.size
    rep = CertificationReport(config=c.summary(), region=r.as_dict(), tolerances=tol.as_dict())
    if faults:
        rep.config["faults"] = {k: float(v) for k, v in sorted(dict(faults).items())}
    add = rep.checks.append

    u = ev.u(P, V)
    add(margin_check("control bound", theoretical_bound(c) - np.abs(u), [P, V], tol.bound_tol))

    Vv, W, comps = ev.lyap(P, V)
    origin = np.maximum(np.abs(P), np.abs(V)) < ORIGIN_RADIUS
    v0 = ev.V(np.zeros(1), np.zeros(1))
    pos = np.concatenate([np.where(origin, 1e-12 - np.abs(Vv), Vv).ravel(), 1e-12 - np.abs(v0)])
    add(margin_check("V positive definite", pos, [np.append(P.ravel(), 0.0), np.append(V.ravel(), 0.0)],
                     strict=True, note="V > 0 away from origin, |V| < 1e-12 at origin"))
    add(margin_check("W nonnegative", W, [P, V], tol.sign_slack))

    Pi, Vi = P[1:-1, 1:-1], V[1:-1, 1:-1]
    add(margin_check("Vdot identity", -vdot_residual(ev, Pi, Vi, tol), [Pi, Vi], tol.vdot_atol,
                     note=f"central stencil, {2 * tol.fd_half_width + 1} points"))

    if c.option is Option.ONE:
        ratio = _option1_ratio(P, V, c)
        add(margin_check("ratio magnitude |(v+sigma)/(xi+sigma)| <= 1", 1.0 - np.abs(ratio), [P, V],
                         tol.sign_slack))
        return rep

    add(margin_check("V2 nonnegative", comps["V2"], [P, V], tol.sign_slack))
    decomposition = Vv - (comps["V1"] + comps["V2"] + comps["V3"])
    add(margin_check("V4 decomposition V1+V2+V3", -np.abs(decomposition) / np.maximum(1.0, np.abs(Vv)),
                     [P, V], tol.decomposition_rtol))
    st = State(P, V)
    q, det = matrix_lower_bound(st, c)
    add(margin_check("matrix lower bound V3 >= q", comps["V3"] - q, [P, V], tol.sign_slack))
    q11, _, q22 = matrix_entries(st, c)
    add(margin_check("determinant positive", np.minimum(det, np.minimum(q11, q22)), [P, V], strict=True,
                     note="det > 0 and positive diagonal"))
    zs = _zero_set_report(_zero_set_entries(W, P, V, _check_radii(tol.zero_set_radii)))
    add(_zero_set_check(zs, n))
    return rep


DEFAULT_BETAS = (0.1, 0.3, 0.5, 0.7, 0.9)


def certify_beta_sweep(c: ControllerConfig, r: Region, betas: Sequence[float] = DEFAULT_BETAS,
                       tol: Optional[Tolerances] = None,
                       faults: Optional[Mapping[str, float]] = None) -> CertificationReport:
    """Option 2 certification repeated for each beta; check names carry the beta."""
    if c.option is not Option.TWO:
        raise NotApplicableError("beta sweep applies to Option 2 only")
    merged = None
    for beta in betas:
        cb = ControllerConfig(c.option, c.sigma, c.rho, None, c.k_sigma, beta)
        rep = certify(cb, r, tol, faults)
        if merged is None:
            merged = CertificationReport(dict(rep.config), rep.region, rep.tolerances)
            merged.config.pop("beta", None)
            merged.config["betas"] = [float(b) for b in betas]
        for ch in rep.checks:
            merged.checks.append(Check(f"{ch.name} [beta={beta:g}]", ch.passed, ch.worst_residual,
                                       ch.worst_location, ch.tolerance, ch.samples, ch.strict, ch.note))
    return merged


def gradient_check(c: ControllerConfig, r: Region, samples: int = 1000, seed: int = 0,
                   rtol: float = 1e-6, tol: Optional[Tolerances] = None) -> MembershipReport:
    """Closed-form derivatives against central differences at random states.

    Errors are relative to ``max(1, |analytic|)``.
    """
    if int(samples) != samples or samples < 10:
        raise ParameterError(f"samples must be an integer >= 10, got {samples!r}")
    tol = Tolerances() if tol is None else tol
    rng = np.random.default_rng(seed)
    p = rng.uniform(r.p_min, r.p_max, int(samples))
    v = rng.uniform(r.v_min, r.v_max, int(samples))
    rep = MembershipReport(subject="gradient check")
    add = rep.checks.append

    def rel(a, b):
        return -np.abs(a - b) / np.maximum(1.0, np.abs(a))

    def fd1(f, x):
        return central_difference(f, x, 1e-5 * np.maximum(1.0, np.abs(x)), 2)

    add(margin_check(f"sigma' ({c.sigma.name})", rel(c.sigma.deriv_at(p), fd1(c.sigma.value_at, p)), [p], rtol))
    if not c.zero_rho:
        add(margin_check(f"rho' ({c.rho.name})", rel(c.rho.deriv_at(v), fd1(c.rho.value_at, v)), [v], rtol))
    if c.option is Option.ONE:
        xi = c.xi
        add(margin_check(f"xi' ({xi.name})", rel(xi.deriv_at(v), fd1(xi.value_at, v)), [v], rtol))
        disc, where = [], []
        for point in (-xi.linearity_radius, xi.linearity_radius):
            left = one_sided_derivatives(xi, point, -1)
            right = one_sided_derivatives(xi, point, +1)
            disc.extend(np.abs(left - right) / np.maximum(1.0, np.maximum(np.abs(left), np.abs(right))))
            where.extend([point] * 3)
        add(margin_check("xi junction one-sided derivatives", -np.array(disc), [np.array(where)], rtol))

    gp, gv = lyap_gradient(State(p, v), c)
    V = lambda a, b: lyapunov(State(a, b), c).V  # noqa: E731
    hp = tol.fd_step_p * np.maximum(1.0, np.abs(p))
    hv = tol.fd_step_v * np.maximum(1.0, np.abs(v))
    add(margin_check("dV/dp", rel(gp, central_difference(lambda x: V(x, v), p, hp, tol.fd_half_width)),
                     [p, v], rtol))
    add(margin_check("dV/dv", rel(gv, central_difference(lambda x: V(p, x), v, hv, tol.fd_half_width)),
                     [p, v], rtol))
    return rep
