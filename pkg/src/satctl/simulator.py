"""Fixed-step RK4 rollouts of the closed loop ``p' = v, v' = u(p, v)``.

Batches of initial conditions are integrated together as numpy arrays.
Lyapunov diagnostics are evaluated per chunk of stored states rather than
inside the stepping loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._fastpath import kernel_params, rk4_chunk
from .controllers import ControllerConfig, State, control, control_kernel
from .errors import InputError, ParameterError
from .lyapunov import lyapunov

CONVERGENCE_RADIUS = 1e-3
DIVERGENCE_LIMIT = 1e6
MONOTONE_SLACK = 1e-8
CHUNK = 2000

ControlFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _control_fn(c: ControllerConfig, override: Optional[ControlFn]) -> ControlFn:
    return control_kernel(c) if override is None else override


def _check_dt(dt: float) -> float:
    dt = float(dt)
    if not (math.isfinite(dt) and dt > 0):
        raise ParameterError(f"dt must be a finite positive number, got {dt!r}")
    return dt


def _rk4(u: ControlFn, p, v, dt):
    half = 0.5 * dt
    a1 = u(p, v)
    p2, v2 = p + half * v, v + half * a1
    a2 = u(p2, v2)
    p3, v3 = p + half * v2, v + half * a2
    a3 = u(p3, v3)
    p4, v4 = p + dt * v3, v + dt * a3
    a4 = u(p4, v4)
    p_next = p + dt / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4)
    v_next = v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    return p_next, v_next


def rk4_step(s: State, c: ControllerConfig, dt: float, control_fn: Optional[ControlFn] = None) -> State:
    """One classical Runge-Kutta step.  ``control_fn(p, v)`` overrides the feedback law."""
    dt = _check_dt(dt)
    p, v = s.arrays()
    p1, v1 = _rk4(_control_fn(c, control_fn), p, v, dt)
    return State(p1, v1)


def _step_count(dt: float, t_final: float) -> int:
    t_final = float(t_final)
    if not (math.isfinite(t_final) and t_final >= dt):
        raise ParameterError(f"t_final must be finite and >= dt, got t_final={t_final!r}, dt={dt!r}")
    ratio = t_final / dt
    n = round(ratio)
    return n if abs(ratio - n) <= 1e-9 * max(1.0, ratio) else math.floor(ratio)


def _integrate(c, p0, v0, dt, n_steps, control_fn, on_chunk):
    """Advance a batch and hand ``(k0, P, V)`` blocks of stored states to ``on_chunk``.

    ``P[j]`` is the state after ``k0 + j`` steps; block 0 starts with the
    initial state.  ``on_chunk`` returning True stops the integration.
    """
    u = _control_fn(c, control_fn)
    params = kernel_params(c) if control_fn is None else None
    p, v = np.atleast_1d(p0).astype(float), np.atleast_1d(v0).astype(float)
    shape = np.shape(p0)
    k = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while k <= n_steps:
            m = min(CHUNK, n_steps - k + 1)
            P = np.empty((m, p.size))
            V = np.empty((m, p.size))
            P[0], V[0] = p, v
            if params is not None:
                rk4_chunk(params, p, v, dt, P, V)
            else:
                for j in range(1, m):
                    p, v = _rk4(u, p, v, dt)
                    P[j], V[j] = p, v
            if on_chunk(k, P.reshape((m,) + shape), V.reshape((m,) + shape)):
                return
            k += m
            if k <= n_steps:
                if params is not None:
                    P1 = np.empty((2, p.size))
                    V1 = np.empty((2, p.size))
                    P1[0], V1[0] = p, v
                    rk4_chunk(params, p, v, dt, P1, V1)
                else:
                    p, v = _rk4(u, p, v, dt)


@dataclass
class Trajectory:
    t: np.ndarray
    p: np.ndarray
    v: np.ndarray
    u: np.ndarray
    V: np.ndarray
    W: np.ndarray
    dt: float
    t_final: float
    config: dict = field(default_factory=dict)
    status: str = "ok"

    def __len__(self) -> int:
        return int(self.t.size)

    def records(self):
        return zip(self.t, self.p, self.v, self.u, self.V, self.W)

    def monotonicity_violations(self, slack: float = MONOTONE_SLACK) -> int:
        return int(np.count_nonzero(np.diff(self.V) > slack * (1.0 + np.abs(self.V[:-1]))))


def _diagnostics(c, P, V, control_fn):
    u = control(State(P, V), c) if control_fn is None else control_fn(P, V)
    ev = lyapunov(State(P, V), c)
    return u, ev.V, ev.W


def simulate(initial: State, c: ControllerConfig, dt: float = 1e-3, t_final: float = 200.0,
             control_fn: Optional[ControlFn] = None) -> Trajectory:
    """Roll out from ``initial``; each record carries ``u``, ``V`` and ``W``.

    Stops early with status ``"diverged"`` once ``|p|`` or ``|v|`` exceeds 1e6.
    """
    dt = _check_dt(dt)
    n = _step_count(dt, t_final)
    p0 = np.asarray(initial.p, dtype=float)
    v0 = np.asarray(initial.v, dtype=float)
    if p0.ndim or v0.ndim:
        raise InputError("simulate takes a scalar state; use sweep for batches")
    blocks = []
    status = ["ok"]

    def on_chunk(k0, P, V):
        bad = np.flatnonzero(~(np.abs(P) <= DIVERGENCE_LIMIT) | ~(np.abs(V) <= DIVERGENCE_LIMIT))
        if bad.size:
            P, V = P[:bad[0]], V[:bad[0]]
            status[0] = "diverged"
        if P.size:
            blocks.append((P, V) + _diagnostics(c, P, V, control_fn))
        return bool(bad.size)

    _integrate(c, p0, v0, dt, n, control_fn, on_chunk)
    cols = [np.concatenate([b[i] for b in blocks]) if blocks else np.empty(0) for i in range(5)]
    t = np.arange(cols[0].size) * dt
    return Trajectory(t, *cols, dt=dt, t_final=n * dt, config=c.summary(), status=status[0])


@dataclass
class RunSummary:
    p0: float
    v0: float
    converged: bool
    time_to_ball: Optional[float]
    max_abs_u: float
    v_violations: int
    p_final: float
    v_final: float
    diverged: bool = False


@dataclass
class SweepSummary:
    runs: list
    dt: float
    t_final: float
    config: dict

    @property
    def converged_count(self) -> int:
        return sum(r.converged for r in self.runs)

    @property
    def max_abs_u(self) -> float:
        return max(r.max_abs_u for r in self.runs)


def random_initials(count: int, seed: int, box: Sequence[float] = (-5.0, 5.0, -5.0, 5.0)) -> list:
    if int(count) != count or count < 1:
        raise ParameterError(f"count must be a positive integer, got {count!r}")
    p_lo, p_hi, v_lo, v_hi = (float(b) for b in box)
    rng = np.random.default_rng(seed)
    ps = rng.uniform(p_lo, p_hi, int(count))
    vs = rng.uniform(v_lo, v_hi, int(count))
    return [State(float(a), float(b)) for a, b in zip(ps, vs)]


def sweep(initials, c: ControllerConfig, dt: float = 1e-3, t_final: float = 200.0,
          control_fn: Optional[ControlFn] = None) -> SweepSummary:
    """Simulate every initial condition and summarize convergence.

    ``initials`` is a list of states or a mapping ``{count, seed, box}``.
    """
    if isinstance(initials, dict):
        initials = random_initials(initials["count"], initials.get("seed", 0),
                                   initials.get("box", (-5.0, 5.0, -5.0, 5.0)))
    initials = list(initials)
    if not initials:
        raise ParameterError("sweep needs at least one initial condition")
    dt = _check_dt(dt)
    n = _step_count(dt, t_final)
    p0 = np.array([float(s.p) for s in initials])
    v0 = np.array([float(s.v) for s in initials])
    m = p0.size
    max_u = np.zeros(m)
    violations = np.zeros(m, dtype=int)
    entered = np.full(m, -1)
    diverged = np.zeros(m, dtype=bool)
    last = {"V": None, "p": p0, "v": v0}

    def on_chunk(k0, P, V):
        u, Vl, _ = _diagnostics(c, P, V, control_fn)
        np.maximum(max_u, np.nanmax(np.abs(u), axis=0), out=max_u)
        seq = Vl if last["V"] is None else np.vstack([last["V"][None, :], Vl])
        violations[:] += np.count_nonzero(np.diff(seq, axis=0) > MONOTONE_SLACK * (1.0 + np.abs(seq[:-1])), axis=0)
        inside = (np.abs(P) < CONVERGENCE_RADIUS) & (np.abs(V) < CONVERGENCE_RADIUS)
        hit = inside.any(axis=0) & (entered < 0)
        entered[hit] = k0 + np.argmax(inside[:, hit], axis=0)
        diverged[:] |= (~(np.abs(P) <= DIVERGENCE_LIMIT) | ~(np.abs(V) <= DIVERGENCE_LIMIT)).any(axis=0)
        last.update(V=Vl[-1], p=P[-1], v=V[-1])
        return bool(diverged.all())

    _integrate(c, p0, v0, dt, n, control_fn, on_chunk)
    runs = []
    for i in range(m):
        pf, vf = float(last["p"][i]), float(last["v"][i])
        conv = bool(not diverged[i] and abs(pf) < CONVERGENCE_RADIUS and abs(vf) < CONVERGENCE_RADIUS)
        runs.append(RunSummary(float(p0[i]), float(v0[i]), conv,
                               None if entered[i] < 0 else float(entered[i] * dt),
                               float(max_u[i]), int(violations[i]), pf, vf, bool(diverged[i])))
    return SweepSummary(runs, dt, n * dt, c.summary())
