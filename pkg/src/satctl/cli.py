"""Command-line front end.

Subcommands: ``simulate``, ``certify``, ``sweep``, ``props``, ``plot``.
Every setting is a flag; ``--config FILE`` supplies the same keys as JSON
and flags override it.  Exit codes: 0 success, 1 failed checks or I/O
error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

from .certifier import DEFAULT_BETAS, Region, Tolerances, certify, certify_beta_sweep, gradient_check
from .controllers import Option, State, build_config
from .errors import SatCtlError
from .io import plot_trajectory, write_report, write_trajectory_csv
from .sat_functions import verify_sigma_membership, verify_xi_properties
from .simulator import random_initials, simulate, sweep


class ConfigError(SatCtlError, ValueError):
    pass


@dataclass
class RunConfig:
    option: int = 2
    sigma: str = "tanh"
    sigma_bound: float = 1.0
    rho: str = "tanh"
    rho_bound: float = 1.0
    zero_rho: bool = False
    xi_radius: Optional[float] = None
    xi_power: int = 4
    k_sigma: float = 1.0
    beta: Optional[float] = None
    region: tuple = (-10.0, 10.0, -10.0, 10.0)
    grid: int = 201
    vdot_atol: float = 1e-6
    sign_slack: float = 1e-10
    fault_u: Optional[float] = None
    fault_v: Optional[float] = None
    fault_w: Optional[float] = None
    p0: float = 5.0
    v0: float = 0.0
    dt: float = 1e-3
    t_final: float = 200.0
    count: int = 100
    seed: int = 0
    box: tuple = (-5.0, 5.0, -5.0, 5.0)
    samples: int = 10001
    extent: float = 20.0
    xi_extent: float = 50.0
    csv: Optional[str] = None
    out: Optional[str] = None

    @classmethod
    def merge(cls, file_values: dict, flag_values: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(file_values) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        values = {**file_values, **{k: v for k, v in flag_values.items() if v is not None}}
        cfg = cls(**values)
        for key in ("region", "box"):
            seq = getattr(cfg, key)
            if len(seq) != 4:
                raise ConfigError(f"{key} needs 4 numbers (p_min p_max v_min v_max), got {seq!r}")
            setattr(cfg, key, tuple(float(x) for x in seq))
        if cfg.option not in (1, 2):
            raise ConfigError(f"option must be 1 or 2, got {cfg.option!r}")
        return cfg

    def controller(self, beta: Optional[float] = None):
        b = beta if beta is not None else (0.5 if self.beta is None else self.beta)
        return build_config(self.option, self.sigma, self.sigma_bound, self.rho, self.rho_bound,
                            self.xi_radius, self.xi_power, self.k_sigma, b, self.zero_rho)

    def faults(self) -> dict:
        pairs = (("u", self.fault_u), ("V", self.fault_v), ("W", self.fault_w))
        return {k: float(v) for k, v in pairs if v is not None}


def _add_controller_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("controller")
    g.add_argument("--config", dest="config_path", default=None, help="JSON file with the same keys as the flags")
    g.add_argument("--option", type=int, choices=(1, 2))
    g.add_argument("--sigma", choices=("tanh", "atan"))
    g.add_argument("--sigma-bound", type=float)
    g.add_argument("--rho", choices=("tanh", "atan"))
    g.add_argument("--rho-bound", type=float)
    g.add_argument("--zero-rho", action="store_true", default=None, help="Option 1 without the damping term")
    g.add_argument("--xi-radius", type=float, help="linearity radius of xi (default: sigma bound)")
    g.add_argument("--xi-power", type=int)
    g.add_argument("--k-sigma", type=float)
    g.add_argument("--beta", type=float)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="satctl", description="Bounded double-integrator control: "
                                 "simulation and Lyapunov certification.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="roll out one trajectory to CSV")
    _add_controller_flags(p)
    p.add_argument("--p0", type=float)
    p.add_argument("--v0", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--out")

    p = sub.add_parser("certify", help="check every inequality on a grid")
    _add_controller_flags(p)
    p.add_argument("--region", type=float, nargs=4, metavar=("P_MIN", "P_MAX", "V_MIN", "V_MAX"))
    p.add_argument("--grid", type=int)
    p.add_argument("--vdot-atol", type=float)
    p.add_argument("--sign-slack", type=float)
    p.add_argument("--fault-u", type=float, help="scale the control evaluator (fault injection)")
    p.add_argument("--fault-v", type=float, help="scale the V evaluator (fault injection)")
    p.add_argument("--fault-w", type=float, help="scale the W evaluator (fault injection)")
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="simulate many seeded initial conditions")
    _add_controller_flags(p)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--box", type=float, nargs=4, metavar=("P_MIN", "P_MAX", "V_MIN", "V_MAX"))
    p.add_argument("--dt", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--out")

    p = sub.add_parser("props", help="family-membership and derivative checks")
    _add_controller_flags(p)
    p.add_argument("--samples", type=int)
    p.add_argument("--extent", type=float)
    p.add_argument("--xi-extent", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("plot", help="render a trajectory CSV to SVG")
    p.add_argument("--config", dest="config_path", default=None)
    p.add_argument("--csv")
    p.add_argument("--out")
    return ap


def _load_file(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def _cmd_simulate(cfg: RunConfig) -> int:
    c = cfg.controller()
    traj = simulate(State(cfg.p0, cfg.v0), c, cfg.dt, cfg.t_final)
    if cfg.out:
        write_trajectory_csv(traj, cfg.out)
    print(f"{len(traj)} records, final p={traj.p[-1]:.6g} v={traj.v[-1]:.6g}, status {traj.status}")
    return 0


def _cmd_certify(cfg: RunConfig) -> int:
    region = Region(*cfg.region, grid_n=cfg.grid)
    tol = Tolerances(vdot_atol=cfg.vdot_atol, sign_slack=cfg.sign_slack)
    faults = cfg.faults() or None
    if cfg.option == int(Option.TWO) and cfg.beta is None:
        report = certify_beta_sweep(cfg.controller(DEFAULT_BETAS[0]), region, DEFAULT_BETAS, tol, faults)
    else:
        report = certify(cfg.controller(), region, tol, faults)
    report.validate()
    if cfg.out:
        write_report(report, cfg.out)
    for line in report.summary_lines():
        print(line)
    print("overall:", "PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def _cmd_sweep(cfg: RunConfig) -> int:
    c = cfg.controller()
    summary = sweep(random_initials(cfg.count, cfg.seed, cfg.box), c, cfg.dt, cfg.t_final)
    doc = {"config": summary.config, "dt": summary.dt, "t_final": summary.t_final,
           "seed": cfg.seed, "box": list(cfg.box),
           "converged": summary.converged_count, "runs": [asdict(r) for r in summary.runs]}
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    print(f"{summary.converged_count}/{len(summary.runs)} converged, max |u| = {summary.max_abs_u:.6g}")
    return 0


def _cmd_props(cfg: RunConfig) -> int:
    c = cfg.controller()
    reports = [verify_sigma_membership(c.sigma, cfg.samples, cfg.extent)]
    if not c.zero_rho:
        reports.append(verify_sigma_membership(c.rho, cfg.samples, cfg.extent))
    if c.xi is not None:
        reports.append(verify_xi_properties(c.xi, cfg.samples, cfg.xi_extent))
    region = Region(*cfg.region, grid_n=3)
    reports.append(gradient_check(c, region, 1000, seed=cfg.seed))
    ok = all(r.passed for r in reports)
    if cfg.out:
        doc = {"config": c.summary(),
               "reports": [{"subject": r.subject, "range_limited": r.range_limited,
                            "checks": [ch.as_dict() for ch in r.checks], "pass": r.passed} for r in reports],
               "pass": ok}
        with open(cfg.out, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    for r in reports:
        for line in r.summary_lines():
            print(line)
    print("overall:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def _cmd_plot(cfg: RunConfig) -> int:
    if not cfg.csv or not cfg.out:
        raise ConfigError("plot needs --csv and --out")
    plot_trajectory(cfg.csv, cfg.out)
    return 0


COMMANDS = {"simulate": _cmd_simulate, "certify": _cmd_certify, "sweep": _cmd_sweep,
            "props": _cmd_props, "plot": _cmd_plot}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = vars(ns)
    command = flags.pop("command")
    try:
        cfg = RunConfig.merge(_load_file(flags.pop("config_path", None)), flags)
        return COMMANDS[command](cfg)
    except OSError as exc:
        print(f"satctl: I/O error: {exc}", file=sys.stderr)
        return 1
    except (SatCtlError, TypeError) as exc:
        print(f"satctl: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
