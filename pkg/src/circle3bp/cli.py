"""Command-line front end: parse a run configuration, dispatch, emit files.

Every command accepts its parameters as flags or as a JSON file via
``--config``; explicit flags win over file values, file values win over
defaults. Numeric output goes to CSV (trajectories, contours, exit scans)
or JSON (structured reports), and the first line of every file is a ``#``
comment embedding the full configuration, so any output can be reproduced
from its own header. Re-running a command with the same configuration
byte-reproduces the files.

Exit status: 0 on success, 2 for usage problems (unparseable flags,
invalid masses, out-of-range parameters), 1 when a numerical routine
fails; the one-line diagnostic names the failed module exception.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from .claims import verify_all
from .coords import TRAJECTORY_COLUMNS, RegularizedState
from .dynamics import (
    ImaginaryGamma,
    IntegratorConfig,
    StepFailure,
    energy_residual,
    integrate,
)
from .homothetic import classify_trichotomy
from .model import build_context
from .potential import Singular, zero_velocity_curve
from .shooting import (
    ClosureFailure,
    NoFaceChange,
    ShootConfig,
    assemble_period,
    bracket_and_bisect,
    render_physical,
)
from .wazewski import NoExit, exit_map, linearize_P, r_cap, shooting_point

_COMMANDS = ("simulate", "shoot", "wazewski", "homothetic", "claims",
             "zvc", "linearize")

# module failures that map to exit status 1
_NUMERICAL = (Singular, ImaginaryGamma, StepFailure, NoExit, NoFaceChange,
              ClosureFailure, ArithmeticError, RuntimeError, ValueError)


class UsageError(ValueError):
    """Configuration problem detected before dispatch; exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs of one command invocation."""

    command: str
    m: float = 1.0 / 3.0
    h: float = -1.0
    r0: float | None = None
    tol: float = 1e-8
    grid: int = 41
    scan: int = 24
    out: str | None = None
    report: str | None = None
    region: str = "I"
    seed: int = 0

    def validate(self) -> None:
        if self.command not in _COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not 0.0 < self.m < 1.0:
            raise UsageError(f"mass ratio m must lie in (0, 1), got {self.m}")
        if not math.isfinite(self.h):
            raise UsageError(f"energy h must be finite, got {self.h}")
        if self.command in ("shoot", "wazewski", "simulate") and self.h > -1.0:
            raise UsageError(f"command {self.command!r} requires h <= -1, "
                             f"got {self.h}")
        if self.r0 is not None and self.r0 <= 0.0:
            raise UsageError(f"r0 must be positive, got {self.r0}")
        if self.tol <= 0.0:
            raise UsageError(f"tol must be positive, got {self.tol}")
        if self.grid < 2:
            raise UsageError(f"grid must be at least 2, got {self.grid}")
        if self.scan < 3:
            raise UsageError(f"scan must be at least 3, got {self.scan}")
        if self.region not in ("I", "II", "III", "IV"):
            raise UsageError(f"unknown region {self.region!r}")

    def header_line(self) -> str:
        return "# " + json.dumps(asdict(self), sort_keys=True)


def _f(x) -> str:
    """Shortest round-trip decimal for a scalar, numpy included."""
    return repr(float(x))


def _jsonable(obj):
    """Recursively coerce numpy scalars/arrays and tuples for json.dumps."""
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    return obj


def _write_csv(path: str, cfg: RunConfig, columns, rows) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(cfg.header_line() + "\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(v if isinstance(v, str) else repr(float(v))
                             for v in row) + "\n")


def _write_json(path: str, cfg: RunConfig, payload: dict) -> None:
    doc = {"config": asdict(cfg)}
    doc.update(_jsonable(payload))
    with open(path, "w", encoding="ascii", newline="\n") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def _trajectory_rows(sigma, states, t_phys, ctx, h):
    """Expand (sigma, states, t) into the thirteen standard columns."""
    rows = []
    for sg, (r, nu, u, gm), tp in zip(sigma, states, t_phys):
        th = ctx.theta_star * math.sin(u)
        x1 = r * math.cos(th) / math.sqrt(ctx.mu1)
        x2 = r * math.sin(th) / math.sqrt(ctx.mu2)
        phi1 = -ctx.alpha2 * x1 - ctx.m * x2
        phi2 = ctx.alpha1 * x1 - ctx.m * x2
        phi3 = 2.0 * ctx.n * x2
        res = energy_residual(RegularizedState(r, nu, u, gm), ctx, h)
        rows.append((sg, tp, r, nu, u, gm, th, x1, x2, phi1, phi2, phi3, res))
    return rows


def _cmd_simulate(cfg: RunConfig) -> str:
    ctx = build_context(cfg.m)
    r0 = cfg.r0 if cfg.r0 is not None else 0.5 * r_cap(ctx, cfg.h)
    s0 = shooting_point(r0, ctx, cfg.h)
    traj = integrate(s0, ctx, cfg.h,
                     IntegratorConfig(rel_tol=min(cfg.tol, 1e-8),
                                      sigma_max=20.0))
    if cfg.out:
        _write_csv(cfg.out, cfg, TRAJECTORY_COLUMNS,
                   _trajectory_rows(traj.sigma, traj.states, traj.t_phys,
                                    ctx, cfg.h))
    fin = traj.final_state
    return (f"simulate: r0={_f(r0)} steps={len(traj.sigma)} "
            f"termination={traj.termination} final_u={_f(fin.u)}")


def _cmd_shoot(cfg: RunConfig) -> str:
    ctx = build_context(cfg.m)
    quarter = bracket_and_bisect(
        ShootConfig(residual_tol=cfg.tol, scan=cfg.scan), ctx, cfg.h)
    orbit = assemble_period(quarter, ctx, cfg.h)
    phys = render_physical(orbit, ctx)
    if cfg.out:
        _write_csv(cfg.out, cfg, TRAJECTORY_COLUMNS,
                   _trajectory_rows(orbit.sigma, orbit.states, orbit.t_phys,
                                    ctx, cfg.h))
    if cfg.report:
        _write_json(cfg.report, cfg, {
            "m": cfg.m, "h": cfg.h,
            "r0": orbit.r0, "gamma0": orbit.gamma0,
            "r1": orbit.r1, "gamma1": orbit.gamma1,
            "residual": quarter.residual,
            "sigma_period": orbit.sigma_period,
            "t_period": orbit.t_period,
            "closure_error": orbit.closure_error,
            "body1_speed_at_collision": phys.v1_at_quarter,
            "trace": [(r, face, res) for r, face, res in quarter.trace],
        })
    return (f"shoot: r0={_f(orbit.r0)} residual={_f(quarter.residual)} "
            f"period={_f(orbit.t_period)} closure={_f(orbit.closure_error)}")


def _cmd_wazewski(cfg: RunConfig) -> str:
    ctx = build_context(cfg.m)
    cap = r_cap(ctx, cfg.h)
    if cfg.r0 is not None:
        radii = [cfg.r0]
    else:
        radii = list(np.linspace(0.02 * cap, 0.98 * cap, cfg.scan))
    rows = []
    faces = []
    for r0 in radii:
        rec = exit_map(shooting_point(r0, ctx, cfg.h), ctx, cfg.h)
        e = rec.exit_state
        rows.append((r0, rec.face, e.r, e.nu, e.u, e.gamma, rec.exit_sigma))
        faces.append(rec.face)
    if cfg.out:
        _write_csv(cfg.out, cfg,
                   ("r0", "face", "exit_r", "exit_nu", "exit_u",
                    "exit_gamma", "sigma"), rows)
    flips = sum(1 for a, b in zip(faces, faces[1:]) if a != b)
    return (f"wazewski: points={len(rows)} faces={faces[0]}..{faces[-1]} "
            f"flips={flips}")


def _cmd_homothetic(cfg: RunConfig) -> str:
    rep = classify_trichotomy(cfg.m, cfg.h)
    if cfg.report:
        _write_json(cfg.report, cfg, {
            "m": cfg.m, "h": rep.h, "regime": rep.regime,
            "x1_eq": rep.x1_eq, "h0": rep.h0, "motion": rep.motion,
            "velocity_blowup": rep.velocity_blowup,
        })
    h0 = "none" if rep.h0 is None else _f(rep.h0)
    return f"homothetic: regime={rep.regime} motion={rep.motion} h0={h0}"


def _cmd_claims(cfg: RunConfig) -> str:
    ctx = build_context(cfg.m)
    rep = verify_all(ctx, grid=cfg.grid, h=cfg.h)
    if cfg.report:
        _write_json(cfg.report, cfg, {
            "m": rep.m, "grid": rep.grid, "all_pass": rep.all_pass,
            "claims": [{"name": c.name, "status": c.status,
                        "margin": c.margin, "worst_at": c.worst_at,
                        "details": c.details} for c in rep.claims],
            "constants": rep.constants,
        })
    statuses = " ".join(f"{c.name}={c.status}" for c in rep.claims)
    return f"claims: all_pass={rep.all_pass} {statuses}"


def _cmd_zvc(cfg: RunConfig) -> str:
    ctx = build_context(cfg.m)
    grid = max(cfg.grid, 64)
    polylines = zero_velocity_curve(ctx, cfg.h, region=cfg.region,
                                    grid=grid, tol=cfg.tol)
    rows = []
    for k, poly in enumerate(polylines):
        for x1, x2 in poly.points:
            rows.append((float(k), x1, x2))
    if cfg.out:
        _write_csv(cfg.out, cfg, ("polyline", "x1", "x2"), rows)
    return (f"zvc: region={cfg.region} polylines={len(polylines)} "
            f"vertices={len(rows)}")


def _cmd_linearize(cfg: RunConfig) -> str:
    ctx = build_context(cfg.m)
    eq = linearize_P(ctx, cfg.h)
    fd_gap = float(np.max(np.abs(eq.jacobian3 - eq.jacobian_fd)))
    if cfg.report:
        _write_json(cfg.report, cfg, {
            "m": cfg.m, "h": cfg.h,
            "P": [eq.P.r, eq.P.nu, eq.P.u, eq.P.gamma],
            "eigenvalues": [eq.lambda1, eq.lambda2, eq.lambda3],
            "eigenvectors": eq.eigenvectors,
            "jacobian": eq.jacobian3,
            "fd_agreement": fd_gap,
        })
    return (f"linearize: lambda1={_f(eq.lambda1)} lambda2={_f(eq.lambda2)} "
            f"lambda3={_f(eq.lambda3)}")


_DISPATCH = {
    "simulate": _cmd_simulate,
    "shoot": _cmd_shoot,
    "wazewski": _cmd_wazewski,
    "homothetic": _cmd_homothetic,
    "claims": _cmd_claims,
    "zvc": _cmd_zvc,
    "linearize": _cmd_linearize,
}

# which optional flags each subcommand exposes
_FLAGS = {
    "simulate": ("m", "h", "r0", "tol", "out"),
    "shoot": ("m", "h", "tol", "scan", "out", "report"),
    "wazewski": ("m", "h", "r0", "scan", "out"),
    "homothetic": ("m", "h", "report"),
    "claims": ("m", "h", "grid", "report"),
    "zvc": ("m", "h", "region", "grid", "tol", "out"),
    "linearize": ("m", "h", "report"),
}

_HELP = {
    "m": "mass of the third body (the equal pair each get (1-m)/2)",
    "h": "energy level",
    "r0": "initial radial distance on the shooting segment",
    "tol": "tolerance (shooting residual / integrator / contour)",
    "grid": "grid resolution for claims and contour commands",
    "scan": "number of scan points (bracketing / exit-map sweep)",
    "out": "CSV output path",
    "report": "JSON report path",
    "region": "configuration-space region for zvc (I-IV)",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circle3bp",
        description="Regularized circular three-body dynamics toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="JSON file with configuration values")
        for flag in _FLAGS[name]:
            kind = {"grid": int, "scan": int, "region": str,
                    "out": str, "report": str}.get(flag, float)
            p.add_argument(f"--{flag}", type=kind, default=None,
                           help=_HELP[flag])
    return parser


_FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def parse_config(argv) -> RunConfig:
    """Combine flags, optional JSON file, and defaults into a RunConfig."""
    args = build_parser().parse_args(argv)
    values = {"command": args.command}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="ascii") as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(loaded) - set(_FIELD_NAMES)
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
        file_cmd = loaded.pop("command", None)
        if file_cmd is not None and file_cmd != args.command:
            raise UsageError(f"config file names command {file_cmd!r} but "
                             f"{args.command!r} was invoked")
        values.update(loaded)
    for name in _FIELD_NAMES:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def run(cfg: RunConfig) -> int:
    """Dispatch one validated configuration; returns the exit status."""
    try:
        print(_DISPATCH[cfg.command](cfg))
    except _NUMERICAL as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
