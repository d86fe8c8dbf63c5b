"""Command-line front end: batch verification reports and plot grids.

    sasaki-t11 verify contact  [--samples N --seed S --eps E --tol T]
    sasaki-t11 verify einstein [--family LogModulus|LogSquared --c1 A --c2 B --deriv jets|fd]
    sasaki-t11 verify flow     [--family ... --t 0 0.1 0.5 --dt 1e-3 --integrator rk4|euler]
    sasaki-t11 emit grid       [--family ... --grid-n 16 --format csv|json --out FILE]

Reports are JSON. The exit code is 0 when every check passes, 1 when a
check fails and 2 for usage errors. ``wall_time_s`` is null unless
``--timing`` is given, so identical configurations give identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import deform, flow, sasaki
from .coords import COORD_NAMES, PHI1, PHI2, PSI, THETA1, THETA2, ChartDomain, sample_array
from .tensor import MetricError, curvature_report

COMMANDS = ("verify contact", "verify einstein", "verify flow", "emit grid")
FAMILY_CHOICES = ("LogModulus", "LogSquared")
DEFAULT_TOL = {"jets": 1e-7, "fd": 1e-4}
INTEGRATOR_TOL = 1e-6


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "verify contact"
    family: str | None = None
    c1: float = 0.3
    c2: float = -0.7
    samples: int = 200
    seed: int = 0
    eps_theta: float = 0.1
    tol: float | None = None
    deriv: str = "jets"
    t_values: list = field(default_factory=lambda: [0.0, 0.1, 0.5, 1.0])
    dt: float = 1e-3
    t_end: float = 0.5
    integrator: str = "rk4"
    grid_n: int = 16
    out_format: str = "json"
    out_path: str | None = None
    timing: bool = False

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.family is not None and self.family not in FAMILY_CHOICES:
            raise UsageError(f"family must be one of {FAMILY_CHOICES}, got {self.family!r}")
        if self.command == "verify contact" and self.family is not None:
            raise UsageError("verify contact checks the undeformed structure; --family is not accepted")
        if self.deriv not in DEFAULT_TOL:
            raise UsageError(f"deriv must be one of {tuple(DEFAULT_TOL)}, got {self.deriv!r}")
        if self.tol is None:
            self.tol = DEFAULT_TOL[self.deriv]
        if not self.tol > 0:
            raise UsageError("tol must be positive")
        if not self.samples > 0:
            raise UsageError("samples must be positive")
        if not 0 < self.eps_theta < math.pi / 2:
            raise UsageError("eps must lie in (0, pi/2)")
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise UsageError("c1 and c2 must be finite")
        if self.integrator not in flow.INTEGRATORS:
            raise UsageError(f"integrator must be one of {flow.INTEGRATORS}")
        if not self.dt > 0 or not self.t_end >= 0:
            raise UsageError("dt must be positive and t_end non-negative")
        if any(not math.isfinite(t) for t in self.t_values):
            raise UsageError("--t values must be finite")
        if self.grid_n < 2:
            raise UsageError("grid-n must be at least 2")
        if self.out_format not in ("json", "csv"):
            raise UsageError("format must be json or csv")
        if self.out_format == "csv" and self.command != "emit grid":
            raise UsageError("csv output is only available for emit grid")
        return self

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


# reports ------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    max_residual: float | None
    mean_residual: float | None
    tol: float
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.max_residual is not None and self.max_residual < self.tol

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "max_residual": _finite(self.max_residual),
            "mean_residual": _finite(self.mean_residual),
            "tol": self.tol,
            "pass": self.passed,
            "error": self.error,
        }


def _finite(v):
    if v is None or not math.isfinite(v):
        return None
    return float(v)


def run_check(name: str, tol: float, fn: Callable[[], np.ndarray]) -> Check:
    """Evaluate ``fn`` (per-point residuals); failures become a failed check with the message."""
    try:
        r = np.abs(np.asarray(fn(), dtype=float)).reshape(-1)
    except (MetricError, flow.FlowError, ValueError, FloatingPointError) as exc:
        return Check(name, None, None, tol, f"{type(exc).__name__}: {exc}")
    if r.size == 0:
        return Check(name, 0.0, 0.0, tol)
    if not np.all(np.isfinite(r)):
        return Check(name, math.inf, math.inf, tol, "non-finite residual")
    return Check(name, float(r.max()), float(r.mean()), tol)


def checks_from(residuals: Callable[[], dict], names: list[str], tol: float, prefix: str = "") -> list[Check]:
    """Turn a dict of per-point arrays into checks; an exception fails every named check."""
    try:
        res = residuals()
    except (MetricError, flow.FlowError, ValueError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
        return [Check(prefix + n, None, None, tol, msg) for n in names]
    return [run_check(prefix + n, tol, lambda n=n: res[n]) for n in names]


def build_report(cfg: RunConfig, n_points: int, checks: list[Check], wall: float | None) -> dict:
    finite = [c.max_residual for c in checks if c.max_residual is not None]
    means = [c.mean_residual for c in checks if c.mean_residual is not None]
    return {
        "command": cfg.command,
        "config": cfg.as_dict(),
        "n_points": n_points,
        "max_residual": _finite(max(finite)) if finite else None,
        "mean_residual": _finite(float(np.mean(means))) if means else None,
        "checks": [c.as_dict() for c in checks],
        "pass": all(c.passed for c in checks),
        "wall_time_s": round(wall, 3) if wall is not None else None,
    }


def _points(cfg: RunConfig) -> np.ndarray:
    return sample_array(ChartDomain(cfg.eps_theta), cfg.samples, cfg.seed)


def _phi0(cfg: RunConfig) -> deform.BasicFunction:
    return deform.family_function(cfg.family or "LogModulus", cfg.c1, cfg.c2)


# commands ----------------------------------------------------------------------


def cmd_verify_contact(cfg: RunConfig) -> tuple[int, list[Check]]:
    pts = _points(cfg)
    s = sasaki.sasaki_structure()
    checks = checks_from(lambda: sasaki.contact_residuals(s, pts), list(sasaki.contact_residuals(s, pts[:1])), cfg.tol)
    closed = sasaki.standard_metric()
    checks.append(run_check("assembled metric = closed form", cfg.tol, lambda: sasaki.per_point(s.metric(pts) - closed(pts))))
    checks.append(run_check("d eta = closed form", cfg.tol, lambda: sasaki.deta_residual(s, pts)))
    checks.append(
        run_check("eta coefficients", cfg.tol, lambda: sasaki.per_point(s.eta_at(pts) - _standard_eta(pts)))
    )
    return len(pts), checks


def _standard_eta(pts: np.ndarray) -> np.ndarray:
    out = np.zeros(pts.shape)
    out[:, PSI] = 1.0 / 3.0
    out[:, PHI1] = np.cos(pts[:, THETA1]) / 3.0
    out[:, PHI2] = np.cos(pts[:, THETA2]) / 3.0
    return out


def cmd_verify_einstein(cfg: RunConfig) -> tuple[int, list[Check]]:
    pts = _points(cfg)
    tol = cfg.tol
    if cfg.family is None:
        structure = sasaki.sasaki_structure()
        metric = sasaki.standard_metric()
    else:
        structure = deform.deform(_phi0(cfg))
        metric = deform.family_metric(cfg.family, cfg.c1, cfg.c2)
    checks = [
        run_check(
            f"Ric=4g [{metric.name}]",
            tol,
            lambda: curvature_report(metric, pts, sasaki.EINSTEIN_CONSTANT, cfg.deriv).einstein_residual,
        ),
        run_check(
            "assembled metric = closed form",
            tol,
            lambda: sasaki.per_point(structure.metric(pts) - metric(pts)),
        ),
    ]
    names = ["Ric(xi,xi)=2n", "Ric(X,xi)=0", "Ric|D=RicT-2g"]
    boyer_tol = {"Ric|D=RicT-2g": max(tol, 1e-6)}
    for c in checks_from(lambda: sasaki.boyer_residuals(structure, pts, cfg.deriv), names, tol):
        c.tol = boyer_tol.get(c.name, tol)
        checks.append(c)
    return len(pts), checks


def cmd_verify_flow(cfg: RunConfig) -> tuple[int, list[Check]]:
    pts = _points(cfg)
    phi0 = _phi0(cfg)
    checks = []
    for t in cfg.t_values:
        state = flow.FlowState(phi0, t)
        checks.append(run_check(f"flow residual t={t:g}", cfg.tol, lambda s=state: s.residual(pts)))
        checks.append(run_check(f"metric flow residual t={t:g}", max(cfg.tol, 1e-6), lambda s=state: s.metric_residual(pts)))

    run_cfg = flow.FlowConfig(cfg.dt, cfg.t_end, cfg.integrator, pts)
    series: list = []

    def integrate():
        if not series:
            series.append(flow.integrate_flow(phi0, run_cfg))
        return series[0]

    def vs(exact_fn):
        def fn():
            s = integrate()
            ref = np.stack([exact_fn(t, s.points) for t in s.times])
            scale = np.abs(ref).max()
            return np.abs(s.values - ref).max(axis=0) / (scale if scale > 0 else 1.0)

        return fn

    checks.append(
        run_check(
            "integrator vs (e^(6t)-1) phi0", INTEGRATOR_TOL,
            vs(lambda t, p: flow.flow_coefficient(t) * phi0.at_real(p)),
        )
    )
    checks.append(run_check("integrator vs e^(6t) phi0", INTEGRATOR_TOL, vs(flow.exponential_solution(phi0))))
    return len(pts), checks


def grid_rows(cfg: RunConfig) -> list[tuple[float, float, str, float]]:
    """Metric components and the Einstein residual over a ``theta1 x theta2`` grid."""
    n = cfg.grid_n
    th = np.linspace(cfg.eps_theta, math.pi - cfg.eps_theta, n)
    T1, T2 = np.meshgrid(th, th, indexing="ij")
    pts = np.zeros((n, n, 5))
    pts[..., THETA1] = T1
    pts[..., THETA2] = T2
    pts[..., PHI1] = 1.0
    pts[..., PHI2] = 1.0
    metric = sasaki.standard_metric() if cfg.family is None else deform.family_metric(cfg.family, cfg.c1, cfg.c2)
    flat = pts.reshape(-1, 5)
    rep = curvature_report(metric, flat, sasaki.EINSTEIN_CONSTANT, cfg.deriv)
    g = metric(flat)
    comps = [(f"g_{COORD_NAMES[i]}_{COORD_NAMES[j]}", g[:, i, j]) for i in range(5) for j in range(i, 5)]
    comps.append(("einstein_residual", rep.einstein_residual))
    comps.append(("scalar_curvature", rep.scalar))
    rows = []
    for k, p in enumerate(flat):
        for name, vals in comps:
            rows.append((float(p[THETA1]), float(p[THETA2]), name, float(vals[k])))
    return rows


def cmd_emit_grid(cfg: RunConfig) -> str:
    rows = grid_rows(cfg)
    if cfg.out_format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta1", "theta2", "component", "value"])
        for t1, t2, name, v in rows:
            w.writerow([repr(t1), repr(t2), name, repr(v)])
        return buf.getvalue()
    doc = {
        "config": cfg.as_dict(),
        "columns": ["theta1", "theta2", "component", "value"],
        "rows": [list(r) for r in rows],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


VERIFY = {"contact": cmd_verify_contact, "einstein": cmd_verify_einstein, "flow": cmd_verify_flow}


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute a validated config; returns ``(exit_code, text)``."""
    cfg.validate()
    if cfg.command == "emit grid":
        return 0, cmd_emit_grid(cfg)
    start = time.perf_counter()
    n, checks = VERIFY[cfg.command.split()[1]](cfg)
    wall = time.perf_counter() - start if cfg.timing else None
    report = build_report(cfg, n, checks, wall)
    return (0 if report["pass"] else 1), json.dumps(report, indent=2, sort_keys=True) + "\n"


# argument parsing ------------------------------------------------------------------------


FLAG_DESTS = {
    "family": "family",
    "c1": "c1",
    "c2": "c2",
    "samples": "samples",
    "seed": "seed",
    "eps": "eps_theta",
    "tol": "tol",
    "deriv": "deriv",
    "t": "t_values",
    "dt": "dt",
    "t_end": "t_end",
    "integrator": "integrator",
    "grid_n": "grid_n",
    "format": "out_format",
    "out": "out_path",
    "timing": "timing",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--family", choices=FAMILY_CHOICES)
    common.add_argument("--c1", type=float)
    common.add_argument("--c2", type=float)
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--eps", type=float, help="pole margin for theta (radians)")
    common.add_argument("--tol", type=float)
    common.add_argument("--deriv", choices=tuple(DEFAULT_TOL))
    common.add_argument("--t", type=float, nargs="+", help="flow times for the analytic family")
    common.add_argument("--dt", type=float)
    common.add_argument("--t-end", dest="t_end", type=float)
    common.add_argument("--integrator", choices=flow.INTEGRATORS)
    common.add_argument("--grid-n", dest="grid_n", type=int)
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out", help="write the report or grid here instead of stdout")
    common.add_argument("--timing", action=argparse.BooleanOptionalAction, default=None,
                        help="record wall time (makes reports non-reproducible)")

    parser = argparse.ArgumentParser(prog="sasaki-t11", description="Numerical checks for Sasaki geometry on T^{1,1}.")
    top = parser.add_subparsers(dest="group", required=True)
    verify = top.add_parser("verify", help="run a verification suite")
    vsub = verify.add_subparsers(dest="what", required=True)
    for name in VERIFY:
        vsub.add_parser(name, parents=[common])
    emit = top.add_parser("emit", help="write plot-ready data")
    esub = emit.add_subparsers(dest="what", required=True)
    esub.add_parser("grid", parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
    data["command"] = f"{args.group} {args.what}"
    for flag, dest in FLAG_DESTS.items():
        v = getattr(args, flag)
        if v is not None:
            data[dest] = v
    return RunConfig.from_mapping(data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        code, text = run(cfg)
    except (UsageError, TypeError) as exc:
        parser.error(str(exc))
    if cfg.out_path:
        try:
            Path(cfg.out_path).write_text(text)
        except OSError as exc:
            print(f"sasaki-t11: cannot write {cfg.out_path}: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
