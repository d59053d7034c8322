"""Command-line front end.

Exit status: 0 when every check is within tolerance, 1 on a tolerance
failure, 2 on a configuration error, 3 when a computation fails.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import acceptance
from .asymptotics import (
    SCHEDULE,
    counterexample,
    curvature_ratio_bounds,
    kernel_ratio_bounds,
    lemma31_series,
    metric_ratio_bounds,
    parallel_map,
)
from .geometry import ConeStream, ModelDomain, build_frame, geometric_log_t_grid, parse_t_grid, sandwich_check
from .kernel import (
    DEFAULT_TRUNCATION,
    Dilation,
    DiscAutomorphism,
    TruncationError,
    Unitary,
    extremal,
    fuchs_check,
    kernel_jet,
    transform_check,
)
from .profile import RootFindingError, parse_profile
from .reinhardt import parse_domain
from .report import fmt, plot_lines, write_csv

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2, 3

DEFAULTS = {
    "domain": "prod:disc,ball:1",
    "profile": "exp:1",
    "stream": None,
    "point": None,
    "direction": None,
    "truncation": DEFAULT_TRUNCATION,
    "epsilon": None,
    "delta": None,
    "logt": None,
    "t_grid": None,
    "samples": 10_000,
    "seed": 0,
    "jobs": None,
    "out": None,
    "format": "csv",
    "tol": 1e-8,
    "n": 1,
    "map": "dilation:0.5",
    "quantity": "all",
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def _parse_complex_list(text: str) -> np.ndarray:
    try:
        return np.array([complex(p.strip().replace(" ", "")) for p in text.split(",")], dtype=complex)
    except ValueError:
        raise ConfigError(f"cannot parse complex vector {text!r}") from None


def _parse_stream(value) -> ConeStream:
    if value is None:
        return ConeStream()
    if isinstance(value, dict):
        spec = value
    else:
        text = str(value)
        if os.path.isfile(text):
            text = Path(text).read_text()
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"stream spec is not valid JSON: {exc}") from None
    try:
        return ConeStream.from_json(spec)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad stream spec: {exc}") from None


def _parse_grid(cfg: dict) -> np.ndarray:
    if cfg.get("logt") is not None:
        vals = cfg["logt"]
        if isinstance(vals, (int, float)):
            return np.array([float(vals)])
        if isinstance(vals, list):
            return np.array([float(v) for v in vals])
        try:
            return np.array([float(v) for v in str(vals).split(",")])
        except ValueError:
            raise ConfigError(f"cannot parse --logt {vals!r}") from None
    grid = cfg.get("t_grid")
    if grid is None:
        return geometric_log_t_grid()
    if isinstance(grid, str):
        try:
            grid = json.loads(grid)
        except json.JSONDecodeError:
            parts = grid.split(",")
            if len(parts) != 3:
                raise ConfigError("--t-grid takes JSON or 'log_t_start,log_t_end,points'") from None
            grid = {"log_t_start": float(parts[0]), "log_t_end": float(parts[1]), "points": int(parts[2])}
    try:
        return parse_t_grid(grid)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad t-grid: {exc}") from None


def _schedule(cfg: dict) -> list[tuple[float, float]]:
    eps, delta = cfg.get("epsilon"), cfg.get("delta")
    if eps is None and delta is None:
        return list(SCHEDULE)
    if eps is None or delta is None:
        raise ConfigError("--epsilon and --delta must be given together")
    if eps <= 0 or not 0 < delta < 1:
        raise ConfigError("need epsilon > 0 and 0 < delta < 1")
    return [(float(eps), float(delta))]


def _jobs(cfg: dict) -> int:
    jobs = cfg.get("jobs")
    return max(1, os.cpu_count() or 1) if jobs is None else max(1, int(jobs))


def _emit(cfg: dict, comments: list[str], columns: list[str], rows: list, plot=None) -> None:
    out = cfg.get("out")
    if cfg.get("format") == "svg":
        if not out:
            raise ConfigError("--format svg needs --out")
        if plot is None:
            raise ConfigError("this subcommand has no plot")
        plot(out)
        return
    if out:
        write_csv(out, comments, columns, rows)
    else:
        sys.stdout.write(write_csv(None, comments, columns, rows))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _point_and_direction(cfg: dict, dim: int) -> tuple[np.ndarray, Optional[np.ndarray]]:
    z = np.zeros(dim, dtype=complex) if cfg.get("point") is None else _parse_complex_list(cfg["point"])
    if z.shape[0] != dim:
        raise ConfigError(f"--point needs {dim} coordinates")
    xi = None
    if cfg.get("direction") is not None:
        xi = _parse_complex_list(cfg["direction"])
        if xi.shape[0] != dim:
            raise ConfigError(f"--direction needs {dim} coordinates")
    return z, xi


def _domain(cfg: dict):
    try:
        return parse_domain(cfg["domain"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_point(cfg: dict, what: str) -> int:
    D = _domain(cfg)
    z, xi = _point_and_direction(cfg, D.dim)
    T = int(cfg["truncation"])
    if what in ("metric", "curvature") and xi is None:
        raise ConfigError(f"{what} needs --direction")
    jet = kernel_jet(D, z, T)
    tag = f"certified (tail estimate {jet.tail:.3g})"
    lines = [("domain", D.spec), ("T", T)]
    if what == "kernel":
        lines.append(("kappa", jet.kappa))
    elif what == "metric":
        lines.append(("B", jet.metric_norm(xi)))
    elif what == "curvature":
        lines.append(("H", jet.curvature(xi)))
    elif what == "extremal":
        for j in range(3 if xi is not None else 1):
            res = extremal(D, z, xi, j, T)
            lines.append((f"I{j}", res.value))
            lines.append((f"I{j}_constraint_residual", res.max_residual))
    for key, val in lines:
        suffix = f"  [{tag}]" if isinstance(val, float) and not key.endswith("residual") else ""
        print(f"{key} = {fmt(val)}{suffix}")
    if cfg.get("out"):
        write_csv(cfg["out"], [f"{what} at z={fmt(list(z))}", tag], ["quantity", "value", "tag"],
                  [[k, v, "certified"] for k, v in lines if isinstance(v, float)])
    return EXIT_OK


def cmd_fuchs(cfg: dict) -> int:
    D = _domain(cfg)
    z, xi = _point_and_direction(cfg, D.dim)
    if xi is None:
        xi = np.eye(D.dim, dtype=complex)[0]
    res = fuchs_check(D, z, xi, int(cfg["truncation"]))
    tol = float(cfg["tol"])
    for name, v in zip(res._fields, res):
        print(f"residual_{name} = {fmt(v)}  [{'within' if v < tol else 'above'} {tol:g}]")
    return EXIT_OK if max(res) < tol else EXIT_TOLERANCE


def _parse_map(text: str, dim: int):
    kind, _, arg = text.partition(":")
    try:
        if kind == "dilation":
            return Dilation(float(arg))
        if kind == "automorphism":
            return DiscAutomorphism(complex(arg))
        if kind == "phases":
            angles = [float(a) for a in arg.split(",")]
            if len(angles) != dim:
                raise ConfigError(f"phases map needs {dim} angles")
            return Unitary(np.diag(np.exp(1j * np.array(angles))))
        if kind == "unitary":
            U = np.array(json.loads(arg), dtype=complex) if arg else np.eye(dim, dtype=complex)
            return Unitary(U)
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad map spec {text!r}: {exc}") from None
    raise ConfigError(f"unknown map {text!r}; use dilation:l, automorphism:a, phases:t1,...,tn or unitary:[[..]]")


def cmd_transform(cfg: dict) -> int:
    D = _domain(cfg)
    z, xi = _point_and_direction(cfg, D.dim)
    if xi is None:
        xi = np.eye(D.dim, dtype=complex)[0]
    fmap = _parse_map(cfg["map"], D.dim)
    try:
        res = transform_check(fmap, D, z, xi, int(cfg["truncation"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    tol = float(cfg["tol"])
    for name, v in zip(("I0", "I1", "I2"), res):
        print(f"residual_{name} = {fmt(v)}  [{'within' if v < tol else 'above'} {tol:g}]")
    return EXIT_OK if max(res) < tol else EXIT_TOLERANCE


def _model(cfg: dict) -> ModelDomain:
    try:
        return ModelDomain(n=int(cfg["n"]), profile=parse_profile(cfg["profile"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_lemma31(cfg: dict) -> int:
    domain, stream, grid = _model(cfg), _parse_stream(cfg.get("stream")), _parse_grid(cfg)
    eps_values = (1.0, 0.5, 0.25) if cfg.get("epsilon") is None else (float(cfg["epsilon"]),)
    table = lemma31_series(domain, stream, grid, eps_values, jobs=_jobs(cfg))
    below, mono, lim = table.below(), table.monotone(), table.liminf_ok()
    ok = all(below.values()) and all(mono.values()) and all(a and b for a, b in lim.values())
    comments = [
        f"profile {domain.profile.spec}, stream {stream}",
        "columns log_*: natural logs of the vanishing quantities; dstar_over_d*: tangential radius ratios",
        "below 1e-6 for log t <= -300: " + ", ".join(f"{k}={v}" for k, v in below.items()),
        "monotone on tail: " + ", ".join(f"{k}={v}" for k, v in mono.items()),
        "liminf bounds: " + ", ".join(f"eps={e:g}:{a and b}" for e, (a, b) in lim.items()),
        "tag: certified (all values are direct evaluations)",
    ]

    def plot(path):
        series = {k: [r.vanishing()[k] for r in table.rows] for k in table.rows[0].vanishing()}
        series = {k: [max(v, -1e3) for v in vals] for k, vals in series.items()}
        plot_lines(path, grid, series, "log t", "log value (clipped at -1000)")

    _emit(cfg, comments, table.columns(), table.records(), plot)
    return EXIT_OK if ok else EXIT_TOLERANCE


class _SandwichWorker:
    def __init__(self, domain, stream, eps, delta, samples, seed):
        self.args = (domain, stream, eps, delta, samples, seed)

    def __call__(self, log_t):
        domain, stream, eps, delta, samples, seed = self.args
        frame = build_frame(domain, stream, float(log_t))
        return sandwich_check(frame, eps, delta, samples, seed)


def cmd_sandwich(cfg: dict) -> int:
    domain, stream, grid = _model(cfg), _parse_stream(cfg.get("stream")), _parse_grid(cfg)
    eps = 0.5 if cfg.get("epsilon") is None else float(cfg["epsilon"])
    delta = 0.1 if cfg.get("delta") is None else float(cfg["delta"])
    if not 0 < delta < 1:
        raise ConfigError("delta must lie in (0, 1)")
    reports = parallel_map(_SandwichWorker(domain, stream, eps, delta, int(cfg["samples"]), int(cfg["seed"])), grid, _jobs(cfg))
    rows = [[r.log_t, r.violations_in, r.violations_out, r.accepted_out, r.starved,
             "certified" if r.certified_in else "non-certified"] for r in reports]
    ok = all(r.violations_in == 0 and r.violations_out == 0 for r in reports)
    comments = [f"eps={eps:g} delta={delta:g} samples={cfg['samples']} seed={cfg['seed']}",
                "tag: whether the first inclusion is also certified analytically"]

    def plot(path):
        plot_lines(path, grid, {"violations_in": [r.violations_in for r in reports],
                                "violations_out": [r.violations_out for r in reports]}, "log t", "violations")

    _emit(cfg, comments, ["log_t", "violations_in", "violations_out", "accepted_out", "starved", "tag"], rows, plot)
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_ratios(cfg: dict) -> int:
    domain, stream, grid = _model(cfg), _parse_stream(cfg.get("stream")), _parse_grid(cfg)
    quantity = cfg.get("quantity", "all")
    if quantity not in ("kernel", "metric", "curvature", "all"):
        raise ConfigError("--quantity must be kernel, metric, curvature or all")
    dim = domain.dim
    if cfg.get("direction") is not None:
        directions = [tuple(_parse_complex_list(cfg["direction"]))]
        if len(directions[0]) != dim:
            raise ConfigError(f"--direction needs {dim} coordinates")
    else:
        directions = [tuple(row) for row in np.eye(dim)] + [tuple(np.ones(dim))]
    T, jobs = int(cfg["truncation"]), _jobs(cfg)
    all_series = []
    for eps, delta in _schedule(cfg):
        if quantity in ("kernel", "all"):
            all_series.append(kernel_ratio_bounds(domain, stream, eps, delta, grid, T, jobs))
        for xi in directions:
            if quantity in ("metric", "all"):
                all_series.append(metric_ratio_bounds(domain, stream, xi, eps, delta, grid, T, jobs))
            if quantity in ("curvature", "all"):
                all_series.append(curvature_ratio_bounds(domain, stream, xi, eps, delta, grid, T, jobs))
    rows, ok = [], True
    for s in all_series:
        ok = ok and s.contains_target()
        xi = "" if s.direction is None else "(" + ",".join(fmt(c.real if c.imag == 0 else c) for c in s.direction) + ")"
        for r in s.rows():
            rows.append([s.quantity, xi, s.eps, s.delta, s.target] + r)
    comments = [
        f"profile {domain.profile.spec}, n={domain.n}, stream {stream}, T={T}",
        "lower/upper: certified bounds from I_j monotonicity across the sandwich inclusion",
        "center: geometric mean of the bounds (midpoint if they differ in sign), non-certified",
    ]

    def plot(path):
        series = {}
        for s in all_series:
            label = f"{s.quantity} eps={s.eps:g} delta={s.delta:g}"
            if s.direction is not None:
                label += f" xi={tuple(c.real for c in s.direction)}"
            series[label + " width"] = [math.log(abs(r.upper - r.lower)) for r in s.records]
        plot_lines(path, grid, series, "log t", "log bracket width")

    _emit(cfg, comments, ["quantity", "xi", "eps", "delta", "target"] + all_series[0].columns(), rows, plot)
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_counterexample(cfg: dict) -> int:
    profile = parse_profile(cfg["profile"])
    if profile.m != 1:
        raise ConfigError("the counterexample is stated for exp:1")
    grid = _parse_grid(cfg)
    rep = counterexample(grid, profile=profile)
    err = float(np.max(np.abs(rep.ratio - math.sqrt(2.0))))
    for i, lt in enumerate(rep.log_t):
        print(f"log t = {fmt(lt)}: d* = {fmt(rep.dstar[i])}, d1 = {fmt(rep.d1[i])}, d1/d* = {fmt(rep.ratio[i])}  [certified]")
        cross = rep.crossing(i)
        if cross:
            print(f"  quotient changes from vanishing to diverging between |u2| = {fmt(cross[0])} and {fmt(cross[1])}")
    rows = []
    for i, lt in enumerate(rep.log_t):
        for j, u in enumerate(rep.u_grid):
            rows.append([lt, rep.dstar[i], rep.d1[i], u, rep.quotient(i, j), rep.log_quotient[i, j], "certified"])
    if cfg.get("out") or cfg.get("format") == "svg":
        def plot(path):
            plot_lines(path, rep.u_grid, {f"log t = {fmt(lt)}": rep.log_quotient[i] for i, lt in enumerate(rep.log_t)},
                       "|u2|", "log quotient", hline=0.0)

        _emit(cfg, ["quotient = phi(|d* u2|^2) / sqrt(phi(d*^2)); threshold at |u2| = sqrt(2)"],
              ["log_t", "dstar", "d1", "u2", "quotient", "log_quotient", "tag"], rows, plot)
    return EXIT_OK if err <= 1e-12 else EXIT_TOLERANCE


def cmd_verify(cfg: dict) -> int:
    out = Path(cfg["out"]) if cfg.get("out") else None
    results = acceptance.run_suite(seed=int(cfg["seed"]), jobs=_jobs(cfg) if cfg.get("jobs") else 1, out_dir=out)
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_TOLERANCE


COMMANDS = {
    "kernel": lambda cfg: cmd_point(cfg, "kernel"),
    "metric": lambda cfg: cmd_point(cfg, "metric"),
    "curvature": lambda cfg: cmd_point(cfg, "curvature"),
    "extremal": lambda cfg: cmd_point(cfg, "extremal"),
    "fuchs": cmd_fuchs,
    "transform": cmd_transform,
    "lemma31": cmd_lemma31,
    "sandwich": cmd_sandwich,
    "ratios": cmd_ratios,
    "counterexample": cmd_counterexample,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration (flags override --config)")
    g.add_argument("--config", help="JSON file with any of the options below")
    g.add_argument("--domain", help="Reinhardt domain spec, e.g. prod:disc,ball:1")
    g.add_argument("--profile", help="flat profile spec exp:m")
    g.add_argument("--n", type=int, help="tangential dimension of the model domain")
    g.add_argument("--stream", help="stream spec as JSON text or a JSON file")
    g.add_argument("--point", help="comma-separated complex coordinates")
    g.add_argument("--direction", help="comma-separated complex direction")
    g.add_argument("--truncation", type=int, help="total degree T of the monomial basis")
    g.add_argument("--epsilon", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--logt", help="natural log of t, one value or a comma list")
    g.add_argument("--t-grid", dest="t_grid", help="JSON t-grid or 'log_t_start,log_t_end,points'")
    g.add_argument("--samples", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--jobs", type=int, help="worker processes (default: available cores)")
    g.add_argument("--out", help="output file (directory for verify)")
    g.add_argument("--format", choices=("csv", "svg"))
    g.add_argument("--tol", type=float, help="tolerance for identity checks")
    g.add_argument("--map", help="transform: dilation:l, automorphism:a, phases:t1,..., unitary:[[...]]")
    g.add_argument("--quantity", help="ratios: kernel, metric, curvature or all")

    parser = argparse.ArgumentParser(prog="flatbergman", description="Bergman kernel asymptotics at exponentially flat points.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def load_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(file_cfg)
    for key, val in vars(args).items():
        if key in ("config", "command") or val is None:
            continue
        cfg[key] = val
    if cfg["truncation"] is None or int(cfg["truncation"]) < 2:
        raise ConfigError("truncation must be >= 2")
    if cfg["tol"] is None or float(cfg["tol"]) <= 0:
        raise ConfigError("tolerance must be positive")
    if int(cfg["samples"]) <= 0:
        raise ConfigError("samples must be positive")
    return cfg


VALUE_FLAGS = ("--logt", "--point", "--direction", "--t-grid")


def _glue_values(argv: Sequence[str]) -> list[str]:
    """Join ``--logt -100,-400`` into ``--logt=-100,-400``; argparse otherwise
    reads a leading minus on a comma list as a new option."""
    out, i = [], 0
    while i < len(argv):
        arg = argv[i]
        if arg in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{arg}={argv[i + 1]}")
            i += 2
            continue
        out.append(arg)
        i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parser.parse_args(_glue_values(list(argv)))
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TruncationError, RootFindingError, ArithmeticError, RuntimeError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
