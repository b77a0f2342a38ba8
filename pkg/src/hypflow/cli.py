"""Command-line front end: ``hypflow sigma0 | flow | verify``.

Exit codes (stable): 0 success, 2 usage/config error, 3 inadmissible
initial data, 4 no convergence, 5 a monitored inequality or verify check
failed.
"""

import argparse
import csv
import logging
import re
import sys
from dataclasses import dataclass, fields, replace
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .analysis import SIGMA0_BRACKET, find_sigma0, phi_eval
from .curvature import CurvatureFunctionSpec
from .errors import DomainError, HypflowError, InadmissibleInitialDataError, ParameterError
from .flow import (
    CSV_COLUMNS,
    HOROSPHERE,
    KINDS,
    PERTURBED_CAP,
    SUBCRITICAL_CAP,
    FlowConfig,
    FlowState,
    initial_heights,
    run_to_stationary,
    stationary_target,
)
from .geometry import INTERVAL, DomainSpec, Grid, write_snapshot
from .suites import SUITES

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INADMISSIBLE = 3
EXIT_NOT_CONVERGED = 4
EXIT_MONITOR = 5

log = logging.getLogger("hypflow")


def artifact_version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


# ----------------------------------------------------------------------------
# configuration files


class ConfigError(Exception):
    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"field '{key}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line = line
        self.key = key


def _optional_float(text):
    return None if text.lower() == "none" else float(text)


@dataclass
class RunConfig:
    """Everything a flow run needs; the manifest is a dump of these fields."""

    sigma: float = None
    mode: str = INTERVAL
    n: int = 1
    r: float = 1.0
    node_count: int = 201
    k: int = 1
    l: int = 0
    epsilon: float = None
    dt_max: float = 1e-2
    safety: float = 0.5
    t_end: float = 50.0
    stat_tol: float = 1e-6
    monitor_a: float = None
    kind: str = SUBCRITICAL_CAP
    sigma_prime: float = 0.4
    amplitude: float = 0.0


_CONVERTERS = {
    "sigma": float, "mode": str, "n": int, "r": float, "node_count": int, "k": int, "l": int,
    "epsilon": _optional_float, "dt_max": float, "safety": float, "t_end": float, "stat_tol": float,
    "monitor_a": _optional_float, "kind": str, "sigma_prime": float, "amplitude": float,
}
REQUIRED = ("sigma",)


def parse_config(text):
    """Parse flat ``key = value`` text (``#`` starts a comment).

    Returns (RunConfig, {key: line number}).  Raises ConfigError with the
    offending line and field.
    """
    values, lines = {}, {}
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected key=value, got {body!r}", number)
        key, value = (part.strip() for part in body.split("=", 1))
        if key not in _CONVERTERS:
            raise ConfigError("unknown key", number, key)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", number, key)
        if not value:
            raise ConfigError("empty value", number, key)
        try:
            values[key] = _CONVERTERS[key](value)
        except ValueError:
            raise ConfigError(f"cannot parse {value!r}", number, key) from None
        lines[key] = number
    for key in REQUIRED:
        if key not in values:
            raise ConfigError("required field is missing", key=key)
    return RunConfig(**values), lines


def build_flow_config(run, lines=None):
    """Turn a RunConfig into a validated FlowConfig; semantic errors become ConfigError."""
    lines = lines or {}

    def fail(exc):
        text = str(exc)
        key = next((k for k in sorted(lines, key=len, reverse=True) if re.search(rf"\b{k}\b", text)), None)
        return ConfigError(text, lines.get(key), key)

    if run.kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}", lines.get("kind"), "kind")
    try:
        domain = DomainSpec(run.mode, run.n, run.r)
        grid = Grid(domain, run.node_count)
        if run.node_count < 5:
            raise ParameterError("node_count must be at least 5")
        spec = CurvatureFunctionSpec(run.n, run.k, run.l)
        config = FlowConfig(
            spec, run.sigma, grid, epsilon=run.epsilon, dt_max=run.dt_max, safety=run.safety,
            t_end=run.t_end, stat_tol=run.stat_tol, monitor_a=run.monitor_a,
        )
        if run.kind in (SUBCRITICAL_CAP, PERTURBED_CAP) and not 0.0 < run.sigma_prime < run.sigma:
            raise ParameterError("sigma_prime must lie in (0, sigma)")
    except (ParameterError, DomainError, ValueError) as exc:
        raise fail(exc) from exc
    return config


# ----------------------------------------------------------------------------
# commands


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def cmd_sigma0(args):
    res = find_sigma0(args.tol)
    lo, hi = SIGMA0_BRACKET
    # the sign change across the published interval confirms the root lies
    # inside it even when a loose tol leaves a bracket wider than the interval
    refined = phi_eval(lo) < 0.0 < phi_eval(hi)
    inside = lo < res.root < hi and refined
    print(f"root = {res.root:.12f}")
    print(f"bracket = [{res.bracket[0]:.17g}, {res.bracket[1]:.17g}]")
    print(f"residual = {res.residual:.3e}")
    print(f"iterations = {res.iterations}")
    print(f"inside ({lo}, {hi}) = {'yes' if inside else 'no'}")
    return EXIT_OK if inside else EXIT_MONITOR


def _write_manifest(path, run, out_dir, started):
    rows = [("artifact_version", artifact_version()), ("start_time", started)]
    rows += [(f.name, getattr(run, f.name)) for f in fields(run)]
    rows += [
        ("steps_csv", out_dir / "steps.csv"),
        ("snapshot_dir", out_dir / "snapshots"),
        ("summary", out_dir / "summary.txt"),
    ]
    with open(path, "w") as fh:
        for key, value in rows:
            fh.write(f"{key}={'none' if value is None else _fmt(value)}\n")


def cmd_flow(args):
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        run, lines = parse_config(text)
        config = build_flow_config(run, lines)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.snapshot_stride < 1:
        print("error: --snapshot-stride must be >= 1", file=sys.stderr)
        return EXIT_USAGE

    out = Path(args.out)
    snap_dir = out / "snapshots"
    try:
        snap_dir.mkdir(parents=True, exist_ok=True)
        started = datetime.now(timezone.utc).isoformat(timespec="seconds")
        _write_manifest(out / "manifest.txt", replace(run, epsilon=config.epsilon), out, started)
        csv_fh = open(out / "steps.csv", "w", newline="")
    except OSError as exc:
        print(f"error: cannot write to {out}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    grid = config.grid
    snapshot_index = [0]
    initial = FlowState(initial_heights(config, run.kind, run.sigma_prime, run.amplitude), 0.0, 0, grid)

    def snapshot(state):
        write_snapshot(snap_dir / f"{snapshot_index[0]:04d}.txt", grid, state.u, state.t)
        snapshot_index[0] += 1

    def on_step(state, report, ev):
        if snapshot_index[0] == 0:
            snapshot(initial)
        if state.step_index % args.snapshot_stride == 0:
            snapshot(state)
        if not args.quiet and state.step_index % 10000 == 0:
            print(f"step {state.step_index} t={state.t:.6g} max|F-sigma|={max(ev.F_max - config.sigma, config.sigma - ev.F_min):.3e}")

    with csv_fh:
        writer = csv.writer(csv_fh)
        writer.writerow(CSV_COLUMNS)

        def on_row(row):
            writer.writerow([_fmt(v) for v in row])

        try:
            summary, state, report = run_to_stationary(
                config, run.kind, run.sigma_prime, run.amplitude, on_step=on_step, on_row=on_row,
            )
        except InadmissibleInitialDataError as exc:
            msg = f"inadmissible initial data: {exc}"
            print(msg, file=sys.stderr)
            (out / "summary.txt").write_text(msg + "\n")
            return EXIT_INADMISSIBLE
    if snapshot_index[0] == 0:
        snapshot(initial)
    if state.step_index % args.snapshot_stride != 0:
        snapshot(state)

    hyp = summary.hypotheses
    lines_out = [
        f"converged={int(summary.converged)}",
        f"steps={summary.steps}",
        f"t_final={_fmt(summary.t_final)}",
        f"residual_max_abs_F_minus_sigma={_fmt(summary.residual)}",
        f"initial_f_max={_fmt(hyp.f_max)} node={hyp.f_node} ok={int(hyp.f_ok)}",
        f"initial_w_max={_fmt(hyp.w_max)} node={hyp.w_node} gradient_hypothesis={int(hyp.gradient_ok)}",
        f"monitor_a={_fmt(summary.monitor_a)}",
        f"max_integral_sigma_minus_F_uw={_fmt(float(np.max(summary.integral)))}",
    ]
    if run.kind != HOROSPHERE:
        target = stationary_target(config)
        lines_out.append(f"distance_to_sigma_cap={_fmt(float(np.max(np.abs(state.u - target))))}")
    if summary.failure:
        lines_out.append(f"failure={summary.failure}")
    lines_out += report.summary_lines()
    (out / "summary.txt").write_text("\n".join(lines_out) + "\n")
    if not args.quiet:
        print("\n".join(lines_out))
    if not summary.converged:
        return EXIT_NOT_CONVERGED
    if not report.all_passed:
        return EXIT_MONITOR
    return EXIT_OK


def cmd_verify(args):
    result = SUITES[args.suite]()
    for line in result.lines():
        print(line)
    return EXIT_OK if result.passed else EXIT_MONITOR


def build_parser():
    parser = argparse.ArgumentParser(prog="hypflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sigma0", help="bisect for the threshold root sigma0")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_sigma0)

    p = sub.add_parser("flow", help="run the flow from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--snapshot-stride", type=int, default=1000)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("verify", help="run a built-in property suite")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if getattr(args, "quiet", False) else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (DomainError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MONITOR


if __name__ == "__main__":
    sys.exit(main())
