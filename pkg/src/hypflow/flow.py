"""Explicit time integration of u_t = u w (F(A[u]) − σ) with u = ε on the boundary."""

import logging
from dataclasses import dataclass, field, replace
from math import inf, isfinite

import numpy as np

from .analysis import find_sigma0
from ._kernels import flow_rhs
from .curvature import CurvatureFunctionSpec, f_grad
from .errors import (
    ConeViolationError,
    InadmissibleInitialDataError,
    ParameterError,
    StepFailureError,
)
from .estimates import MONOTONE_SLACK, EstimateReport, EstimateRow, barrier_rhs, default_ratio_offset
from .geometry import DISK, Grid, cap_exact, grid_geometry

log = logging.getLogger(__name__)

MAX_HALVINGS = 20

STATIONARY_CAP = "stationary_cap"
SUBCRITICAL_CAP = "subcritical_cap"
PERTURBED_CAP = "perturbed_cap"
HOROSPHERE = "horosphere"
KINDS = (STATIONARY_CAP, SUBCRITICAL_CAP, PERTURBED_CAP, HOROSPHERE)


@dataclass(frozen=True)
class FlowConfig:
    spec: CurvatureFunctionSpec
    sigma: float
    grid: Grid
    epsilon: float = None
    dt_max: float = 1e-2
    safety: float = 0.5
    t_end: float = 50.0
    stat_tol: float = 1e-6
    monitor_a: float = None
    max_halvings: int = MAX_HALVINGS

    def __post_init__(self):
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", 1e-2 * self.grid.domain.r)
        if not 0.0 < self.sigma < 1.0:
            raise ParameterError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not 0.0 < self.epsilon <= self.grid.domain.r / 10.0:
            raise ParameterError(f"epsilon must lie in (0, r/10], got {self.epsilon}")
        if self.spec.n != self.grid.domain.n:
            raise ParameterError("curvature function dimension differs from the domain dimension")
        if not 0.0 < self.safety < 1.0:
            raise ParameterError(f"safety must lie in (0, 1), got {self.safety}")
        for name in ("dt_max", "t_end", "stat_tol"):
            if not getattr(self, name) > 0.0:
                raise ParameterError(f"{name} must be positive")
        if self.monitor_a is not None and not 0.0 < self.monitor_a < self.sigma:
            raise ParameterError("monitor_a must lie in (0, sigma)")


@dataclass
class FlowState:
    u: np.ndarray
    t: float
    step_index: int
    grid: Grid


class Evaluation:
    """Right-hand side of one state plus the per-step monitor scalars.

    Arrays are full-length (boundary entries of ``F`` are NaN).  The numpy
    geometry and the F-gradient are rebuilt lazily when a caller needs them.
    """

    def __init__(self, config, u, arrays, stats):
        self.config = config
        self.u = u
        self.du, self.d2u, self.tang, self.w, self.F_full, self.ut = arrays
        (self.diffusion, self.F_max, self.F_min, self.w_max,
         self.nu_min, self.hess_max, self.ratio, self.ut_max) = stats
        self._geo = None
        self._grad = None

    @property
    def F(self):
        return self.F_full[self.config.grid.interior]

    @property
    def geo(self):
        if self._geo is None:
            self._geo = grid_geometry(self.config.grid, self.u)
        return self._geo

    @property
    def grad(self):
        if self._grad is None:
            self._grad = f_grad(self.config.spec, self.geo.kappa[self.config.grid.interior])
        return self._grad


@dataclass
class StepReport:
    dt: float
    max_abs_ut: float
    max_F_minus_sigma: float
    min_F_minus_sigma: float
    max_w: float
    halvings: int


@dataclass
class HypothesisReport:
    f_max: float
    f_node: int
    f_ok: bool
    w_max: float
    w_node: int
    gradient_ok: bool


def evaluate(config, u, a=None):
    """Evaluate u_t and the monitor scalars; raises if the state is inadmissible.

    ``a`` is the offset of the curvature-ratio monitor (ratio is +inf when
    it is omitted or when inf ν <= a).
    """
    grid = config.grid
    if np.any(u <= 0.0):
        node = int(np.argmin(u))
        raise InadmissibleInitialDataError(f"non-positive height at node {node}", node, "u", float(u[node]))
    spec = config.spec
    arrays = tuple(np.empty_like(u) for _ in range(6))
    out = flow_rhs(
        u, grid.h, grid.domain.mode == DISK, spec.n, spec.k, spec.l, config.sigma,
        grid.coords, inf if a is None else a, *arrays,
    )
    if not out[0]:
        raise ConeViolationError("state leaves the admissible cone at an interior node")
    return Evaluation(config, u, arrays, out[1:])


def _cap_heights(config, sigma_cap, amplitude=0.0):
    grid = config.grid
    cap = cap_exact(sigma_cap, grid.domain, boundary_value=config.epsilon)
    x = np.abs(grid.coords)
    u = cap.height(x)
    if amplitude:
        u = u + amplitude * (1.0 - (x / grid.domain.r) ** 2) ** 2
    return u


def initial_heights(config, kind, sigma_prime=0.4, amplitude=0.0):
    if kind == STATIONARY_CAP:
        u = _cap_heights(config, config.sigma)
    elif kind == SUBCRITICAL_CAP:
        u = _cap_heights(config, sigma_prime)
    elif kind == PERTURBED_CAP:
        u = _cap_heights(config, sigma_prime, amplitude)
    elif kind == HOROSPHERE:
        u = np.full(config.grid.node_count, config.epsilon)
    else:
        raise ParameterError(f"unknown initial surface kind {kind!r}")
    if kind in (SUBCRITICAL_CAP, PERTURBED_CAP) and not 0.0 < sigma_prime < config.sigma:
        raise ParameterError("sigma_prime must lie in (0, sigma)")
    u[list(config.grid.boundary_nodes)] = config.epsilon
    return u


def check_hypotheses(config, u, ev=None):
    """f(κ[u₀]) <= σ (with O(h²) slack) at interior nodes and 1/w(u₀) > σ at all nodes."""
    ev = ev if ev is not None else evaluate(config, u)
    slack = 10.0 * config.grid.h ** 2
    inner_idx = np.arange(config.grid.node_count)[config.grid.interior]
    j = int(np.argmax(ev.F))
    k = int(np.argmax(ev.w))
    return HypothesisReport(
        f_max=float(ev.F[j]),
        f_node=int(inner_idx[j]),
        f_ok=bool(ev.F[j] <= config.sigma + slack),
        w_max=float(ev.w[k]),
        w_node=k,
        gradient_ok=bool(1.0 / ev.w[k] > config.sigma),
    )


def initial_surface(config, kind, sigma_prime=0.4, amplitude=0.0):
    """Build u₀ = ε-truncated cap (or horosphere) and verify the flow hypotheses.

    Raises InadmissibleInitialDataError if u₀ leaves the cone or has f > σ
    somewhere.  The gradient hypothesis 1/w > σ is verified and returned in
    the report; it decides whether the gradient and barrier monitors apply.
    """
    u = initial_heights(config, kind, sigma_prime, amplitude)
    try:
        ev = evaluate(config, u)
    except ConeViolationError as exc:
        raise InadmissibleInitialDataError(f"initial surface is not admissible: {exc}", quantity="cone") from exc
    hyp = check_hypotheses(config, u, ev)
    if not hyp.f_ok:
        raise InadmissibleInitialDataError(
            f"f(kappa[u0]) = {hyp.f_max:.6g} exceeds sigma = {config.sigma} at node {hyp.f_node}",
            hyp.f_node, "f", hyp.f_max,
        )
    if not hyp.gradient_ok:
        log.warning(
            "initial surface has 1/w = %.6g <= sigma at node %d; gradient bound not predicted",
            1.0 / hyp.w_max, hyp.w_node,
        )
    return FlowState(u, 0.0, 0, config.grid), hyp


def choose_dt(config, ev):
    h2 = config.grid.h ** 2
    limit = h2 / ev.diffusion if ev.diffusion > 0.0 else inf
    return config.safety * min(config.dt_max, limit)


def step(state, config, ev=None, a=None):
    """One explicit step; returns (new_state, report, evaluation of new_state).

    The step is retried with dt/2 while the candidate loses positivity or
    admissibility.  Raises StepFailureError when the halvings run out.
    """
    ev = ev if ev is not None else evaluate(config, state.u, a)
    dt = choose_dt(config, ev)
    bnd = list(config.grid.boundary_nodes)
    for halvings in range(config.max_halvings + 1):
        u_new = state.u + dt * ev.ut
        u_new[bnd] = config.epsilon
        if np.all(u_new > 0.0):
            try:
                ev_new = evaluate(config, u_new, a)
            except ConeViolationError:
                ev_new = None
            if ev_new is not None:
                report = StepReport(
                    dt,
                    ev.ut_max,
                    ev.F_max - config.sigma,
                    ev.F_min - config.sigma,
                    ev.w_max,
                    halvings,
                )
                return FlowState(u_new, state.t + dt, state.step_index + 1, state.grid), report, ev_new
        dt *= 0.5
    raise StepFailureError(f"step {state.step_index} failed after {config.max_halvings} halvings")


CSV_COLUMNS = (
    "t",
    "dt",
    "max_abs_ut",
    "max_f_minus_sigma",
    "min_f_minus_sigma",
    "max_w",
    "max_u_hess",
    "ratio",
    "cumulative_integral",
    "gradient_margin",
    "f_margin",
    "barrier_margin",
    "monotone",
)


@dataclass
class RunSummary:
    converged: bool
    steps: int
    t_final: float
    residual: float
    integral: np.ndarray
    hypotheses: HypothesisReport
    monitor_a: float
    failure: str = ""
    csv_rows: list = field(default_factory=list)


def run_to_stationary(config, kind, sigma_prime=0.4, amplitude=0.0, on_step=None, record=True, max_steps=None,
                      on_row=None):
    """Integrate until max interior |F − σ| < stat_tol or t >= t_end.

    ``on_step(state, report, evaluation)`` is called after every accepted
    step.  Per-step CSV rows (see CSV_COLUMNS) go to ``on_row`` when given,
    otherwise they are kept in the summary if ``record`` is true.
    Returns (summary, final_state, estimate_report).
    """
    state, hyp = initial_surface(config, kind, sigma_prime, amplitude)
    ev0 = evaluate(config, state.u)
    a = config.monitor_a if config.monitor_a is not None else default_ratio_offset(config.sigma, ev0.geo)
    ev = evaluate(config, state.u, a)
    report = EstimateReport(
        thresholds={"discretization": 10.0 * config.grid.h ** 2, "stat_tol": config.stat_tol},
        gradient_hypothesis=hyp.gradient_ok,
        sigma_above_sigma0=config.sigma > find_sigma0(1e-12).root,
    )
    integral = np.zeros_like(state.u)
    r1 = config.grid.domain.r1
    bnd = list(config.grid.boundary_nodes)
    barrier = barrier_rhs(config.sigma, config.epsilon, r1) if isfinite(r1) else inf
    inner = config.grid.interior
    summary = RunSummary(False, 0, 0.0, inf, integral, hyp, a)
    while True:
        residual = max(ev.F_max - config.sigma, config.sigma - ev.F_min)
        summary.residual = residual
        if residual < config.stat_tol:
            summary.converged = True
            break
        if state.t >= config.t_end or (max_steps is not None and state.step_index >= max_steps):
            break
        try:
            new_state, srep, new_ev = step(state, config, ev, a)
        except StepFailureError as exc:
            summary.failure = str(exc)
            break
        integral[inner] -= srep.dt * ev.ut[inner]
        mono = bool(np.all(new_state.u <= state.u + MONOTONE_SLACK))
        if isfinite(barrier):
            lhs = (config.sigma - 1.0 / new_ev.w[bnd]) / new_state.u[bnd]
            barrier_margin = barrier - float(np.max(lhs))
        else:
            barrier_margin = inf
        row = EstimateRow(
            new_state.t,
            1.0 / config.sigma - new_ev.w_max,
            config.sigma - new_ev.F_max,
            barrier_margin,
            new_ev.hess_max,
            new_ev.ratio,
            mono,
        )
        report.append(row)
        if record or on_row is not None:
            csv_row = (
                new_state.t, srep.dt, new_ev.ut_max, new_ev.F_max - config.sigma, new_ev.F_min - config.sigma,
                new_ev.w_max, row.hessian_bound_value, row.ratio_value, float(np.max(integral)),
                row.gradient_margin, row.F_margin, row.boundary_barrier_margin, int(mono),
            )
            if on_row is not None:
                on_row(csv_row)
            else:
                summary.csv_rows.append(csv_row)
        if on_step is not None:
            on_step(new_state, srep, new_ev)
        state, ev = new_state, new_ev
    summary.steps = state.step_index
    summary.t_final = state.t
    return summary, state, report


def stationary_target(config):
    """Closed-form σ-cap with boundary height ε, sampled on the grid."""
    cap = cap_exact(config.sigma, config.grid.domain, boundary_value=config.epsilon)
    return cap.height(np.abs(config.grid.coords))


def with_grid(config, grid):
    return replace(config, grid=grid)
