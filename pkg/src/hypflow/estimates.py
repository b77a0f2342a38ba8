"""Runtime monitors for the a priori estimates along a flow.

Every margin is signed so that a positive value means the predicted
inequality holds with slack.  No constant is certified: the Hessian and
ratio quantities are recorded and judged only for finiteness.
"""

from dataclasses import dataclass, field
from math import inf, isfinite, sqrt

import numpy as np

from .curvature import f_eval
from .errors import PreconditionError
from .geometry import grid_geometry

MONOTONE_SLACK = 1e-14
SETTLED_VARIATION = 0.01


def _geometry(state, geo=None):
    return geo if geo is not None else grid_geometry(state.grid, state.u)


def check_gradient_bound(state, sigma, geo=None):
    """1/σ − max w over all nodes (boundary slopes from one-sided differences)."""
    geo = _geometry(state, geo)
    return 1.0 / sigma - float(np.max(geo.w))


def check_F_bound(state, spec, sigma, geo=None):
    geo = _geometry(state, geo)
    f = f_eval(spec, geo.kappa[state.grid.interior])
    return sigma - float(np.max(f))


def barrier_rhs(sigma, epsilon, r1):
    return sqrt(1.0 - sigma * sigma) / r1 + epsilon * (1.0 + sigma) / r1**2


def check_boundary_barrier(state, sigma, epsilon, r1, geo=None):
    """RHS − max over boundary nodes of (σ − ν^{n+1})/u; +inf when r1 is infinite."""
    if not isfinite(r1):
        return inf
    geo = _geometry(state, geo)
    idx = list(state.grid.boundary_nodes)
    lhs = (sigma - geo.nu_up[idx]) / geo.u[idx]
    return barrier_rhs(sigma, epsilon, r1) - float(np.max(lhs))


def hessian_entries(geo):
    """Largest absolute Hessian entry per node (u_ρρ and u_ρ/ρ in the disk frame)."""
    if geo.kappa.shape[1] > 1:
        return np.maximum(np.abs(geo.d2u), np.abs(geo.tang))
    return np.abs(geo.d2u)


def check_hessian_bound(state, geo=None):
    """max over interior nodes of u · max|D²u|."""
    geo = _geometry(state, geo)
    inner = state.grid.interior
    return float(np.max(geo.u[inner] * hessian_entries(geo)[inner]))


def check_ratio(state, a, geo=None):
    """max over interior nodes of κ_max / (ν^{n+1} − a); requires inf ν^{n+1} > a."""
    geo = _geometry(state, geo)
    if not np.min(geo.nu_up) > a:
        raise PreconditionError(
            f"inf nu^(n+1) = {np.min(geo.nu_up):.6g} does not exceed a = {a:.6g}"
        )
    inner = state.grid.interior
    kmax = np.max(geo.kappa[inner], axis=1)
    return float(np.max(kmax / (geo.nu_up[inner] - a)))


def check_monotonicity(prev, nxt):
    if prev.grid != nxt.grid:
        raise ValueError("states live on different grids")
    return bool(np.all(nxt.u <= prev.u + MONOTONE_SLACK))


def default_ratio_offset(sigma, geo):
    return 0.9 * min(sigma, float(np.min(geo.nu_up)))


@dataclass
class EstimateRow:
    t: float
    gradient_margin: float
    F_margin: float
    boundary_barrier_margin: float
    hessian_bound_value: float
    ratio_value: float
    monotonicity_ok: bool


@dataclass
class Verdict:
    name: str
    judged: bool
    passed: bool
    worst: float
    worst_t: float
    note: str = ""

    def line(self):
        status = ("PASS" if self.passed else "FAIL") if self.judged else "UNJUDGED"
        text = f"{status:8s} {self.name:24s} worst={self.worst:.17g} at t={self.worst_t:.17g}"
        return text + (f"  ({self.note})" if self.note else "")


@dataclass
class EstimateReport:
    """Time series of monitored margins plus the thresholds used to judge them.

    ``gradient_hypothesis`` records whether the initial surface had
    1/w > σ everywhere; the gradient and barrier inequalities are only
    predicted, and therefore only judged, when it holds.
    """

    thresholds: dict
    rows: list = field(default_factory=list)
    gradient_hypothesis: bool = True
    sigma_above_sigma0: bool = True

    def append(self, row):
        self.rows.append(row)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def _worst(self, name, lowest=True):
        values = self.column(name)
        if len(values) == 0:
            return inf if lowest else 0.0, 0.0
        i = int(np.argmin(values) if lowest else np.argmax(values))
        return float(values[i]), self.rows[i].t

    def verdicts(self):
        th = self.thresholds
        out = []
        worst, t = self._worst("gradient_margin")
        note = "" if self.gradient_hypothesis else "initial 1/w > sigma fails; bound not predicted"
        out.append(Verdict("gradient w<=1/sigma", self.gradient_hypothesis, worst >= -th["discretization"], worst, t, note))
        worst, t = self._worst("F_margin")
        out.append(Verdict("F<=sigma", True, worst >= -th["discretization"], worst, t))
        worst, t = self._worst("boundary_barrier_margin")
        out.append(Verdict("boundary barrier", self.gradient_hypothesis, worst > 0.0, worst, t, note))
        mono = self.column("monotonicity_ok")
        bad = np.flatnonzero(mono == 0)
        t_bad = self.rows[bad[0]].t if len(bad) else (self.rows[-1].t if self.rows else 0.0)
        out.append(Verdict("monotone decrease", True, len(bad) == 0, float(len(bad)), t_bad))
        worst, t = self._worst("hessian_bound_value", lowest=False)
        out.append(Verdict("u|D2u| finite", True, isfinite(worst), worst, t))
        variation = self.last_quarter_variation("hessian_bound_value")
        t_last = self.rows[-1].t if self.rows else 0.0
        out.append(Verdict("u|D2u| settled", True, variation < SETTLED_VARIATION, variation, t_last,
                           "relative spread over the last quarter of the run"))
        worst, t = self._worst("ratio_value", lowest=False)
        note = "" if self.sigma_above_sigma0 else "sigma <= sigma0; no prediction"
        out.append(Verdict("curvature ratio finite", self.sigma_above_sigma0, isfinite(worst), worst, t, note))
        return out

    def last_quarter_variation(self, name):
        """(max − min)/max|·| of a column over rows with t >= 3/4 of the final time."""
        if not self.rows:
            return inf
        t = self.column("t")
        values = self.column(name)[t >= 0.75 * t[-1]]
        scale = float(np.max(np.abs(values)))
        if not isfinite(scale):
            return inf
        return float(np.ptp(values)) / scale if scale > 0.0 else 0.0

    @property
    def all_passed(self):
        return all(v.passed for v in self.verdicts() if v.judged)

    def summary_lines(self):
        return [v.line() for v in self.verdicts()]
