"""Built-in property suites shared by ``hypflow verify`` and the test-suite.

Each suite returns a SuiteResult: a list of named checks, each with the
measured value, the threshold it is judged against, and a verdict.
"""

import time
from dataclasses import dataclass, field
from math import log2

import numpy as np

from .curvature import CurvatureFunctionSpec, f_eval, random_cone_samples, verify_structure
from .flow import FlowConfig
from .geometry import DISK, INTERVAL, DomainSpec, Grid, RadialPatch, cap_exact, grid_geometry
from .markers import verify_evolution_identities

STRUCTURE_PAIRS = ((1, 0), (2, 0), (2, 1), (3, 1))
STRUCTURE_DIMENSIONS = (2, 3, 4)


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    relation: str = "<="

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.6g} (need {self.relation} {self.threshold:.6g})"


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    elapsed: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, value, threshold, relation="<="):
        ok = value <= threshold if relation == "<=" else value >= threshold
        self.checks.append(Check(name, float(value), float(threshold), bool(ok), relation))

    def lines(self):
        out = [c.line() for c in self.checks]
        out.extend(f"note: {n}" for n in self.notes)
        out.append(f"suite {self.name}: {'PASS' if self.passed else 'FAIL'} in {self.elapsed:.2f} s")
        return out


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        result.elapsed = time.perf_counter() - start
        return result
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def structure_suite(samples=10_000, tol=1e-10, seed=0):
    """Axioms of f on random in-cone samples for every (k, l, n) combination."""
    result = SuiteResult("structure")
    rng = np.random.default_rng(seed)
    for n in STRUCTURE_DIMENSIONS:
        for k, l in STRUCTURE_PAIRS:
            if k > n:
                continue
            spec = CurvatureFunctionSpec(n, k, l)
            pts = random_cone_samples(spec, samples, rng)
            report = verify_structure(spec, pts, tol=tol)
            for name, ok in report.checks.items():
                failures = int(np.size(ok) - np.count_nonzero(ok))
                result.add(f"(k,l,n)=({k},{l},{n}) {name} failing samples of {np.size(ok)}", failures, 0)
    return result


def cap_residual(sigma, node_count, sample_every=1):
    """max |f(κ[u]) − σ| of the exact cap sampled on an interval grid.

    ``sample_every`` restricts the maximum to every m-th node, so grids with
    m = 1, 2, 4 can be compared on the same physical points.
    """
    grid = Grid(DomainSpec(INTERVAL, 1, 1.0), node_count)
    cap = cap_exact(sigma, grid.domain, boundary_value=0.0)
    u = cap.height(grid.coords)
    geo = grid_geometry(grid, u)
    idx = np.arange(sample_every, node_count - 1, sample_every)
    spec = CurvatureFunctionSpec(1, 1, 0)
    return float(np.max(np.abs(f_eval(spec, geo.kappa[idx]) - sigma)))


@_timed
def geometry_suite(sigmas=(0.2, 0.5, 0.8), node_counts=(101, 201, 401), min_order=1.9):
    """Observed O(h²) order of the exact cap's discrete curvature residual.

    The order is measured on the nodes shared by all grids; the all-node
    orders are reported as notes.
    """
    result = SuiteResult("geometry")
    for sigma in sigmas:
        common, every = [], []
        for m, N in enumerate(node_counts):
            common.append(cap_residual(sigma, N, sample_every=2**m))
            every.append(cap_residual(sigma, N))
        for a, b, Na, Nb in zip(common, common[1:], node_counts, node_counts[1:]):
            result.add(f"sigma={sigma} order {Na}->{Nb} on shared nodes", log2(a / b), min_order, ">=")
        orders = [log2(a / b) for a, b in zip(every, every[1:])]
        result.notes.append(
            f"sigma={sigma}: residuals {', '.join(f'{c:.3e}' for c in common)}; all-node orders "
            + ", ".join(f"{o:.3f}" for o in orders)
        )
    return result


def crosscheck_difference(mode, n, sigma, node_count, patch_fraction=0.9):
    """max over patch nodes of |κ_vertical − κ_radial| on the exact cap, and h.

    The compared patch is the fixed physical region |x| <= patch_fraction·r,
    so refining the grid does not push it toward the equator φ = π/2 where
    the radial chart degenerates.
    """
    grid = Grid(DomainSpec(mode, n, 1.0), node_count)
    cap = cap_exact(sigma, grid.domain, boundary_value=0.0)
    u = cap.height(np.abs(grid.coords))
    geo = grid_geometry(grid, u)
    patch = RadialPatch(grid, u)
    limit = patch_fraction * grid.domain.r + 1e-12
    worst = 0.0
    for i in np.flatnonzero(np.abs(grid.coords) <= limit):
        radial = patch.sample(int(i)).hyper_kappa
        worst = max(worst, float(np.max(np.abs(np.sort(radial) - np.sort(geo.kappa[i])))))
    return worst, grid.h


@_timed
def crosscheck_suite(node_counts=(101, 201), sigma=0.5, factor=20.0, min_order=1.9):
    """Vertical versus radial principal curvatures on the exact cap."""
    result = SuiteResult("crosscheck")
    for mode, n in ((INTERVAL, 1), (DISK, 3)):
        diffs = []
        for N in node_counts:
            d, h = crosscheck_difference(mode, n, sigma, N)
            diffs.append(d)
            result.add(f"{mode} n={n} N={N} max|vertical-radial|/h^2", d / h**2, factor)
        for a, b, Na, Nb in zip(diffs, diffs[1:], node_counts, node_counts[1:]):
            result.add(f"{mode} n={n} order {Na}->{Nb}", log2(a / b), min_order, ">=")
    return result


EVOLUTION_STRIDES = (32, 16, 8, 4, 2, 1)
EVOLUTION_CASES = (
    (INTERVAL, CurvatureFunctionSpec(1, 1, 0), (-0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6)),
    (DISK, CurvatureFunctionSpec(3, 2, 1), (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)),
)


def evolution_study(mode, spec, seeds, node_counts=(101, 201), strides=EVOLUTION_STRIDES,
                    sigma=0.5, sigma_prime=0.4, t_window=0.05):
    """Marker residuals for every (node count, stride); returns {N: {stride: IdentityReport}}."""
    out = {}
    for N in node_counts:
        grid = Grid(DomainSpec(mode, spec.n, 1.0), N)
        config = FlowConfig(spec, sigma, grid, epsilon=0.01)
        out[N] = {
            s: verify_evolution_identities(config, "subcritical_cap", stride=s, t_window=t_window,
                                           sigma_prime=sigma_prime, seeds=seeds)
            for s in strides
        }
    return out


def judge_time_halving(residuals, floor, min_ratio=1.8, floor_multiple=2.0):
    """Ratios R(Δ)/R(Δ/2) for consecutive strides while R(Δ/2) stays above floor_multiple·floor.

    ``residuals`` is ordered from the largest sampling interval down.
    """
    ratios = []
    for big, small in zip(residuals, residuals[1:]):
        if small <= floor_multiple * floor:
            break
        ratios.append(big / small)
    return ratios, bool(ratios) and min(ratios) >= min_ratio


@_timed
def evolution_suite(node_counts=(101, 201), strides=EVOLUTION_STRIDES, min_ratio=1.8, min_floor_ratio=3.5,
                    identities=("metric", "normal"), cases=EVOLUTION_CASES):
    """Time- and space-convergence of the Lagrangian identity residuals."""
    result = SuiteResult("evolution")
    coarse, fine = node_counts[0], node_counts[-1]
    for mode, spec, seeds in cases:
        study = evolution_study(mode, spec, seeds, node_counts, strides)
        label = f"{mode} (k,l)=({spec.k},{spec.l})"
        for name in identities:
            for N in node_counts:
                res = [study[N][s].max_residual(name) for s in strides]
                floor = res[-1]
                ratios, ok = judge_time_halving(res, floor, min_ratio)
                worst = min(ratios) if ratios else 0.0
                result.add(f"{label} {name} N={N} min dt-halving ratio over {len(ratios)} pairs", worst, min_ratio, ">=")
                result.notes.append(f"{label} {name} N={N} residuals " + ", ".join(f"{r:.3e}" for r in res))
            ratio = study[coarse][strides[-1]].max_residual(name) / study[fine][strides[-1]].max_residual(name)
            result.add(f"{label} {name} floor ratio h-halving {coarse}->{fine}", ratio, min_floor_ratio, ">=")
        for name in ("trace_h", "F"):
            a = study[coarse][strides[-1]].max_residual(name)
            b = study[fine][strides[-1]].max_residual(name)
            result.notes.append(f"{label} {name} floor {a:.3e} -> {b:.3e} (ratio {a / b:.2f})")
    return result


SUITES = {
    "structure": structure_suite,
    "geometry": geometry_suite,
    "evolution": evolution_suite,
    "crosscheck": crosscheck_suite,
}
