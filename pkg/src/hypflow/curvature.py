"""Symmetric curvature functions f = (H_k / H_l)^(1/(k-l)) and their matrix calculus.

All scalar routines accept either a single curvature vector of length ``n``
or a stacked array of shape ``(..., n)``; the last axis is always the
principal-curvature axis.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import ConeViolationError, DomainError, ParameterError
from .linalg import jacobi_eigh

CONE_TOL = 1e-12
CLUSTER_GAP = 1e-9


@dataclass(frozen=True)
class CurvatureFunctionSpec:
    """The quotient f = (H_k/H_l)^(1/(k-l)) on Gårding's cone Γ_k in R^n."""

    n: int
    k: int
    l: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.l < self.k <= self.n:
            raise ParameterError(f"need 0 <= l < k <= n, got n={self.n} k={self.k} l={self.l}")

    @property
    def order(self):
        return self.k - self.l


def _as_curvatures(lam, n=None):
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        raise DomainError("curvature vector must be at least one-dimensional")
    if n is not None and lam.shape[-1] != n:
        raise DomainError(f"curvature vector has length {lam.shape[-1]}, expected {n}")
    return lam


def elementary_symmetric_all(lam, m_max):
    """Return [σ_0, ..., σ_{m_max}] evaluated along the last axis."""
    lam = np.asarray(lam, dtype=float)
    shape = lam.shape[:-1]
    e = [np.ones(shape)] + [np.zeros(shape) for _ in range(m_max)]
    for i in range(lam.shape[-1]):
        x = lam[..., i]
        for m in range(min(m_max, i + 1), 0, -1):
            e[m] += x * e[m - 1]
    return e


def _sigma_without(lam, e, m_max):
    """σ_j of λ with entry i removed, shape (m_max+1, ..., n).

    Uses the deflation σ_j(λ|i) = σ_j(λ) − λ_i σ_{j-1}(λ|i), given the full
    σ_j(λ) in ``e``.
    """
    out = np.empty((m_max + 1,) + lam.shape)
    out[0] = 1.0
    for j in range(1, m_max + 1):
        out[j] = e[j][..., None] - lam * out[j - 1]
    return out


def normalized_symmetric(lam, m):
    """H_m(λ) = σ_m(λ) / C(n, m), with H_0 = 1."""
    lam = _as_curvatures(lam)
    n = lam.shape[-1]
    if not 0 <= m <= n:
        raise DomainError(f"m={m} out of range for n={n}")
    return elementary_symmetric_all(lam, m)[m] / comb(n, m)


def _normalized_all(lam, m_max):
    n = lam.shape[-1]
    e = elementary_symmetric_all(lam, m_max)
    return [e[m] / comb(n, m) for m in range(m_max + 1)]


def _in_cone(H, lam, k):
    # roundoff scale of H_j is H_j evaluated on |λ|
    scale = _normalized_all(np.abs(lam), k)
    ok = np.ones(lam.shape[:-1], dtype=bool)
    for j in range(1, k + 1):
        ok &= H[j] > CONE_TOL * (1.0 + scale[j])
    return ok


def cone_contains(spec, lam):
    """True where H_j(λ) > 0 for every 1 <= j <= k (up to a roundoff guard)."""
    lam = _as_curvatures(lam, spec.n)
    H = _normalized_all(lam, spec.k)
    ok = _in_cone(H, lam, spec.k)
    return bool(ok) if ok.ndim == 0 else ok


def _check_cone(spec, lam, H):
    ok = _in_cone(H, lam, spec.k)
    if not np.all(ok):
        bad = np.argwhere(~np.atleast_1d(ok))[0]
        raise ConeViolationError(
            f"curvature vector outside Γ_{spec.k} (first offending index {tuple(bad)})"
        )


def f_eval(spec, lam):
    """f(λ) = (H_k(λ)/H_l(λ))^(1/(k-l)); raises ConeViolationError outside Γ_k."""
    lam = _as_curvatures(lam, spec.n)
    H = _normalized_all(lam, spec.k)
    _check_cone(spec, lam, H)
    return (H[spec.k] / H[spec.l]) ** (1.0 / spec.order)


def f_and_grad(spec, lam, check=True):
    """Return (f, ∂f/∂λ_i) using ∂σ_m/∂λ_i = σ_{m-1}(λ without entry i)."""
    lam = _as_curvatures(lam, spec.n)
    n, k, l = spec.n, spec.k, spec.l
    e = elementary_symmetric_all(lam, k)
    H = [e[m] / comb(n, m) for m in range(k + 1)]
    if check:
        _check_cone(spec, lam, H)
    f = (H[k] / H[l]) ** (1.0 / spec.order)
    partial = _sigma_without(lam, e, k - 1)
    dHk = partial[k - 1] / comb(n, k)
    grad = dHk / H[k][..., None]
    if l > 0:
        dHl = partial[l - 1] / comb(n, l)
        grad = grad - dHl / H[l][..., None]
    grad = grad * (f / spec.order)[..., None]
    return f, grad


def f_grad(spec, lam):
    """Analytic gradient f_i(λ)."""
    return f_and_grad(spec, lam)[1]


@dataclass
class CurvatureOperatorValue:
    value: float
    gradient_matrix: np.ndarray
    eigen_gradient: np.ndarray
    eigenvalues: np.ndarray = field(default=None)


def _cluster_average(evals, grads):
    out = grads.copy()
    start = 0
    n = len(evals)
    for i in range(1, n + 1):
        if i == n or evals[i] - evals[i - 1] > CLUSTER_GAP * (1.0 + abs(evals[i])):
            out[start:i] = grads[start:i].mean()
            start = i
    return out


def F_matrix_eval(spec, A):
    """F(A) = f(λ(A)) and F^{ij} = Σ_s f_s P_si P_sj for symmetric A."""
    A = np.asarray(A, dtype=float)
    if A.shape != (spec.n, spec.n):
        raise DomainError(f"matrix must be {spec.n}x{spec.n}, got {A.shape}")
    evals, P = jacobi_eigh(A)
    value, grads = f_and_grad(spec, evals)
    grads = _cluster_average(evals, grads)
    Fij = (P.T * grads) @ P
    Fij = 0.5 * (Fij + Fij.T)
    return CurvatureOperatorValue(float(value), Fij, grads, evals)


@dataclass
class StructureReport:
    """Per-sample outcomes of the structure-condition checks."""

    checks: dict
    limit_probe: np.ndarray
    tol: float

    def passed(self, name):
        return bool(np.all(self.checks[name]))

    @property
    def all_passed(self):
        return all(self.passed(name) for name in self.checks)

    def summary(self):
        return {name: (int(np.sum(v)), int(np.size(v))) for name, v in self.checks.items()}


def verify_structure(spec, samples, tol=1e-12, scales=(0.1, 2.0, 5.0), radii=(1e2, 1e4, 1e6)):
    """Check monotonicity, concavity, positivity, normalization, homogeneity,
    the mean-curvature upper bound, Σ f_i >= 1 and the Euler relation on
    every sample; probe the large-entry limit near (1, ..., 1).

    Concavity is tested on the midpoint of each sample and its cyclic
    successor. Failures are recorded, never raised.
    """
    lam = _as_curvatures(samples, spec.n)
    lam = np.atleast_2d(lam)
    f, grad = f_and_grad(spec, lam)
    mag = np.maximum(1.0, np.abs(f))
    checks = {}
    checks["monotonicity"] = np.all(grad > 0.0, axis=-1)

    other = np.roll(lam, -1, axis=0)
    mid = 0.5 * (lam + other)
    f_other = f_eval(spec, other)
    f_mid = f_eval(spec, mid)
    checks["concavity"] = f_mid >= 0.5 * (f + f_other) - tol * mag

    checks["positivity"] = f > 0.0
    one = f_eval(spec, np.ones(spec.n))
    checks["normalization"] = np.full(len(lam), abs(one - 1.0) <= tol)

    homog = np.ones(len(lam), dtype=bool)
    for t in scales:
        homog &= np.abs(f_eval(spec, t * lam) - t * f) <= tol * t * mag
    checks["homogeneity"] = homog

    checks["mean_bound"] = f <= lam.mean(axis=-1) + tol * mag
    checks["gradient_sum"] = grad.sum(axis=-1) >= 1.0 - tol
    checks["euler"] = np.abs(np.sum(grad * lam, axis=-1) - f) <= tol * mag

    probe = np.empty((len(lam), len(radii)))
    near = 1.0 + 0.05 * np.tanh(lam - lam.mean(axis=-1, keepdims=True))
    for j, R in enumerate(radii):
        bumped = near.copy()
        bumped[:, -1] += R
        probe[:, j] = f_eval(spec, bumped)
    checks["large_entry_limit"] = np.all(probe[:, 1:] >= probe[:, :-1] - tol * probe[:, :-1], axis=1) & (
        probe[:, -1] > 1.0
    )
    return StructureReport(checks, probe, tol)


def random_cone_samples(spec, count, rng, spread=1.5):
    """Draw ``count`` points of Γ_k by rejection from a Gaussian around (1,...,1)."""
    out = []
    total = 0
    while total < count:
        batch = 1.0 + spread * rng.standard_normal((2 * count + 16, spec.n))
        batch *= rng.uniform(0.2, 3.0, size=(len(batch), 1))
        keep = batch[cone_contains(spec, batch)]
        # keep the sample set away from the roundoff band at ∂Γ_k
        H = _normalized_all(keep, spec.k)
        scale = _normalized_all(np.abs(keep), spec.k)
        margin = np.ones(len(keep), dtype=bool)
        for j in range(1, spec.k + 1):
            margin &= H[j] > 1e-6 * scale[j]
        keep = keep[margin]
        out.append(keep)
        total += len(keep)
    return np.concatenate(out)[:count]
