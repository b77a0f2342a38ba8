"""Scalar threshold functions and the root σ₀ of φ on (0, 1)."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

SIGMA0_BRACKET = (0.14596, 0.14597)


@dataclass(frozen=True)
class RootResult:
    root: float
    bracket: tuple
    iterations: int
    residual: float


def phi_eval(a):
    """φ(a) = (4/3)a − a³/27 − (a² + 3)^{3/2}/27."""
    a = np.asarray(a, dtype=float)
    out = (4.0 / 3.0) * a - a**3 / 27.0 - (a * a + 3.0) ** 1.5 / 27.0
    return float(out) if out.ndim == 0 else out


def phi_derivative(a):
    a = np.asarray(a, dtype=float)
    return 4.0 / 3.0 - a * a / 9.0 - a * np.sqrt(a * a + 3.0) / 9.0


def find_sigma0(tol=1e-12):
    """Bisect φ on (0, 1) until the bracket is narrower than ``tol``."""
    if not tol >= 1e-15:
        raise DomainError(f"tol must be >= 1e-15, got {tol}")
    lo, hi = 0.0, 1.0
    f_lo = phi_eval(lo)
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = phi_eval(mid)
        iterations += 1
        if f_mid == 0.0:
            lo = hi = mid
            break
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    return RootResult(root, (lo, hi), iterations, abs(phi_eval(root)))


def phi_theta_eval(y, a, theta=0.0):
    """φ_θ(y) = a − (1+θ)(1−y²)(y−a) / (2(1−θ)); θ = 0 gives φ₀."""
    if theta >= 1.0:
        raise ParameterError(f"theta must be < 1, got {theta}")
    y = np.asarray(y, dtype=float)
    out = a - (1.0 + theta) * (1.0 - y * y) * (y - a) / (2.0 * (1.0 - theta))
    return float(out) if out.ndim == 0 else out


def phi0_min_gap(a, step=1e-4, offset=1e-6):
    """min over y in [a + offset, 1] of φ₀(y) − φ(a), sampled at ``step``."""
    y = np.arange(a + offset, 1.0, step)
    y = np.append(y, 1.0)
    return float(np.min(phi_theta_eval(y, a, 0.0)) - phi_eval(a))
