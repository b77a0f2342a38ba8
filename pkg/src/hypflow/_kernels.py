"""Compiled per-node right-hand side for the flow loop.

Mirrors geometry.grid_geometry + curvature.f_and_grad node by node so that
one explicit step costs a single pass over the grid.  The numpy versions
remain the reference; tests compare the two.
"""

import numpy as np
from numba import njit

CONE_TOL = 1e-12


@njit(cache=True)
def _binom(n, m):
    out = 1.0
    for i in range(m):
        out = out * (n - i) / (i + 1)
    return out


@njit(cache=True)
def _esf(lam, m_max, e):
    e[0] = 1.0
    for m in range(1, m_max + 1):
        e[m] = 0.0
    for i in range(lam.shape[0]):
        x = lam[i]
        top = min(m_max, i + 1)
        for m in range(top, 0, -1):
            e[m] += x * e[m - 1]


@njit(cache=True)
def quotient_and_grad(lam, k, l, grad, e, ea, ew):
    """f and f_i at one point; returns (f, in_cone)."""
    n = lam.shape[0]
    _esf(lam, k, e)
    absl = np.abs(lam)
    _esf(absl, k, ea)
    for j in range(1, k + 1):
        c = _binom(n, j)
        if not e[j] / c > CONE_TOL * (1.0 + ea[j] / c):
            return 0.0, False
    hk = e[k] / _binom(n, k)
    hl = e[l] / _binom(n, l)
    order = k - l
    f = (hk / hl) ** (1.0 / order)
    for i in range(n):
        ew[0] = 1.0
        for j in range(1, k):
            ew[j] = e[j] - lam[i] * ew[j - 1]
        g = ew[k - 1] / _binom(n, k) / hk
        if l > 0:
            g -= ew[l - 1] / _binom(n, l) / hl
        grad[i] = g * f / order
    return f, True


@njit(cache=True)
def flow_rhs(u, h, disk, n, k, l, sigma, coords, a, du, d2u, tang, w, F, ut):
    """Fill derivative, F and u_t arrays; return monitor scalars.

    Returns (ok, diffusion, F_max, F_min, w_max, nu_min, hess_max, ratio,
    ut_max_abs).  ``ok`` is False when an interior node leaves the cone or
    a height is non-positive.  ``ratio`` is +inf if inf ν <= a.
    """
    N = u.shape[0]
    for i in range(N):
        if not u[i] > 0.0:
            return False, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    inv2h = 0.5 / h
    invh2 = 1.0 / (h * h)
    for i in range(1, N - 1):
        du[i] = (u[i + 1] - u[i - 1]) * inv2h
        d2u[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * invh2
    du[N - 1] = (3.0 * u[N - 1] - 4.0 * u[N - 2] + u[N - 3]) * inv2h
    d2u[N - 1] = (2.0 * u[N - 1] - 5.0 * u[N - 2] + 4.0 * u[N - 3] - u[N - 4]) * invh2
    if disk:
        du[0] = 0.0
        d2u[0] = 2.0 * (u[1] - u[0]) * invh2
        tang[0] = d2u[0]
        for i in range(1, N):
            tang[i] = du[i] / coords[i]
        first, last = 0, N - 1
    else:
        du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h
        d2u[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) * invh2
        for i in range(N):
            tang[i] = 0.0
        first, last = 1, N - 1

    w_max = 0.0
    nu_min = np.inf
    for i in range(N):
        w[i] = np.sqrt(1.0 + du[i] * du[i])
        w_max = max(w_max, w[i])
        nu_min = min(nu_min, 1.0 / w[i])

    lam = np.empty(n)
    grad = np.empty(n)
    e = np.empty(k + 1)
    ea = np.empty(k + 1)
    ew = np.empty(k + 1)
    diffusion = 0.0
    F_max = -np.inf
    F_min = np.inf
    hess_max = 0.0
    ratio = -np.inf
    ut_max = 0.0
    for i in range(N):
        F[i] = np.nan
        ut[i] = 0.0
    for i in range(first, last):
        wi = w[i]
        nu = 1.0 / wi
        lam[0] = nu * (1.0 + u[i] * d2u[i] / (wi * wi))
        kmax = lam[0]
        for j in range(1, n):
            lam[j] = nu * (1.0 + u[i] * tang[i])
            kmax = max(kmax, lam[j])
        f, ok = quotient_and_grad(lam, k, l, grad, e, ea, ew)
        if not ok:
            return False, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
        F[i] = f
        ut[i] = u[i] * wi * (f - sigma)
        ut_max = max(ut_max, abs(ut[i]))
        F_max = max(F_max, f)
        F_min = min(F_min, f)
        weight = grad[0] / (wi * wi)
        for j in range(1, n):
            weight += grad[j]
        diffusion = max(diffusion, u[i] * u[i] * weight)
        hm = abs(d2u[i])
        if n > 1:
            hm = max(hm, abs(tang[i]))
        hess_max = max(hess_max, u[i] * hm)
        if nu_min > a:
            ratio = max(ratio, kmax / (nu - a))
    if not nu_min > a:
        ratio = np.inf
    return True, diffusion, F_max, F_min, w_max, nu_min, hess_max, ratio, ut_max
