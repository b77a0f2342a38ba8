"""Discrete geometry of graphs u(x) > 0 over a domain of the boundary at infinity.

Heights and coordinates are Euclidean; curvatures are hyperbolic unless
prefixed ``euclid``.  Two domain shapes are supported: a symmetric interval
(n = 1) and a rotationally symmetric disk of any dimension, which reduces to
a radial grid ρ in [0, r] with the symmetry axis at node 0.
"""

from dataclasses import dataclass
from functools import cached_property
from math import inf, sqrt

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GeometryError, ParameterError
from .linalg import jacobi_eigh

INTERVAL = "interval"
DISK = "rotational_disk"


@dataclass(frozen=True)
class DomainSpec:
    mode: str
    n: int
    r: float

    def __post_init__(self):
        if self.mode not in (INTERVAL, DISK):
            raise ParameterError(f"unknown domain mode {self.mode!r}")
        if not self.r > 0:
            raise ParameterError(f"domain radius must be positive, got {self.r}")
        if self.mode == INTERVAL and self.n != 1:
            raise ParameterError("interval mode requires n = 1")
        if self.mode == DISK and self.n < 2:
            raise ParameterError("rotational_disk mode requires n >= 2")

    @property
    def r1(self):
        """Largest exterior-sphere radius touching the boundary."""
        return inf if self.mode == INTERVAL else self.r

    @property
    def boundary_mean_curvature(self):
        return 0.0 if self.mode == INTERVAL else (self.n - 1) / self.r


@dataclass(frozen=True)
class Grid:
    domain: DomainSpec
    node_count: int

    def __post_init__(self):
        if self.node_count < 3:
            raise ParameterError(f"need at least 3 nodes, got {self.node_count}")

    @cached_property
    def h(self):
        span = 2.0 * self.domain.r if self.domain.mode == INTERVAL else self.domain.r
        return span / (self.node_count - 1)

    @cached_property
    def coords(self):
        r = self.domain.r
        if self.domain.mode == INTERVAL:
            out = np.linspace(-r, r, self.node_count)
        else:
            out = np.linspace(0.0, r, self.node_count)
        out.flags.writeable = False
        return out

    @cached_property
    def boundary_nodes(self):
        last = self.node_count - 1
        return (0, last) if self.domain.mode == INTERVAL else (last,)

    @cached_property
    def interior(self):
        """Slice of nodes whose height evolves (the axis counts as interior)."""
        if self.domain.mode == INTERVAL:
            return slice(1, self.node_count - 1)
        return slice(0, self.node_count - 1)

    def is_boundary(self, i):
        return i in self.boundary_nodes


def grid_derivatives(grid, u):
    """First and second radial/x derivatives at every node.

    Interior nodes use centered differences; boundary nodes use one-sided
    second-order stencils; the disk axis uses the even ghost u(-h) = u(h).
    Also returns the tangential Hessian entry u_ρ/ρ (equal to u_ρρ on the
    axis); for the interval it is unused and returned as zeros.
    """
    u = np.asarray(u, dtype=float)
    h = grid.h
    du = np.empty_like(u)
    d2u = np.empty_like(u)
    du[1:-1] = (u[2:] - u[:-2]) / (2.0 * h)
    d2u[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    du[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)
    d2u[-1] = (2.0 * u[-1] - 5.0 * u[-2] + 4.0 * u[-3] - u[-4]) / (h * h) if len(u) > 3 else d2u[-2]
    if grid.domain.mode == INTERVAL:
        du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
        d2u[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h) if len(u) > 3 else d2u[1]
        tang = np.zeros_like(u)
    else:
        du[0] = 0.0
        d2u[0] = 2.0 * (u[1] - u[0]) / (h * h)
        tang = np.empty_like(u)
        tang[1:] = du[1:] / grid.coords[1:]
        tang[0] = d2u[0]
    return du, d2u, tang


@dataclass
class GridGeometry:
    """Vectorised geometry of a whole grid; curvature arrays are (N, n)."""

    u: np.ndarray
    du: np.ndarray
    d2u: np.ndarray
    tang: np.ndarray
    w: np.ndarray
    nu_up: np.ndarray
    euclid_kappa: np.ndarray
    kappa: np.ndarray


def grid_geometry(grid, u):
    u = np.asarray(u, dtype=float)
    du, d2u, tang = grid_derivatives(grid, u)
    w = np.sqrt(1.0 + du * du)
    nu = 1.0 / w
    n = grid.domain.n
    ek = np.empty((len(u), n))
    ek[:, 0] = d2u / w**3
    if n > 1:
        ek[:, 1:] = (tang / w)[:, None]
    kappa = u[:, None] * ek + nu[:, None]
    return GridGeometry(u, du, d2u, tang, w, nu, ek, kappa)


@dataclass
class SurfaceSample:
    u: float
    du: np.ndarray
    d2u: np.ndarray
    w: float
    nu_up: float
    euclid_kappa: np.ndarray
    hyper_kappa: np.ndarray
    euclid_matrix: np.ndarray
    hyper_matrix: np.ndarray


def gamma_matrices(du):
    """γ^{ij} = δ − u_i u_j / (w(1+w)) and its inverse γ_{ij} = δ + u_i u_j / (1+w)."""
    du = np.atleast_1d(np.asarray(du, dtype=float))
    w = sqrt(1.0 + float(du @ du))
    outer = np.outer(du, du)
    eye = np.eye(len(du))
    return eye - outer / (w * (1.0 + w)), eye + outer / (1.0 + w)


def curvature_matrices(u, du, d2u):
    """Return (Ã[u], A[u], w) from height, gradient and Hessian at one point."""
    du = np.atleast_1d(np.asarray(du, dtype=float))
    d2u = np.atleast_2d(np.asarray(d2u, dtype=float))
    w = sqrt(1.0 + float(du @ du))
    g_up, _ = gamma_matrices(du)
    core = g_up @ d2u @ g_up
    core = 0.5 * (core + core.T)
    euclid = core / w
    hyper = (np.eye(len(du)) + u * core) / w
    return euclid, hyper, w


def _local_derivatives(grid, u, i):
    du, d2u, tang = grid_derivatives(grid, u)
    n = grid.domain.n
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    grad[0] = du[i]
    hess[0, 0] = d2u[i]
    for j in range(1, n):
        hess[j, j] = tang[i]
    return grad, hess


def sample_geometry(grid, u_values, node_index):
    """Geometry bundle at one interior node via the matrix formulas."""
    u_values = np.asarray(u_values, dtype=float)
    if len(u_values) != grid.node_count:
        raise GeometryError("u_values length does not match the grid")
    if not 0 <= node_index < grid.node_count or grid.is_boundary(node_index):
        raise IndexError(f"node {node_index} is not an interior node")
    if np.any(u_values <= 0.0):
        raise GeometryError("heights must be positive")
    u = float(u_values[node_index])
    grad, hess = _local_derivatives(grid, u_values, node_index)
    euclid, hyper, w = curvature_matrices(u, grad, hess)
    ek, _ = jacobi_eigh(euclid)
    nu = 1.0 / w
    return SurfaceSample(u, grad, hess, w, nu, ek, u * ek + nu, euclid, hyper)


@dataclass(frozen=True)
class CapSurface:
    """Piece of the Euclidean sphere |X - (0, -σR)| = R over |x| <= r.

    Every hyperbolic principal curvature equals σ (upward normal).
    """

    sigma: float
    R: float
    r: float

    def height(self, x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(self.R**2 - x * x) - self.sigma * self.R

    def slope(self, x):
        x = np.asarray(x, dtype=float)
        return -x / np.sqrt(self.R**2 - x * x)

    def second(self, x):
        x = np.asarray(x, dtype=float)
        return -self.R**2 / (self.R**2 - x * x) ** 1.5

    def w(self, x):
        x = np.asarray(x, dtype=float)
        return self.R / np.sqrt(self.R**2 - x * x)

    @property
    def boundary_value(self):
        return sqrt(self.R**2 - self.r**2) - self.sigma * self.R

    @property
    def boundary_w(self):
        return self.R / sqrt(self.R**2 - self.r**2)


def cap_radius(sigma, r, boundary_value=0.0):
    """Radius R of the σ-cap over radius r whose boundary height is ``boundary_value``."""
    eps = boundary_value
    return (eps * sigma + sqrt(eps * eps + (1.0 - sigma * sigma) * r * r)) / (1.0 - sigma * sigma)


def cap_exact(sigma, domain, truncation_radius=None, boundary_value=None):
    """Umbilic cap with curvature σ; R = r/√(1−σ²) unless truncated.

    Pass either ``truncation_radius`` R' > r/√(1−σ²) or the boundary height
    it should produce.
    """
    if not 0.0 < sigma < 1.0:
        raise ParameterError(f"sigma must lie in (0, 1), got {sigma}")
    r = domain.r
    R0 = r / sqrt(1.0 - sigma * sigma)
    if truncation_radius is not None and boundary_value is not None:
        raise ParameterError("give truncation_radius or boundary_value, not both")
    if boundary_value is not None:
        if boundary_value < 0:
            raise ParameterError("boundary_value must be non-negative")
        R = cap_radius(sigma, r, boundary_value)
    elif truncation_radius is not None:
        if truncation_radius < R0:
            raise ParameterError(f"truncation radius must be >= {R0}")
        R = float(truncation_radius)
    else:
        R = R0
    return CapSurface(float(sigma), float(R), float(r))


@dataclass
class RadialPatchSample:
    v: float
    y: float
    latitude: float
    grad_v: float
    hess_v: float
    hyper_kappa: np.ndarray

    @property
    def height(self):
        return self.y * np.exp(self.v)


class RadialPatch:
    """A graph re-expressed as X = e^v z over the upper unit hemisphere.

    The latitude φ is the angle between z and e_{n+1}; v(φ) is resampled by
    a cubic spline through the node points and differentiated on a uniform
    latitude stencil.
    """

    def __init__(self, grid, u_values):
        u = np.asarray(u_values, dtype=float)
        x = grid.coords
        radius = np.hypot(x, u)
        self.grid = grid
        self.valid = (radius > 0.0) & (u > 0.0)
        phi = np.arctan2(x, u)
        v = np.log(np.where(self.valid, radius, 1.0))
        self.phi = phi
        self.v = v
        px, pv = phi[self.valid], v[self.valid]
        if grid.domain.mode == DISK:
            # even extension through the axis
            px = np.concatenate([-px[:0:-1], px])
            pv = np.concatenate([pv[:0:-1], pv])
        if np.any(np.diff(px) <= 0.0):
            raise GeometryError("surface is not a radial graph over the hemisphere")
        self.spline = CubicSpline(px, pv)
        lo, hi = px[0], px[-1]
        self.dphi = (hi - lo) / (len(px) - 1)
        self.range = (lo, hi)

    def sample(self, node_index):
        if not self.valid[node_index]:
            raise GeometryError(f"node {node_index} is at the origin or on the equator")
        phi0 = self.phi[node_index]
        d = self.dphi
        lo, hi = self.range
        if phi0 - d < lo or phi0 + d > hi:
            raise GeometryError(f"node {node_index} lacks a full latitude stencil")
        vm, v0, vp = self.spline([phi0 - d, phi0, phi0 + d])
        v0 = self.v[node_index]
        vp_ = (vp - vm) / (2.0 * d)
        vpp = (vp - 2.0 * v0 + vm) / (d * d)
        return RadialPatchSample(
            float(v0), float(np.cos(phi0)), float(phi0), float(vp_), float(vpp),
            radial_curvatures(self.grid.domain.n, phi0, vp_, vpp),
        )


def radial_curvatures(n, phi, v_phi, v_phiphi):
    """Eigenvalues of A^s[v] for a rotationally symmetric radial graph.

    Along the meridian: (y v_φφ / w² − e·∇'v) / w with e·∇'v = −v_φ sin φ.
    Along the n−1 parallel directions: v_φ / (w sin φ), → v_φφ / w on the axis.
    """
    w = sqrt(1.0 + v_phi * v_phi)
    y = np.cos(phi)
    e_dot = -v_phi * np.sin(phi)
    out = np.empty(n)
    out[0] = (y * v_phiphi / (w * w) - e_dot) / w
    if n > 1:
        s = np.sin(phi)
        out[1:] = v_phiphi / w if abs(s) < 1e-12 else v_phi / (w * s)
    return out


def radial_convert(grid, u_values, node_index, patch=None):
    """Hyperbolic curvatures at a node computed from the radial representation."""
    patch = patch if patch is not None else RadialPatch(grid, u_values)
    return patch.sample(node_index)


def format_snapshot(grid, u, t):
    geo = grid_geometry(grid, u)
    d = grid.domain
    lines = [f"mode={d.mode} n={d.n} r={d.r:.17g} node_count={grid.node_count} t={t:.17g}"]
    for x, ui, wi, nui, kap in zip(grid.coords, geo.u, geo.w, geo.nu_up, geo.kappa):
        cols = [x, ui, wi, nui, *kap]
        lines.append(" ".join(f"{c:.17g}" for c in cols))
    return "\n".join(lines) + "\n"


def write_snapshot(path, grid, u, t):
    with open(path, "w") as fh:
        fh.write(format_snapshot(grid, u, t))


def read_snapshot(path):
    """Parse a snapshot into (header dict, columns array)."""
    with open(path) as fh:
        head = fh.readline().split()
        header = {}
        for item in head:
            key, value = item.split("=", 1)
            header[key] = value
        header["n"] = int(header["n"])
        header["node_count"] = int(header["node_count"])
        header["r"] = float(header["r"])
        header["t"] = float(header["t"])
        data = np.loadtxt(fh, ndmin=2)
    return header, data
