"""Curvature flows of graphs in the half-space model of hyperbolic space."""

from .analysis import RootResult, find_sigma0, phi_eval, phi_theta_eval
from .curvature import CurvatureFunctionSpec, F_matrix_eval, f_and_grad, f_eval, verify_structure
from .errors import (
    ConeViolationError,
    DomainError,
    GeometryError,
    HypflowError,
    InadmissibleInitialDataError,
    ParameterError,
    PreconditionError,
    StepFailureError,
)
from .flow import FlowConfig, FlowState, initial_surface, run_to_stationary, step
from .geometry import DomainSpec, Grid, cap_exact, grid_geometry, radial_convert, sample_geometry
from .markers import verify_evolution_identities

__all__ = [
    "ConeViolationError",
    "CurvatureFunctionSpec",
    "DomainError",
    "DomainSpec",
    "F_matrix_eval",
    "FlowConfig",
    "FlowState",
    "GeometryError",
    "Grid",
    "HypflowError",
    "InadmissibleInitialDataError",
    "ParameterError",
    "PreconditionError",
    "RootResult",
    "StepFailureError",
    "cap_exact",
    "f_and_grad",
    "f_eval",
    "find_sigma0",
    "grid_geometry",
    "initial_surface",
    "phi_eval",
    "phi_theta_eval",
    "radial_convert",
    "run_to_stationary",
    "sample_geometry",
    "step",
    "verify_evolution_identities",
    "verify_structure",
]
