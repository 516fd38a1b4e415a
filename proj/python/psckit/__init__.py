"""Curvature, slice geometry, angle conditions, and the conformal
deformation pipeline for product metrics on X x R^k."""

from ._core import (
    ExprError,
    GeometryError,
    MetricSpecError,
    SolverError,
    Spec,
    angle_check,
    angle_terms,
    conformal_law,
    ellipticity,
    gauss_codazzi_residual,
    gaussian_curvature,
    pipeline,
    registry,
    registry_spec,
    restrict_to_x,
    scalar_curvature,
    solve_pde,
    spec_from_json,
    with_circle,
    yamabe,
)

__all__ = [
    "ExprError",
    "GeometryError",
    "MetricSpecError",
    "SolverError",
    "Spec",
    "angle_check",
    "angle_terms",
    "conformal_law",
    "ellipticity",
    "gauss_codazzi_residual",
    "gaussian_curvature",
    "pipeline",
    "registry",
    "registry_spec",
    "restrict_to_x",
    "scalar_curvature",
    "solve_pde",
    "spec_from_json",
    "with_circle",
    "yamabe",
]

__version__ = "0.1.0"
