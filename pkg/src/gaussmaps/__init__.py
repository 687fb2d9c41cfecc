"""Numerical toolkit for spherical and geodesic Gauss maps of immersions
into round spheres.

The library models the unit sphere bundle of the round sphere and the
manifold of oriented great circles, computes the lifts of parametric
immersions into both, and verifies the structural identities (contact,
symplectic, mean-curvature, Hamiltonian-variation) against independent
finite-difference oracles on a catalog of closed-form fixtures.
"""

from . import catalog, dual, exprdsl, liealg, spaces, variations
from .immersion import (
    ChartDomainError, ConformalReport, DegenerateImmersion,
    DomainBoundaryError, ImmersionChart, NotConformal, ShapeData,
    chart_from_expressions, conformal_report, conformal_residual,
    nabla_ii_components, principal_curvatures, second_form_derivative,
    shape_data, shape_operator, shape_operator_sym,
)
from .gaussmap import (
    AdaptedFrame, IdentityResiduals, MeanCurvatureResult, MultiplicityCrossing,
    OneFormComparison, UnitNormalChart, adapted_frame, horizontal_lift,
    lift_tension_oracle, mean_curvature_identity_residuals,
    mean_curvature_one_form, mean_curvature_result, reeb_component,
    tension_oracle, unit_normal_chart,
)
from .report import run, validate_config, write_report

__version__ = "0.1.0"

__all__ = [
    "AdaptedFrame", "ChartDomainError", "ConformalReport",
    "DegenerateImmersion", "DomainBoundaryError", "IdentityResiduals",
    "ImmersionChart", "MeanCurvatureResult", "MultiplicityCrossing",
    "NotConformal", "OneFormComparison", "ShapeData", "UnitNormalChart",
    "adapted_frame", "catalog", "chart_from_expressions", "conformal_report",
    "conformal_residual", "dual", "exprdsl", "horizontal_lift", "liealg",
    "lift_tension_oracle", "mean_curvature_identity_residuals",
    "mean_curvature_one_form", "mean_curvature_result",
    "nabla_ii_components", "principal_curvatures", "reeb_component", "run",
    "second_form_derivative", "shape_data", "shape_operator",
    "shape_operator_sym", "spaces", "tension_oracle", "unit_normal_chart",
    "validate_config", "variations", "write_report",
]
