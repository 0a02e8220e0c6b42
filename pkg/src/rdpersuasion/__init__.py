"""Persuasion rates at a regression-discontinuity cutoff."""

from .core import (
    DataScenario,
    DesignKind,
    ExposureLimits,
    Observation,
    Sample,
    Side,
    classify_scenario,
    validate_sample,
)
from .estimands import (
    PersuasionInterval,
    PersuasionPoint,
    dk_rate,
    global_poly_theta,
    theta_cl_star,
    theta_cl_star_star,
    theta_rd,
    theta_rd_local,
    theta_rd_se,
    theta_rd_upper_e,
    theta_rd_upper_full,
)
from .inference import (
    AnalysisPlan,
    ConfidenceInterval,
    Target,
    decision_flow,
    norm_cdf,
    norm_quantile,
    one_sided_lower_ci,
    stoye_ci,
    stoye_critical_value,
    two_sided_ci,
)
from .locpoly import FitSpec, KernelKind, Variant, VarianceKind, fit_boundary, fit_boundary_bc, rot_bandwidth

__version__ = "0.1.0"

__all__ = [
    "DataScenario",
    "DesignKind",
    "ExposureLimits",
    "Observation",
    "Sample",
    "Side",
    "classify_scenario",
    "validate_sample",
    "PersuasionInterval",
    "PersuasionPoint",
    "dk_rate",
    "global_poly_theta",
    "theta_cl_star",
    "theta_cl_star_star",
    "theta_rd",
    "theta_rd_local",
    "theta_rd_se",
    "theta_rd_upper_e",
    "theta_rd_upper_full",
    "AnalysisPlan",
    "ConfidenceInterval",
    "Target",
    "decision_flow",
    "norm_cdf",
    "norm_quantile",
    "one_sided_lower_ci",
    "stoye_ci",
    "stoye_critical_value",
    "two_sided_ci",
    "FitSpec",
    "KernelKind",
    "Variant",
    "VarianceKind",
    "fit_boundary",
    "fit_boundary_bc",
    "rot_bandwidth",
]
