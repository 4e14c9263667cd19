"""Weighted generalized ψ-estimators as points of sign change, with grid
checks of their existence and uniqueness conditions."""

from ._kernels import backend, set_backend
from .core import (
    DiscreteDistribution,
    OpenInterval,
    OutcomeKind,
    PsiSolveError,
    SignChangeOutcome,
    ValidationError,
    WeightedSample,
    validate_weighted_sample,
)
from .estimators import (
    EstimateResult,
    bajraktarevic_expectation_point,
    closed_form,
    estimate,
    expectation_sign_change,
    weighted_psi_sum,
)
from .leftinv import MonotoneFunction, builtin_monotone, generalized_left_inverse, range_hull
from .psifamilies import PsiFamily, make_family, theta1
from .signchange import SolverOptions, bracket, find_sign_change
from .verify import PropertyReport, reproduce, reproduce_all

__version__ = "0.1.0"

__all__ = [
    "DiscreteDistribution", "EstimateResult", "MonotoneFunction", "OpenInterval", "OutcomeKind",
    "PropertyReport", "PsiFamily", "PsiSolveError", "SignChangeOutcome", "SolverOptions",
    "ValidationError", "WeightedSample", "backend", "bajraktarevic_expectation_point", "bracket",
    "builtin_monotone", "closed_form", "estimate", "expectation_sign_change", "find_sign_change",
    "generalized_left_inverse", "make_family", "range_hull", "reproduce", "reproduce_all",
    "set_backend", "theta1", "validate_weighted_sample", "weighted_psi_sum",
]
