"""Kernel sufficient dimension reduction with exact finite-space checks."""
from .errors import (
    AssumptionViolation,
    GenerationFailure,
    GsirError,
    InvalidInput,
    InvalidSpec,
    NotPositiveDefinite,
    OracleInconsistency,
    PreconditionViolation,
)
from .gsir import GsirModel, KernelSpec, center_gram, evaluate_predictors, gram, gsir_fit, median_bandwidth
from .synth import Dataset, ScenarioSpec, gen_continuous, gen_discrete_joint

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolation",
    "Dataset",
    "GenerationFailure",
    "GsirError",
    "GsirModel",
    "InvalidInput",
    "InvalidSpec",
    "KernelSpec",
    "NotPositiveDefinite",
    "OracleInconsistency",
    "PreconditionViolation",
    "ScenarioSpec",
    "center_gram",
    "evaluate_predictors",
    "gen_continuous",
    "gen_discrete_joint",
    "gram",
    "gsir_fit",
    "median_bandwidth",
]
