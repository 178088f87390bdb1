"""Exact computation on finite probability spaces."""
from .conditional import (
    cond_expectation,
    eps_sublevel_perp3,
    expected_cond_variance,
    is_dense_in_l2,
    is_dense_mod_constants,
    is_eps_measurable,
    is_measurable,
    measurable_subspace,
    perp3_complement,
    relative_sublevel_perp3,
)
from .operators import (
    PopulationOperators,
    central_partition,
    check_norm_domination,
    check_range_inclusion,
    is_complete,
    population_operators,
    population_regression_operator,
    regression_range_functions,
)
from .space import FiniteSpace, HilbertSubspace, JointModel, Partition
from .verifiers import (
    VerdictReport,
    intersection_report,
    is_strongly_relatively_universal,
    verify_exhaustiveness,
    verify_intersection_property,
    verify_lemma_constant,
    verify_relative_universality,
    verify_special_case_finest,
    verify_special_case_trivial,
    verify_unbiasedness,
)

__all__ = [
    "FiniteSpace",
    "HilbertSubspace",
    "JointModel",
    "Partition",
    "PopulationOperators",
    "VerdictReport",
    "central_partition",
    "check_norm_domination",
    "check_range_inclusion",
    "cond_expectation",
    "eps_sublevel_perp3",
    "expected_cond_variance",
    "intersection_report",
    "is_complete",
    "is_dense_in_l2",
    "is_dense_mod_constants",
    "is_eps_measurable",
    "is_measurable",
    "is_strongly_relatively_universal",
    "measurable_subspace",
    "perp3_complement",
    "population_operators",
    "population_regression_operator",
    "regression_range_functions",
    "relative_sublevel_perp3",
    "verify_exhaustiveness",
    "verify_intersection_property",
    "verify_lemma_constant",
    "verify_relative_universality",
    "verify_special_case_finest",
    "verify_special_case_trivial",
    "verify_unbiasedness",
]
