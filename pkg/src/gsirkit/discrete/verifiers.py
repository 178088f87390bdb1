"""Brute-force checks of the structural results on finite spaces.

Every verifier recomputes both sides of a statement from primitive
quantities and returns a :class:`VerdictReport`.  A statement whose
hypothesis fails yields ``verdict == "not_applicable"``, never ``"fail"``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import InvalidInput
from .conditional import (
    MEASURABLE_RTOL,
    SPAN_TOL,
    cond_expectation,
    eps_sublevel_perp3,
    expected_cond_variance,
    is_dense_in_l2,
    measurable_subspace,
    perp3_complement,
    relative_sublevel_perp3,
    same_span,
    span_contains,
    span_residual,
    with_constant,
)
from .operators import central_partition, is_complete, regression_range_functions
from .space import FiniteSpace, HilbertSubspace, JointModel, Partition


@dataclass
class VerdictReport:
    statement: str
    hypothesis_holds: bool
    conclusion_holds: bool
    witnesses: dict[str, Any] = field(default_factory=dict)
    max_residual: float = 0.0

    @property
    def verdict(self) -> str:
        if not self.hypothesis_holds:
            return "not_applicable"
        return "pass" if self.conclusion_holds else "fail"

    def to_json(self) -> dict:
        return {
            "statement": self.statement,
            "hypothesis_holds": bool(self.hypothesis_holds),
            "conclusion_holds": bool(self.conclusion_holds),
            "witnesses": _jsonable(self.witnesses),
            "max_residual": float(self.max_residual),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, Partition):
        return obj.to_json()
    return obj


def l2_measurable(G: Partition, sp: FiniteSpace) -> HilbertSubspace:
    """All G-measurable functions in L2(P)."""
    return measurable_subspace(HilbertSubspace.full(sp), G, sp)


def verify_intersection_property(
    H: HilbertSubspace,
    G: Partition,
    sp: FiniteSpace,
    eps_grid,
    n_random: int = 6,
    seed: int = 0,
) -> bool:
    return intersection_report(H, G, sp, eps_grid, n_random, seed).conclusion_holds


def intersection_report(H, G, sp, eps_grid, n_random: int = 6, seed: int = 0) -> VerdictReport:
    """Membership in the measurable subspace vs membership in every eps-sublevel set.

    The left side comes from the null-space computation of
    :func:`measurable_subspace`; the right side evaluates E(var[f|G])
    directly on each probe.
    """
    grid = np.asarray(eps_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) > 0):
        raise InvalidInput("eps_grid must be nonempty, positive and decreasing")
    rng = np.random.default_rng(seed)
    B = np.asarray(H.basis)
    M = np.asarray(measurable_subspace(H, G, sp).basis)
    probes = [B, M]
    if B.shape[1]:
        probes.append(B @ rng.standard_normal((B.shape[1], n_random)))
    if M.shape[1]:
        probes.append(M @ rng.standard_normal((M.shape[1], n_random)))
    F = np.column_stack(probes) if any(p.shape[1] for p in probes) else np.zeros((sp.m, 0))
    mismatches = 0
    worst = 0.0
    n_members = 0
    for j in range(F.shape[1]):
        f = F[:, j]
        in_meas = span_contains(M, f, sp) if M.shape[1] else bool(np.allclose(f, 0))
        v = expected_cond_variance(f, G, sp)
        limit = v <= MEASURABLE_RTOL * max(sp.var(f), 1.0)
        in_all = bool(np.all(v < grid)) and limit
        n_members += in_all
        if in_meas != in_all:
            mismatches += 1
        if in_meas:
            worst = max(worst, v / max(sp.var(f), 1.0))
    return VerdictReport(
        "measurable_intersection",
        True,
        mismatches == 0,
        {"probes": F.shape[1], "members": n_members, "mismatches": mismatches},
        worst,
    )


def relative_universality_holds(H: HilbertSubspace, G: Partition, sp: FiniteSpace, eps: float, tol: float = SPAN_TOL) -> bool:
    """Covariance complement of the eps-sublevel set lies inside that of L2_G."""
    return span_contains(perp3_complement(l2_measurable(G, sp), sp), eps_sublevel_perp3(H, G, sp, eps), sp, tol)


def is_strongly_relatively_universal(H: HilbertSubspace, G: Partition, sp: FiniteSpace, tol: float = SPAN_TOL) -> bool:
    """Measurable members of H, with constants, span every G-measurable function."""
    return span_contains(with_constant(measurable_subspace(H, G, sp), sp), l2_measurable(G, sp), sp, tol)


def verify_relative_universality(H: HilbertSubspace, G: Partition, sp: FiniteSpace, eps: float, tol: float = SPAN_TOL) -> VerdictReport:
    """Density of H modulo constants implies relative universality w.r.t. G.

    Witnesses also record the scale-free reading of the sublevel set and
    whether the plain sublevel complement collapses to the complement of H.
    """
    if not eps > 0:
        raise InvalidInput("eps must be positive")
    target = perp3_complement(l2_measurable(G, sp), sp)
    sub = eps_sublevel_perp3(H, G, sp, eps)
    h_perp = perp3_complement(H, sp)
    rel = relative_sublevel_perp3(H, G, sp, eps)
    residual = span_residual(target, sub, sp)
    return VerdictReport(
        "relative_universality",
        is_dense_in_l2(H, sp),
        residual <= tol,
        {
            "eps": eps,
            "sublevel_perp3_dim": sub.dim,
            "h_perp3_dim": h_perp.dim,
            "sublevel_equals_h_perp3": same_span(sub, h_perp, sp, tol),
            "relative_reading_holds": span_contains(target, rel, sp, tol),
            "target_perp3_dim": target.dim,
        },
        residual if sub.dim else 0.0,
    )


def verify_lemma_constant(f, G: Partition, sp: FiniteSpace, tol: float = 1e-9, corrupt: bool = False) -> VerdictReport:
    """Zero covariance with every G-measurable function vs E[f|G] = E[f].

    ``corrupt`` negates the second side; it exists only to test that harnesses
    notice a broken verifier.
    """
    f = sp.check(f)
    sd_f = np.sqrt(sp.var(f))
    if sd_f <= 1e-13 * float(np.abs(f).max(initial=0.0)):
        res_a = np.zeros(len(G))
        res_b = 0.0
    else:
        ind = G.indicators()
        sd_ind = np.sqrt(np.maximum(sp.pmf @ ind - (sp.pmf @ ind) ** 2, 0.0))
        covs = np.abs(sp.cov(f, ind))
        res_a = np.where(sd_ind > 0, covs / (sd_f * np.where(sd_ind > 0, sd_ind, 1.0)), 0.0)
        res_b = float(np.abs(cond_expectation(f, G, sp) - sp.mean(f)).max() / sd_f)
    side_a = bool(np.all(res_a <= tol))
    side_b = bool(res_b <= tol)
    if corrupt:
        side_b = not side_b
    return VerdictReport(
        "constant_conditional_mean",
        True,
        side_a == side_b,
        {"orthogonal_to_measurable": side_a, "conditional_mean_constant": side_b},
        max(float(res_a.max(initial=0.0)) if side_a else 0.0, float(res_b) if side_b else 0.0),
    )


def verify_special_case_finest(H: HilbertSubspace, sp: FiniteSpace, eps: float = 0.5) -> VerdictReport:
    """Relative universality w.r.t. the finest partition iff H is dense modulo constants."""
    G = Partition.singletons(sp.m)
    universal = relative_universality_holds(H, G, sp, eps)
    dense = is_dense_in_l2(H, sp)
    return VerdictReport("special_case_finest", True, universal == dense, {"universal": universal, "dense": dense})


def verify_special_case_trivial(H: HilbertSubspace, sp: FiniteSpace, eps: float = 0.5) -> VerdictReport:
    """Every H is relatively universal w.r.t. the trivial partition."""
    universal = relative_universality_holds(H, Partition.trivial(sp.m), sp, eps)
    return VerdictReport("special_case_trivial", True, universal, {"universal": universal})


def _per_column_ratios(F: np.ndarray, G: Partition, sp: FiniteSpace) -> np.ndarray:
    v = expected_cond_variance(F, G, sp)
    var = sp.pmf @ (F - sp.pmf @ F) ** 2
    big = var.max(initial=0.0)
    negligible = var <= 1e-24 * max(big, 1.0)
    return np.where(negligible, 0.0, v / np.where(negligible, 1.0, var))


def verify_unbiasedness(jm: JointModel, hx: HilbertSubspace, hy: HilbertSubspace, tol: float = 1e-9) -> VerdictReport:
    """Every function in ran(R_XY) is measurable w.r.t. the central partition."""
    sp = jm.space_x
    G = central_partition(jm)
    F = regression_range_functions(jm, hx, hy)
    ratios = _per_column_ratios(F, G, sp)
    worst = float(ratios.max(initial=0.0))
    return VerdictReport(
        "unbiasedness",
        is_dense_in_l2(hx, sp),
        worst <= tol,
        {"central_partition": G, "column_ratios": ratios, "rank": int(np.linalg.matrix_rank(F)) if F.size else 0},
        worst,
    )


def verify_exhaustiveness(jm: JointModel, hx: HilbertSubspace, hy: HilbertSubspace, tol: float = 1e-8) -> VerdictReport:
    """span(ran(R_XY) and constants) contains the central class.

    When H_X is also dense and the unbiasedness check passes, the report
    records Fisher consistency: the two spans coincide.
    """
    sp_x, sp_y = jm.space_x, jm.space_y
    G = central_partition(jm)
    y_dense = is_dense_in_l2(hy, sp_y)
    complete = is_complete(jm, G)
    F = regression_range_functions(jm, hx, hy)
    central = measurable_subspace(hx, G, sp_x)
    ran_c = with_constant(F, sp_x)
    residual = span_residual(ran_c, central, sp_x)
    conclusion = residual <= tol
    witnesses: dict[str, Any] = {
        "central_partition": G,
        "h_y_dense": y_dense,
        "central_partition_complete": complete,
        "central_class_dim": central.dim,
    }
    fisher = None
    if y_dense and complete and is_dense_in_l2(hx, sp_x):
        unb = verify_unbiasedness(jm, hx, hy, tol)
        back = span_residual(with_constant(central, sp_x), F, sp_x)
        fisher = bool(conclusion and unb.conclusion_holds and back <= tol)
        residual = max(residual, back)
    witnesses["fisher_consistent"] = fisher
    return VerdictReport("exhaustiveness", y_dense and complete, conclusion, witnesses, residual)
