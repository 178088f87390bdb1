"""Randomized verification suite over finite spaces.

Instance ``i`` of statement ``s`` draws from
``numpy.random.default_rng([seed, s_index, i])``, so any failing instance is
reproduced from the triple recorded in the report.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .discrete.conditional import SPAN_TOL, dense_mod_constants_routes
from .discrete.randgen import random_function, random_partition, random_space, random_subspace
from .discrete.space import FiniteSpace, HilbertSubspace, JointModel
from .discrete.verifiers import (
    VerdictReport,
    intersection_report,
    is_strongly_relatively_universal,
    verify_exhaustiveness,
    verify_lemma_constant,
    verify_relative_universality,
    verify_special_case_finest,
    verify_special_case_trivial,
    verify_unbiasedness,
)
from .discrete.conditional import cond_expectation, is_dense_in_l2
from .errors import InvalidInput
from .linalg import gram_schmidt_basis, mp_pinv, range_projection
from .synth import gen_discrete_joint

RESIDUAL_TOL = 1e-9


def _dense_subspace(rng: np.random.Generator, sp: FiniteSpace) -> HilbertSubspace:
    """Random H with span(H and constants) = L2: dimension m, or m - 1 avoiding constants."""
    k = sp.m if sp.m == 1 or rng.random() < 0.5 else sp.m - 1
    return random_subspace(rng, sp, k, metric="random" if rng.random() < 0.7 else "l2")


def _any_subspace(rng: np.random.Generator, sp: FiniteSpace) -> HilbertSubspace:
    if rng.random() < 0.5:
        return _dense_subspace(rng, sp)
    return random_subspace(rng, sp, int(rng.integers(0, sp.m + 1)))


def check_dense_mod_constants(rng: np.random.Generator, corrupt: bool = False) -> VerdictReport:
    sp = random_space(rng)
    B = random_subspace(rng, sp, int(rng.integers(0, sp.m + 1)))
    Bm = np.asarray(B.basis)
    k_a = int(rng.integers(0, B.dim + 1))
    A = Bm @ rng.standard_normal((B.dim, k_a)) if k_a else np.zeros((sp.m, 0))
    if rng.random() < 0.3:
        A = np.column_stack([A, A @ rng.standard_normal(A.shape[1]) + rng.standard_normal() * np.ones(sp.m)])
    by_span, by_perp = dense_mod_constants_routes(A, Bm, sp)
    return VerdictReport(
        "dense_mod_constants_perp3", True, by_span == by_perp, {"span_route": by_span, "perp3_route": by_perp}
    )


def check_intersection(rng: np.random.Generator, corrupt: bool = False) -> VerdictReport:
    sp = random_space(rng)
    G = random_partition(rng, sp.m)
    H = _any_subspace(rng, sp)
    grid = np.sort(10.0 ** rng.uniform(-6, 1, size=4))[::-1]
    return intersection_report(H, G, sp, grid, seed=int(rng.integers(2**31)))


def check_lemma_constant(rng: np.random.Generator, corrupt: bool = False) -> VerdictReport:
    sp = random_space(rng)
    G = random_partition(rng, sp.m)
    f = random_function(rng, sp)
    kind = rng.integers(3)
    if kind == 0:
        # covariance-orthogonal to every G-measurable function
        f = f - cond_expectation(f, G, sp) + rng.standard_normal()
    elif kind == 1:
        f = cond_expectation(f, G, sp)
    return verify_lemma_constant(f, G, sp, tol=RESIDUAL_TOL, corrupt=corrupt)


def check_finest(rng: np.random.Generator, corrupt: bool = False) -> VerdictReport:
    sp = random_space(rng)
    return verify_special_case_finest(_any_subspace(rng, sp), sp, eps=float(10 ** rng.uniform(-3, 0)))


def check_trivial(rng: np.random.Generator, corrupt: bool = False) -> VerdictReport:
    sp = random_space(rng)
    return verify_special_case_trivial(_any_subspace(rng, sp), sp, eps=float(10 ** rng.uniform(-3, 0)))


def check_relative_universality(rng: np.random.Generator, corrupt: bool = False) -> VerdictReport:
    sp = random_space(rng)
    G = random_partition(rng, sp.m)
    H = _dense_subspace(rng, sp) if rng.random() < 0.8 else random_subspace(rng, sp, int(rng.integers(0, sp.m)))
    return verify_relative_universality(H, G, sp, float(10 ** rng.uniform(-4, 0)), RESIDUAL_TOL)


def check_pinv_projection(rng: np.random.Generator, corrupt: bool = False) -> VerdictReport:
    rows, cols = (int(v) for v in rng.integers(1, 21, size=2))
    rank = int(rng.integers(0, min(rows, cols) + 1))
    A = rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))
    A *= 10.0 ** rng.uniform(-3, 3)
    return pinv_report(A)


def pinv_report(A, tol: float = RESIDUAL_TOL) -> VerdictReport:
    """Four Penrose identities plus pinv(A) A = projector onto the row space."""
    A = np.asarray(A, dtype=float)
    Ap = mp_pinv(A)
    scale_a = max(np.linalg.norm(A), 1e-300)
    scale_p = max(np.linalg.norm(Ap), 1e-300)
    res = {
        "a_ap_a": np.linalg.norm(A @ Ap @ A - A) / scale_a,
        "ap_a_ap": np.linalg.norm(Ap @ A @ Ap - Ap) / scale_p,
        "a_ap_symmetric": np.linalg.norm(A @ Ap - (A @ Ap).T) / max(np.linalg.norm(A @ Ap), 1.0),
        "ap_a_symmetric": np.linalg.norm(Ap @ A - (Ap @ A).T) / max(np.linalg.norm(Ap @ A), 1.0),
    }
    P = range_projection(A)
    Q = gram_schmidt_basis(A.T)
    res["idempotent"] = np.linalg.norm(P @ P - P) / max(np.linalg.norm(P), 1.0)
    res["row_space_projector"] = np.linalg.norm(P - Q @ Q.T) / max(np.linalg.norm(P), 1.0)
    worst = float(max(res.values()))
    witnesses = {k: float(v) for k, v in res.items()}
    witnesses["shape"] = list(A.shape)
    witnesses["rank"] = int(Q.shape[1])
    return VerdictReport("pinv_projection", True, worst <= tol, witnesses, worst)


def _random_joint(rng: np.random.Generator) -> JointModel:
    m_x = int(rng.integers(2, 13))
    m_y = int(rng.integers(2, 9))
    if rng.random() < 0.3:
        P = rng.dirichlet(np.ones(m_x * m_y)).reshape(m_x, m_y) + 1e-3
        return JointModel(P / P.sum())
    blocks = int(rng.integers(1, min(m_x, 5) + 1))
    return gen_discrete_joint(m_x, m_y, blocks, int(rng.integers(2**63))).joint


def check_unbiasedness(rng: np.random.Generator, corrupt: bool = False) -> VerdictReport:
    jm = _random_joint(rng)
    hx = _dense_subspace(rng, jm.space_x)
    hy = _any_subspace(rng, jm.space_y)
    return verify_unbiasedness(jm, hx, hy, tol=RESIDUAL_TOL)


def check_exhaustiveness(rng: np.random.Generator, corrupt: bool = False) -> VerdictReport:
    m_x = int(rng.integers(2, 13))
    blocks = int(rng.integers(1, min(m_x, 5) + 1))
    m_y = int(rng.integers(2, 9))
    jm = gen_discrete_joint(m_x, m_y, blocks, int(rng.integers(2**63))).joint
    hx = _dense_subspace(rng, jm.space_x)
    hy = _dense_subspace(rng, jm.space_y)
    return verify_exhaustiveness(jm, hx, hy, tol=RESIDUAL_TOL)


STATEMENTS: dict[str, Callable[..., VerdictReport]] = {
    "dense_mod_constants_perp3": check_dense_mod_constants,
    "measurable_intersection": check_intersection,
    "constant_conditional_mean": check_lemma_constant,
    "special_case_finest": check_finest,
    "special_case_trivial": check_trivial,
    "relative_universality": check_relative_universality,
    "pinv_projection": check_pinv_projection,
    "unbiasedness": check_unbiasedness,
    "exhaustiveness_fisher": check_exhaustiveness,
}


@dataclass
class StatementSummary:
    statement: str
    instances: int = 0
    passed: int = 0
    failed: int = 0
    not_applicable: int = 0
    worst_residual: float = 0.0
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "statement": self.statement,
            "instances": self.instances,
            "passed": self.passed,
            "failed": self.failed,
            "not_applicable": self.not_applicable,
            "worst_residual": self.worst_residual,
            "failures": self.failures,
        }


def instance_rng(seed: int, statement_index: int, instance: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(statement_index), int(instance)])


def run_statement(name: str, seed: int, instances: int, corrupt_lemma: bool = False, max_failures: int = 5) -> StatementSummary:
    if name not in STATEMENTS:
        raise InvalidInput(f"unknown statement {name!r}")
    idx = list(STATEMENTS).index(name)
    fn = STATEMENTS[name]
    out = StatementSummary(name)
    for i in range(instances):
        rep = fn(instance_rng(seed, idx, i), corrupt=corrupt_lemma)
        out.instances += 1
        verdict = rep.verdict
        if verdict == "not_applicable":
            out.not_applicable += 1
            continue
        out.worst_residual = max(out.worst_residual, float(rep.max_residual))
        if verdict == "pass":
            out.passed += 1
        else:
            out.failed += 1
            if len(out.failures) < max_failures:
                out.failures.append(
                    {"reproducer": {"seed": int(seed), "statement_index": idx, "instance": i}, "report": rep.to_json()}
                )
    return out


def search_strong_universality(seed: int, instances: int) -> dict:
    """Look for H dense modulo constants that is not strongly relatively universal.

    Informational only; no outcome is asserted.
    """
    found = []
    for i in range(instances):
        rng = np.random.default_rng([int(seed), 1000, i])
        sp = random_space(rng)
        G = random_partition(rng, sp.m)
        H = _dense_subspace(rng, sp)
        if is_dense_in_l2(H, sp) and not is_strongly_relatively_universal(H, G, sp, SPAN_TOL):
            found.append({"seed": int(seed), "instance": i})
    return {"instances": instances, "counterexamples": len(found), "examples": found[:5]}


def run_suite(seed: int = 42, instances: int = 500, statements=None, corrupt_lemma: bool = False) -> dict:
    """Run every statement; ``ok`` is True iff no applicable instance failed."""
    if instances < 1:
        raise InvalidInput("instances must be at least 1")
    names = list(statements) if statements else list(STATEMENTS)
    t0 = time.perf_counter()
    summaries = [run_statement(n, seed, instances, corrupt_lemma) for n in names]
    search = search_strong_universality(seed, instances)
    elapsed = time.perf_counter() - t0
    return {
        "ok": all(s.failed == 0 for s in summaries),
        "residual_tolerance": RESIDUAL_TOL,
        "statements": [s.to_json() for s in summaries],
        "strong_universality_search": search,
        "elapsed_seconds": elapsed,
    }
