"""Conditional expectations, eps-measurability and covariance orthogonality.

Subspace computations are carried out in the weighted coordinates
``sqrt(p) * f`` where the L2(P) inner product becomes Euclidean.
"""
from __future__ import annotations

import numpy as np

from ..errors import InvalidInput, OracleInconsistency, PreconditionViolation
from ..linalg import null_space, orthonormal_basis
from .space import FiniteSpace, HilbertSubspace, Partition

MEASURABLE_RTOL = 1e-12
RANK_RTOL = 1e-10
SPAN_TOL = 1e-9


def _check_partition(G: Partition, sp: FiniteSpace) -> None:
    if G.m != sp.m:
        raise InvalidInput(f"partition covers {G.m} atoms, space has {sp.m}")


def _columns(S, sp: FiniteSpace) -> np.ndarray:
    """Coerce a subspace, matrix, vector or list of vectors into ``m x k`` columns."""
    if isinstance(S, HilbertSubspace):
        return np.asarray(S.basis)
    if S is None:
        return np.zeros((sp.m, 0))
    if isinstance(S, (list, tuple)):
        if len(S) == 0:
            return np.zeros((sp.m, 0))
        return np.column_stack([sp.check(np.asarray(s, dtype=float).ravel(), "member") for s in S])
    S = np.asarray(S, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    return sp.check(S, "S")


def block_projector(G: Partition, sp: FiniteSpace) -> np.ndarray:
    """Orthogonal projector (weighted coordinates) onto G-measurable functions."""
    _check_partition(G, sp)
    E = sp.embed(G.indicators())
    E = E / np.linalg.norm(E, axis=0)
    return E @ E.T


def cond_expectation(f, G: Partition, sp: FiniteSpace) -> np.ndarray:
    """E[f | G]: the probability-weighted block average broadcast back to atoms."""
    f = sp.check(f)
    _check_partition(G, sp)
    ind = G.indicators()
    mass = sp.pmf @ ind
    block_means = (ind.T @ (sp.pmf[:, None] * f if f.ndim == 2 else sp.pmf * f))
    block_means = block_means / (mass[:, None] if f.ndim == 2 else mass)
    return ind @ block_means


def expected_cond_variance(f, G: Partition, sp: FiniteSpace):
    """E(var[f | G]) = E[(f - E[f|G])^2]; column-wise for a matrix argument."""
    f = sp.check(f)
    r = f - cond_expectation(f, G, sp)
    out = sp.pmf @ (r * r)
    return out if f.ndim == 2 else float(out)


def is_eps_measurable(f, G: Partition, sp: FiniteSpace, eps: float) -> bool:
    if eps < 0:
        raise InvalidInput("eps must be non-negative")
    return expected_cond_variance(f, G, sp) < eps


def is_measurable(f, G: Partition, sp: FiniteSpace) -> bool:
    """Measurability up to the scale-aware float tolerance."""
    return expected_cond_variance(f, G, sp) <= MEASURABLE_RTOL * max(sp.var(f), 1.0)


def _whiten(H: HilbertSubspace, sp: FiniteSpace):
    """Return (U, C) with ``embed(H.basis) @ C = U`` and U orthonormal."""
    W = sp.embed(np.asarray(H.basis))
    U, s, Vt = np.linalg.svd(W, full_matrices=False)
    return U, Vt.T / s


def _sub(H: HilbertSubspace, C: np.ndarray) -> HilbertSubspace:
    if C.shape[1] == 0:
        return HilbertSubspace.zero(H.m)
    return HilbertSubspace(H.basis @ C, C.T @ H.metric @ C)


def measurable_subspace(H: HilbertSubspace, G: Partition, sp: FiniteSpace) -> HilbertSubspace:
    """The G-measurable members of H, as the null space of f -> E(var[f|G])."""
    _check_partition(G, sp)
    if H.dim == 0:
        return H
    U, C = _whiten(H, sp)
    R = U - block_projector(G, sp) @ U
    _, s, Vt = np.linalg.svd(R, full_matrices=True)
    s = np.concatenate([s, np.zeros(Vt.shape[0] - s.size)])
    N = Vt[s <= RANK_RTOL].T
    return _sub(H, C @ N)


def l2_orthonormal(F, sp: FiniteSpace, tol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (weighted coordinates) of the span of the columns of F."""
    W = sp.embed(_columns(F, sp))
    norms = np.linalg.norm(W, axis=0)
    keep = norms > 0
    if not keep.any():
        return np.zeros((sp.m, 0))
    return orthonormal_basis(W[:, keep] / norms[keep], tol)


def span_residual(outer, inner, sp: FiniteSpace) -> float:
    """Largest relative residual of inner columns after L2 projection onto span(outer)."""
    Q = l2_orthonormal(outer, sp)
    V = sp.embed(_columns(inner, sp))
    if V.shape[1] == 0:
        return 0.0
    norms = np.linalg.norm(V, axis=0)
    keep = norms > 0
    if not keep.any():
        return 0.0
    V = V[:, keep] / norms[keep]
    res = V - Q @ (Q.T @ V)
    return float(np.linalg.norm(res, axis=0).max())


def span_contains(outer, inner, sp: FiniteSpace, tol: float = SPAN_TOL) -> bool:
    return span_residual(outer, inner, sp) <= tol


def same_span(A, B, sp: FiniteSpace, tol: float = SPAN_TOL) -> bool:
    return span_contains(A, B, sp, tol) and span_contains(B, A, sp, tol)


def with_constant(S, sp: FiniteSpace) -> np.ndarray:
    return np.column_stack([_columns(S, sp), np.ones(sp.m)])


def perp3_complement(S, sp: FiniteSpace) -> HilbertSubspace:
    """Functions with zero covariance against every member of S.

    Covariance with s equals the L2 inner product with ``s - E[s]``, so the
    result is the L2 complement of the centred span of S.  Members of S that
    are constant up to rounding are dropped before orthonormalising.
    """
    S = _columns(S, sp)
    if S.shape[1] == 0:
        return HilbertSubspace.full(sp)
    ref = np.linalg.norm(sp.embed(S), axis=0)
    W = sp.embed(S - sp.pmf @ S)
    norms = np.linalg.norm(W, axis=0)
    keep = norms > MEASURABLE_RTOL * np.maximum(ref, np.finfo(float).tiny)
    if not keep.any():
        return HilbertSubspace.full(sp)
    Q = orthonormal_basis(W[:, keep] / norms[keep], RANK_RTOL)
    N = null_space(Q.T)
    if N.shape[1] == 0:
        return HilbertSubspace.zero(sp.m)
    return HilbertSubspace(sp.unembed(N), np.eye(N.shape[1]))


def is_dense_in_l2(H, sp: FiniteSpace) -> bool:
    """span(H and the constants) equals L2(P)."""
    return span_contains(with_constant(H, sp), np.eye(sp.m), sp)


def dense_mod_constants_routes(A, B, sp: FiniteSpace, tol: float = SPAN_TOL) -> tuple[bool, bool]:
    """(span route, perp3 route) for "A is dense in B modulo constants"."""
    if not span_contains(with_constant(B, sp), A, sp, tol):
        raise PreconditionViolation("A is not contained in B modulo constants")
    by_span = span_contains(with_constant(A, sp), B, sp, tol)
    by_perp = same_span(perp3_complement(A, sp), perp3_complement(B, sp), sp, tol)
    return by_span, by_perp


def is_dense_mod_constants(A, B, sp: FiniteSpace, tol: float = SPAN_TOL) -> bool:
    """Whether A is dense in B modulo constants, computed two ways.

    Raises OracleInconsistency if the span comparison and the comparison of
    covariance complements disagree.
    """
    by_span, by_perp = dense_mod_constants_routes(A, B, sp, tol)
    if by_span != by_perp:
        raise OracleInconsistency(f"span route says {by_span}, perp3 route says {by_perp}")
    return by_span


def eps_sublevel_probes(H: HilbertSubspace, G: Partition, sp: FiniteSpace, eps: float) -> np.ndarray:
    """Members of the eps-sublevel set of H whose span equals the span of that set.

    Basis functions are shrunk until they fall inside the set; the measurable
    members are appended unchanged.
    """
    if not eps > 0:
        raise InvalidInput("eps must be positive")
    B = np.array(H.basis, dtype=float)
    if B.shape[1] == 0:
        return B
    v = expected_cond_variance(B, G, sp)
    scale = np.where(v < eps, 1.0, np.sqrt(eps / (2.0 * np.where(v > 0, v, 1.0))))
    probes = np.column_stack([B * scale, np.asarray(measurable_subspace(H, G, sp).basis)])
    if not np.all(expected_cond_variance(probes, G, sp) < eps):
        raise OracleInconsistency("rescaled probes fell outside the sublevel set")
    return probes


def eps_sublevel_perp3(H: HilbertSubspace, G: Partition, sp: FiniteSpace, eps: float) -> HilbertSubspace:
    """Covariance complement of ``{f in H : E(var[f|G]) < eps}``."""
    return perp3_complement(eps_sublevel_probes(H, G, sp, eps), sp)


def relative_sublevel_perp3(H: HilbertSubspace, G: Partition, sp: FiniteSpace, eps: float) -> HilbertSubspace:
    """Covariance complement of the scale-free sublevel ``E(var[f|G]) < eps var(f)``.

    The plain sublevel set is star-shaped and spans all of H for every
    eps > 0; normalising by var(f) gives a reading that does depend on eps.
    """
    if not eps > 0:
        raise InvalidInput("eps must be positive")
    if H.dim == 0:
        return HilbertSubspace.full(sp)
    U, _ = _whiten(H, sp)
    s = np.sqrt(sp.pmf)
    R = U - block_projector(G, sp) @ U
    Q = R.T @ R
    Uc = U - np.outer(s, s @ U)
    V = Uc.T @ Uc
    lam, E = np.linalg.eigh(0.5 * (V + V.T))
    pos = lam > RANK_RTOL * max(lam.max(), 1.0)
    members = [U @ E[:, ~pos]]
    if pos.any():
        T = E[:, pos] / np.sqrt(lam[pos])
        mu, W = np.linalg.eigh(0.5 * (T.T @ Q @ T + (T.T @ Q @ T).T))
        members.append(U @ (T @ W[:, mu < eps]))
    return perp3_complement(sp.unembed(np.column_stack(members)), sp)
