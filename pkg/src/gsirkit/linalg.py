"""Dense linear algebra shared by the exact oracle and the sample estimator.

All routines take and return ``numpy.ndarray`` objects and never mutate
their inputs.  Rank decisions use a singular-value cutoff relative to the
largest singular value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InvalidInput, NotPositiveDefinite

DEFAULT_RTOL = 1e-10
SYM_TOL = 1e-10
PSD_CLIP = 1e-10


@dataclass(frozen=True)
class EigResult:
    """Eigenpairs sorted by descending eigenvalue."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(A, name: str = "A") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise InvalidInput(f"{name} must be two-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return A


def _check_symmetric(A: np.ndarray, name: str) -> None:
    if A.shape[0] != A.shape[1]:
        raise InvalidInput(f"{name} must be square, got {A.shape}")
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if np.abs(A - A.T).max(initial=0.0) > SYM_TOL * scale:
        raise InvalidInput(f"{name} is not symmetric")


def mp_pinv(A, tol: float = DEFAULT_RTOL) -> np.ndarray:
    """Moore-Penrose inverse through the thin SVD.

    Singular values at or below ``tol * sigma_max`` are treated as zero.
    """
    A = as_matrix(A)
    if tol < 0:
        raise InvalidInput("tol must be non-negative")
    if A.size == 0:
        return np.zeros((A.shape[1], A.shape[0]))
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    smax = s[0] if s.size else 0.0
    keep = s > tol * smax
    if smax == 0.0:
        keep[:] = False
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (Vt.T * inv) @ U.T


def range_projection(A, tol: float = DEFAULT_RTOL) -> np.ndarray:
    """Return ``pinv(A) @ A``, the orthogonal projector onto the row space of A."""
    A = as_matrix(A)
    if tol < 0:
        raise InvalidInput("tol must be non-negative")
    P = mp_pinv(A, tol) @ A
    return 0.5 * (P + P.T)


def column_space_projection(A, tol: float = DEFAULT_RTOL) -> np.ndarray:
    """Return ``A @ pinv(A)``, the orthogonal projector onto ran(A)."""
    A = as_matrix(A)
    P = A @ mp_pinv(A, tol)
    return 0.5 * (P + P.T)


def numerical_rank(A, tol: float = DEFAULT_RTOL) -> int:
    A = as_matrix(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def null_space(A, tol: float = DEFAULT_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of ker(A)."""
    A = as_matrix(A)
    n = A.shape[1]
    if A.shape[0] == 0 or n == 0:
        return np.eye(n)
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return Vt[rank:].T.copy()


def orthonormal_basis(A, tol: float = DEFAULT_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of ran(A)."""
    A = as_matrix(A)
    if A.size == 0:
        return np.zeros((A.shape[0], 0))
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((A.shape[0], 0))
    return U[:, s > tol * s[0]].copy()


def gram_schmidt_basis(A, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of ran(A) by modified Gram-Schmidt with re-orthogonalisation.

    Deliberately SVD-free so it can serve as an independent check of
    :func:`range_projection`.
    """
    A = as_matrix(A)
    scale = max(float(np.linalg.norm(A, axis=0).max(initial=0.0)), np.finfo(float).tiny)
    basis: list[np.ndarray] = []
    for j in range(A.shape[1]):
        v = A[:, j].copy()
        for _ in range(2):
            for q in basis:
                v -= (q @ v) * q
        norm = np.linalg.norm(v)
        if norm > tol * scale:
            basis.append(v / norm)
    if not basis:
        return np.zeros((A.shape[0], 0))
    return np.column_stack(basis)


def _cholesky(B: np.ndarray, hint: str) -> np.ndarray:
    try:
        return np.linalg.cholesky(B)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"matrix is not positive definite; {hint}") from exc


def generalized_sym_eig(A, B, jitter: float = 0.0) -> EigResult:
    """Solve ``A v = lam (B + jitter I) v`` by Cholesky reduction.

    Eigenvectors are normalised so that ``v.T (B + jitter I) v = 1``.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    _check_symmetric(A, "A")
    _check_symmetric(B, "B")
    if A.shape != B.shape:
        raise InvalidInput(f"shape mismatch {A.shape} vs {B.shape}")
    if jitter < 0:
        raise InvalidInput("jitter must be non-negative")
    Bj = 0.5 * (B + B.T) + jitter * np.eye(B.shape[0])
    L = _cholesky(Bj, "increase jitter")
    C = sla.solve_triangular(L, A, lower=True)
    C = sla.solve_triangular(L, C.T, lower=True)
    C = 0.5 * (C + C.T)
    w, W = np.linalg.eigh(C)
    V = sla.solve_triangular(L.T, W, lower=False)
    order = np.argsort(-w, kind="stable")
    return EigResult(w[order], V[:, order])


def ridge_solve(M, lam: float, RHS) -> np.ndarray:
    """Return ``(M + lam I)^{-1} RHS`` via Cholesky."""
    if not lam > 0:
        raise InvalidInput("lambda must be positive")
    M = as_matrix(M, "M")
    RHS = np.asarray(RHS, dtype=float)
    _check_symmetric(M, "M")
    if RHS.shape[0] != M.shape[0]:
        raise InvalidInput("RHS row count does not match M")
    factor = sla.cho_factor(0.5 * (M + M.T) + lam * np.eye(M.shape[0]), lower=True)
    return sla.cho_solve(factor, RHS)


def psd_sqrt(M) -> np.ndarray:
    """Symmetric square root of a PSD matrix; tiny negative eigenvalues are clipped."""
    M = as_matrix(M, "M")
    _check_symmetric(M, "M")
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    norm = max(float(np.abs(w).max(initial=0.0)), 0.0)
    if w.size and w.min() < -PSD_CLIP * norm:
        raise InvalidInput(f"matrix is indefinite (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    S = (V * np.sqrt(w)) @ V.T
    return 0.5 * (S + S.T)
