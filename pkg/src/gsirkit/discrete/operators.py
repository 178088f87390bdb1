"""Exact population covariance and regression operators on finite spaces."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ..errors import AssumptionViolation, InvalidInput
from ..linalg import column_space_projection, generalized_sym_eig, mp_pinv, numerical_rank
from .space import FiniteSpace, HilbertSubspace, JointModel, Partition

ROW_TOL = 1e-10
NOISE_RTOL = 1e-12


@dataclass(frozen=True)
class PopulationOperators:
    """Coordinate matrices of the covariance operators and mean elements.

    Each operator is expressed in the basis coordinates of its domain and
    codomain, so for example ``sxy`` is ``k_x x k_y`` and maps H_Y
    coordinates to H_X coordinates.
    """

    hx: HilbertSubspace
    hy: HilbertSubspace
    sxx: np.ndarray
    sxy: np.ndarray
    syx: np.ndarray
    syy: np.ndarray
    mu_x: np.ndarray
    mu_y: np.ndarray


def population_operators(jm: JointModel, hx: HilbertSubspace, hy: HilbertSubspace) -> PopulationOperators:
    """Riesz representers of the covariance forms, e.g. <f, Sxx g>_H = cov[f(X), g(X)]."""
    if hx.m != jm.m_x or hy.m != jm.m_y:
        raise InvalidInput("subspaces do not live on the joint model's atoms")
    px, py, P = jm.p_x, jm.p_y, jm.joint
    Bx, By = np.asarray(hx.basis), np.asarray(hy.basis)
    cxx = Bx.T @ (np.diag(px) - np.outer(px, px)) @ Bx
    cyy = By.T @ (np.diag(py) - np.outer(py, py)) @ By
    cxy = Bx.T @ (P - np.outer(px, py)) @ By
    Mx, My = np.asarray(hx.metric), np.asarray(hy.metric)

    def solve(M, R):
        if M.shape[0] == 0:
            return np.zeros((0, R.shape[1]))
        return sla.solve(M, R, assume_a="pos")

    return PopulationOperators(
        hx=hx,
        hy=hy,
        sxx=solve(Mx, cxx),
        sxy=solve(Mx, cxy),
        syx=solve(My, cxy.T),
        syy=solve(My, cyy),
        mu_x=solve(Mx, (Bx.T @ px)[:, None])[:, 0],
        mu_y=solve(My, (By.T @ py)[:, None])[:, 0],
    )


def _metric_factor(M: np.ndarray) -> np.ndarray:
    if M.shape[0] == 0:
        return M
    return np.linalg.cholesky(0.5 * (M + M.T))


def orthonormal_coordinates(ops: PopulationOperators) -> tuple[np.ndarray, np.ndarray]:
    """Return Sxx and Sxy in coordinates orthonormal for the H_X / H_Y metrics.

    In these coordinates Sxx is a symmetric matrix and the Euclidean
    pseudoinverse coincides with the Moore-Penrose inverse in H_X.
    """
    Lx = _metric_factor(np.asarray(ops.hx.metric))
    Ly = _metric_factor(np.asarray(ops.hy.metric))
    sxx = Lx.T @ ops.sxx @ np.linalg.inv(Lx).T
    sxy = Lx.T @ ops.sxy @ np.linalg.inv(Ly).T
    return 0.5 * (sxx + sxx.T), sxy


def check_range_inclusion(A, B, tol: float = 1e-8) -> bool:
    """ran(A) within ran(B): each column of A survives projection onto ran(B).

    Columns negligible against the scale of B count as zero.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[0] != B.shape[0]:
        raise InvalidInput("A and B must share a codomain")
    if A.size == 0:
        return True
    P = column_space_projection(B) if B.size else np.zeros((A.shape[0], A.shape[0]))
    norms = np.linalg.norm(A, axis=0)
    floor = 1e-12 * max(float(np.linalg.norm(B)), 1.0)
    resid = np.linalg.norm(A - P @ A, axis=0)
    return bool(np.all((norms <= floor) | (resid <= tol * norms)))


def _drop_noise(sxy: np.ndarray, sxx: np.ndarray, syy: np.ndarray, rtol: float = NOISE_RTOL) -> np.ndarray:
    """Zero singular values of Sxy below rtol * sqrt(|Sxx| |Syy|).

    By Cauchy-Schwarz that product bounds every covariance, so anything
    smaller is rounding left over from an exactly zero cross-covariance.
    """
    if sxy.size == 0:
        return sxy
    U, s, Vt = np.linalg.svd(sxy, full_matrices=False)
    floor = rtol * np.sqrt(np.linalg.norm(sxx, 2) * np.linalg.norm(syy, 2))
    s = np.where(s > floor, s, 0.0)
    return (U * s) @ Vt


def population_regression_operator(ops: PopulationOperators, tol: float = 1e-10, range_tol: float = 1e-8) -> np.ndarray:
    """R_XY = pinv(Sxx) Sxy as a ``k_x x k_y`` coordinate matrix.

    Raises AssumptionViolation when ran(Sxy) is not inside ran(Sxx).
    """
    sxx, sxy = orthonormal_coordinates(ops)
    Lx = _metric_factor(np.asarray(ops.hx.metric))
    Ly = _metric_factor(np.asarray(ops.hy.metric))
    sxy = _drop_noise(sxy, sxx, Ly.T @ ops.syy @ np.linalg.inv(Ly).T)
    if not check_range_inclusion(sxy, sxx, range_tol):
        raise AssumptionViolation("range assumption violated: ran(Sigma_XY) is not contained in ran(Sigma_XX)")
    r = mp_pinv(sxx, tol) @ sxy
    return np.linalg.inv(Lx).T @ r @ Ly.T


def regression_range_functions(jm: JointModel, hx: HilbertSubspace, hy: HilbertSubspace, tol: float = 1e-10) -> np.ndarray:
    """Columns ``f = B_x R e_j``: the functions spanning ran(R_XY)."""
    R = population_regression_operator(population_operators(jm, hx, hy), tol)
    return np.asarray(hx.basis) @ R


def central_partition(jm: JointModel, tol: float = ROW_TOL) -> Partition:
    """Coarsest partition of X-atoms on which P(Y | X) is constant."""
    rows = jm.y_given_x()
    reps: list[int] = []
    labels = np.empty(jm.m_x, dtype=int)
    for i in range(jm.m_x):
        for j, r in enumerate(reps):
            if np.abs(rows[i] - rows[r]).max() <= tol:
                labels[i] = j
                break
        else:
            labels[i] = len(reps)
            reps.append(i)
    return Partition.from_labels(labels)


def block_given_y(jm: JointModel, G: Partition) -> np.ndarray:
    """``m_y x |G|`` matrix of P(X in block | Y = y)."""
    if G.m != jm.m_x:
        raise InvalidInput("partition must cover the X atoms")
    return jm.x_given_y().T @ G.indicators()


def is_complete(jm: JointModel, G: Partition, tol: float = 1e-10) -> bool:
    """Whether E[f(X)|Y] constant forces f constant for G-measurable f.

    With block coefficients c, E[f(X)|Y] = A c; completeness means the only
    solutions of ``A c = const`` are constant c, i.e. rank [A, 1] = |G|.
    """
    A = block_given_y(jm, G)
    M = np.column_stack([A, np.ones(jm.m_y)])
    return numerical_rank(M, tol) == len(G)


def check_norm_domination(H: HilbertSubspace, sp: FiniteSpace) -> float:
    """Smallest C with ||f||_L2 <= C ||f||_H on H."""
    if H.dim == 0:
        return 0.0
    L = sp.l2_gram(np.asarray(H.basis))
    res = generalized_sym_eig(0.5 * (L + L.T), np.asarray(H.metric))
    return float(np.sqrt(max(res.eigenvalues[0], 0.0)))
