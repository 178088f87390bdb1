"""Ridge selection by K-fold cross-validation on held-out dependence."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidInput
from .gsir import KernelSpec, evaluate_predictors, gsir_fit
from .synth import Dataset


def _double_centered(A: np.ndarray) -> np.ndarray:
    D = cdist(A, A)
    return D - D.mean(axis=0) - D.mean(axis=1)[:, None] + D.mean()


def distance_correlation(A, B) -> float:
    """Sample distance correlation (V-statistic form) between row-aligned samples."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    A = A[:, None] if A.ndim == 1 else A
    B = B[:, None] if B.ndim == 1 else B
    if A.shape[0] != B.shape[0]:
        raise InvalidInput("samples must be row-aligned")
    a, b = _double_centered(A), _double_centered(B)
    dcov2 = (a * b).mean()
    denom = np.sqrt((a * a).mean() * (b * b).mean())
    if denom <= 0:
        return 0.0
    return float(np.sqrt(max(dcov2, 0.0) / denom))


@dataclass(frozen=True)
class CvResult:
    grid: list
    scores: list
    selected: float

    def to_json(self) -> dict:
        return {"eta_grid": self.grid, "mean_distance_correlation": self.scores, "selected_eta": self.selected, "folds": FOLDS}


FOLDS = 5


def cv_select_eta(
    data: Dataset,
    grid,
    kx: KernelSpec | None = None,
    ky: KernelSpec | None = None,
    d: int = 1,
    seed: int = 0,
    jitter: float = 1e-9,
) -> CvResult:
    """Pick eta (shared by X and Y) maximising mean held-out dcor(predictors, Y).

    Folds come from one permutation drawn with ``default_rng(seed)``; kernels
    are resolved on the full data so every fold uses the same bandwidth.
    Ties keep the earliest grid value.
    """
    grid = [float(e) for e in grid]
    if not grid or any(e <= 0 for e in grid):
        raise InvalidInput("eta grid must be nonempty and positive")
    if data.n < 2 * FOLDS:
        raise InvalidInput(f"need at least {2 * FOLDS} rows for {FOLDS}-fold selection")
    kx = (kx or KernelSpec.gaussian()).resolved(data.X)
    ky = (ky or KernelSpec.gaussian()).resolved(data.Y)
    folds = np.array_split(np.random.default_rng(seed).permutation(data.n), FOLDS)
    scores = []
    for eta in grid:
        vals = []
        for k in range(FOLDS):
            test = folds[k]
            train = np.concatenate([folds[j] for j in range(FOLDS) if j != k])
            model = gsir_fit(Dataset(data.X[train], data.Y[train]), kx, ky, eta, eta, min(d, train.size - 1), jitter)
            vals.append(distance_correlation(evaluate_predictors(model, data.X[test]), data.Y[test]))
        scores.append(float(np.mean(vals)))
    return CvResult(grid, scores, grid[int(np.argmax(scores))])
