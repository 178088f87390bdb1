"""Sample-level checks of fitted predictors against a known reduction."""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInput
from .gsir import GsirModel, evaluate_predictors
from .synth import Dataset

RANK_TOL = 1e-10


class DegenerateConditioning(UserWarning):
    """The conditioning variable carries no information."""


def default_slices(n: int) -> int:
    return max(5, math.floor(math.sqrt(n) / 2))


def default_slices_2d(n: int) -> int:
    # per-axis count for product cells; keeps roughly sqrt(n) points per cell
    return max(3, math.floor(n**0.25))


def default_k(n: int) -> int:
    return max(10, n // 50)


def _fvals(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim != 1:
        raise InvalidInput("fvals must be a vector")
    if not np.all(np.isfinite(f)):
        raise InvalidInput("fvals contains non-finite values")
    return f


def _gvals(g, n: int) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    g = g[:, None] if g.ndim == 1 else g
    if g.ndim != 2 or g.shape[0] != n:
        raise InvalidInput(f"gvals must have {n} rows")
    if not np.all(np.isfinite(g)):
        raise InvalidInput("gvals contains non-finite values")
    return g


def _quantile_labels(x: np.ndarray, s: int) -> np.ndarray:
    edges = np.quantile(x, np.linspace(0.0, 1.0, s + 1)[1:-1])
    return np.searchsorted(edges, x, side="right")


@dataclass(frozen=True)
class SliceStats:
    """Per-cell summary of a sliced conditional-variance estimate."""

    value: float
    slices_requested: int
    slices_used: int
    labels: np.ndarray
    counts: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    @property
    def reduced(self) -> bool:
        return self.slices_used < self.slices_requested


def sliced_cond_variance_detail(fvals, gvals, slices: int) -> SliceStats:
    f = _fvals(fvals)
    g = _gvals(gvals, f.size)
    n, r = g.shape
    if r > 2:
        raise InvalidInput("sliced estimate supports r <= 2; use knn_cond_variance for higher dimensions")
    if slices < 2 or n < 2 * slices:
        raise InvalidInput(f"need slices >= 2 and n >= 2*slices, got slices={slices}, n={n}")
    s = slices
    while True:
        if r == 1:
            labels = _quantile_labels(g[:, 0], s)
            n_cells = s
        else:
            labels = _quantile_labels(g[:, 0], s) * s + _quantile_labels(g[:, 1], s)
            n_cells = s * s
        counts = np.bincount(labels, minlength=n_cells)
        if np.all(counts > 0) or s == 1:
            break
        s -= 1
    sums = np.bincount(labels, weights=f, minlength=n_cells)
    means = sums / counts
    sq = np.bincount(labels, weights=(f - means[labels]) ** 2, minlength=n_cells)
    variances = sq / counts
    value = float(sq.sum() / n)
    return SliceStats(value, slices, s, labels, counts, means, variances)


def sliced_cond_variance(fvals, gvals, slices: int) -> float:
    """Probability-weighted within-cell variance of f over quantile cells of g.

    r = 1 uses ``slices`` quantile slices; r = 2 uses the product of
    ``slices`` quantile slices per coordinate.  Empty cells (from ties) make
    the slice count drop until every cell is occupied.
    """
    return sliced_cond_variance_detail(fvals, gvals, slices).value


@dataclass(frozen=True)
class KnnStats:
    value: float
    k: int
    degenerate: bool


def knn_cond_variance_detail(fvals, gvals, k: int) -> KnnStats:
    f = _fvals(fvals)
    g = _gvals(gvals, f.size)
    n = f.size
    if not 2 <= k <= n / 2:
        raise InvalidInput(f"need 2 <= k <= n/2, got k={k}, n={n}")
    if np.all(np.ptp(g, axis=0) == 0):
        warnings.warn("all conditioning values are equal; returning var(f)", DegenerateConditioning, stacklevel=3)
        return KnnStats(float(f.var()), k, True)
    _, idx = cKDTree(g).query(g, k=k)
    local = f[idx].var(axis=1, ddof=1)
    return KnnStats(float(local.mean()), k, False)


def knn_cond_variance(fvals, gvals, k: int) -> float:
    """Mean over i of the variance of f across the k nearest neighbours of g_i (self included)."""
    return knn_cond_variance_detail(fvals, gvals, k).value


@dataclass(frozen=True)
class AlignmentResult:
    correlations: np.ndarray
    rank_est: int
    rank_truth: int
    rank_deficient: bool


def _centered_basis(A: np.ndarray) -> np.ndarray:
    A = A - A.mean(axis=0, keepdims=True)
    if A.size == 0:
        return A
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    return U[:, s > RANK_TOL * s[0]]


def alignment_detail(est, truth) -> AlignmentResult:
    est = np.asarray(est, dtype=float)
    truth = np.asarray(truth, dtype=float)
    est = est[:, None] if est.ndim == 1 else est
    truth = truth[:, None] if truth.ndim == 1 else truth
    if est.ndim != 2 or truth.ndim != 2 or est.shape[0] != truth.shape[0]:
        raise InvalidInput("est and truth must be row-aligned matrices")
    t, d = est.shape
    s = truth.shape[1]
    if t <= d + s:
        raise InvalidInput(f"need more rows than d + s = {d + s}")
    if not (np.all(np.isfinite(est)) and np.all(np.isfinite(truth))):
        raise InvalidInput("non-finite values in alignment input")
    Qa, Qb = _centered_basis(est), _centered_basis(truth)
    k = min(d, s)
    cc = np.zeros(k)
    if Qa.shape[1] and Qb.shape[1]:
        sv = np.linalg.svd(Qa.T @ Qb, compute_uv=False)
        m = min(k, sv.size)
        cc[:m] = np.clip(sv[:m], 0.0, 1.0)
    return AlignmentResult(cc, Qa.shape[1], Qb.shape[1], Qa.shape[1] < d or Qb.shape[1] < s)


def alignment(est, truth) -> np.ndarray:
    """Canonical correlations between two column spans, descending."""
    return alignment_detail(est, truth).correlations


@dataclass(frozen=True)
class DiagnosticsConfig:
    ratio_threshold: float = 0.2
    alignment_threshold: float = 0.9
    # on the leading squared regularised canonical correlation
    null_threshold: float = 0.06
    slices: int | None = None
    knn_k: int | None = None

    def __post_init__(self):
        if not 0 < self.ratio_threshold:
            raise InvalidInput("ratio_threshold must be positive")
        if not 0 < self.alignment_threshold <= 1:
            raise InvalidInput("alignment_threshold must lie in (0, 1]")
        if not 0 <= self.null_threshold <= 1:
            raise InvalidInput("null_threshold must lie in [0, 1]")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> DiagnosticsConfig:
        keys = ("ratio_threshold", "alignment_threshold", "null_threshold", "slices", "knn_k")
        return cls(**{k: obj[k] for k in keys if k in obj})


@dataclass(frozen=True)
class DiagnosticsReport:
    eps_ratios: np.ndarray
    alignment: np.ndarray
    spectrum: np.ndarray
    canonical: np.ndarray
    verdicts: dict
    method: str
    method_params: dict
    config: DiagnosticsConfig
    notes: list = field(default_factory=list)
    slice_stats: list = field(default_factory=list, compare=False)

    @property
    def passed(self) -> bool:
        return bool(self.verdicts.get("unbiased_at_sample_scale")) and bool(self.verdicts.get("aligned"))

    def to_json(self) -> dict:
        return {
            "eps_ratios": self.eps_ratios.tolist(),
            "alignment": self.alignment.tolist(),
            "spectrum": self.spectrum.tolist(),
            "canonical": self.canonical.tolist(),
            "verdicts": dict(self.verdicts),
            "method": self.method,
            "method_params": dict(self.method_params),
            "thresholds": self.config.to_json(),
            "notes": list(self.notes),
        }

    def slices_csv(self) -> str:
        """Per-cell statistics: predictor, cell, count, mean, variance."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["predictor", "cell", "count", "mean", "variance"])
        for j, st in enumerate(self.slice_stats):
            for c in range(st.counts.size):
                w.writerow([j + 1, c, int(st.counts[c]), repr(float(st.means[c])), repr(float(st.variances[c]))])
        return buf.getvalue()


def unbiasedness_report(
    model: GsirModel,
    data: Dataset,
    true_reduction,
    cfg: DiagnosticsConfig | None = None,
) -> DiagnosticsReport:
    """eps-ratios of each fitted predictor given the true reduction, plus span alignment."""
    cfg = cfg or DiagnosticsConfig()
    truth = np.asarray(true_reduction, dtype=float)
    truth = truth[:, None] if truth.ndim == 1 else truth
    if truth.ndim != 2 or truth.shape[0] != data.n:
        raise InvalidInput(f"true_reduction must have {data.n} rows, got {truth.shape[0]}")
    F = evaluate_predictors(model, data.X)
    n, r = truth.shape
    notes: list[str] = []
    stats: list[SliceStats] = []
    ratios = np.zeros(F.shape[1])
    if r <= 2:
        method = "sliced"
        slices = cfg.slices or (default_slices(n) if r == 1 else default_slices_2d(n))
        params = {"slices": slices}
        for j in range(F.shape[1]):
            st = sliced_cond_variance_detail(F[:, j], truth, slices)
            stats.append(st)
            if st.reduced:
                notes.append(f"predictor {j + 1}: slice count reduced from {slices} to {st.slices_used}")
            v = F[:, j].var()
            ratios[j] = st.value / v if v > 0 else 0.0
    else:
        method = "knn"
        k = cfg.knn_k or default_k(n)
        params = {"k": k}
        for j in range(F.shape[1]):
            ks = knn_cond_variance_detail(F[:, j], truth, k)
            if ks.degenerate:
                notes.append(f"predictor {j + 1}: degenerate conditioning values")
            v = F[:, j].var(ddof=1)
            ratios[j] = ks.value / v if v > 0 else 0.0
    al = alignment_detail(F, truth)
    if al.rank_deficient:
        notes.append(f"alignment computed on effective ranks {al.rank_est} and {al.rank_truth}")
    canonical = np.asarray(model.canonical, dtype=float)
    null = bool(canonical.size == 0 or canonical[0] < cfg.null_threshold)
    verdicts: dict = {"spectrum_null": null}
    if null:
        notes.append("spectrum indistinguishable from noise; recovery verdicts not issued")
        verdicts["unbiased_at_sample_scale"] = None
        verdicts["aligned"] = None
    else:
        verdicts["unbiased_at_sample_scale"] = bool(np.all(ratios < cfg.ratio_threshold))
        verdicts["aligned"] = bool(al.correlations.size > 0 and al.correlations[0] >= cfg.alignment_threshold)
    return DiagnosticsReport(
        ratios, al.correlations, np.asarray(model.eigenvalues), canonical, verdicts, method, params, cfg, notes, stats
    )
