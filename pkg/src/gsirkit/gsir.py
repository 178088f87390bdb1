"""Kernel estimator of the regression-operator range.

The fit works in sample coordinates.  A function ``f = sum_i a_i k~(., x_i)``
built from centred kernel sections has in-sample values ``G_X a`` and squared
RKHS norm ``a' G_X a``.  With ridge shifts ``c_X = n eta_X``, ``c_Y = n eta_Y``::

    D = G_X (G_X + c_X I)^-1        E = G_Y (G_Y + c_Y I)^-1

the ridge-regularised candidate operator
``(Sxx + eta)^-1 Sxy (Syy + eta)^-1 Syx (Sxx + eta)^-1`` has Rayleigh quotient
``n a' D E D a / a' G_X a`` in the RKHS norm, so the fit solves

    (D E D) a = lam (G_X + jitter I) a

and keeps the top d eigenvectors as coefficient columns.  Since ``E`` is a
contraction and ``s / (s + c)^2 <= 1 / (4c)``, every eigenvalue lies in
``[0, 1 / (4 n eta_X)]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidInput, InvalidSpec
from .linalg import generalized_sym_eig, ridge_solve
from .synth import Dataset

FORMAT_VERSION = "gsir-model/1"
DEFAULT_ETA = 1e-2
DEFAULT_JITTER = 1e-9
MEDIAN_PAIRS = 1000
MEDIAN_SEED = 0


@dataclass(frozen=True)
class KernelSpec:
    family: str = "gaussian"
    bandwidth: float | None = None
    degree: int = 2
    offset: float = 1.0

    def __post_init__(self):
        if self.family not in ("gaussian", "polynomial", "linear"):
            raise InvalidSpec(f"unknown kernel family {self.family!r}")
        if self.family == "gaussian" and self.bandwidth is not None and not self.bandwidth > 0:
            raise InvalidSpec("gaussian bandwidth must be positive")
        if self.family == "polynomial":
            if int(self.degree) != self.degree or self.degree < 1:
                raise InvalidSpec("polynomial degree must be a positive integer")
            if self.offset < 0:
                raise InvalidSpec("polynomial offset must be non-negative")

    @classmethod
    def gaussian(cls, bandwidth: float | None = None) -> KernelSpec:
        return cls("gaussian", bandwidth)

    @classmethod
    def linear(cls) -> KernelSpec:
        return cls("linear")

    @classmethod
    def polynomial(cls, degree: int = 2, offset: float = 1.0) -> KernelSpec:
        return cls("polynomial", None, degree, offset)

    def resolved(self, A) -> KernelSpec:
        """Fill a missing gaussian bandwidth with the median heuristic on A."""
        if self.family == "gaussian" and self.bandwidth is None:
            return KernelSpec("gaussian", median_bandwidth(A))
        return self

    def to_json(self) -> dict:
        if self.family == "gaussian":
            return {"family": "gaussian", "bandwidth": self.bandwidth}
        if self.family == "polynomial":
            return {"family": "polynomial", "degree": int(self.degree), "offset": float(self.offset)}
        return {"family": "linear"}

    @classmethod
    def from_json(cls, obj: dict) -> KernelSpec:
        family = obj.get("family", "gaussian")
        if family == "gaussian":
            return cls("gaussian", obj.get("bandwidth"))
        if family == "polynomial":
            return cls("polynomial", None, int(obj.get("degree", 2)), float(obj.get("offset", 1.0)))
        return cls(family)


def _as_points(A, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise InvalidInput(f"{name} must be a matrix of points")
    if not np.all(np.isfinite(A)):
        raise InvalidInput(f"{name} contains non-finite values")
    return A


def median_bandwidth(A, max_pairs: int = MEDIAN_PAIRS, seed: int = MEDIAN_SEED) -> float:
    """Median Euclidean distance over at most ``max_pairs`` distinct-index pairs."""
    A = _as_points(A, "A")
    n = A.shape[0]
    if n < 2:
        return 1.0
    iu, ju = np.triu_indices(n, 1)
    if iu.size > max_pairs:
        pick = np.random.default_rng(seed).choice(iu.size, size=max_pairs, replace=False)
        iu, ju = iu[pick], ju[pick]
    d = np.linalg.norm(A[iu] - A[ju], axis=1)
    d = d[d > 0]
    return float(np.median(d)) if d.size else 1.0


def gram(k: KernelSpec, A, B=None) -> np.ndarray:
    """Kernel matrix ``[k(a_i, b_j)]``; gaussian uses exp(-|a-b|^2 / (2 s^2))."""
    A = _as_points(A, "A")
    B = A if B is None else _as_points(B, "B")
    if A.shape[1] != B.shape[1]:
        raise InvalidInput(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if k.family == "gaussian":
        if k.bandwidth is None:
            raise InvalidSpec("gaussian bandwidth unresolved; call KernelSpec.resolved first")
        return np.exp(-cdist(A, B, "sqeuclidean") / (2.0 * k.bandwidth**2))
    inner = A @ B.T
    if k.family == "linear":
        return inner
    return (inner + k.offset) ** int(k.degree)


def center_gram(K) -> np.ndarray:
    """``Q K Q`` with ``Q = I - 11'/n``."""
    K = np.asarray(K, dtype=float)
    Kc = K - K.mean(axis=0, keepdims=True)
    Kc = Kc - Kc.mean(axis=1, keepdims=True)
    return 0.5 * (Kc + Kc.T)


def norm_domination_constant(k: KernelSpec, X) -> float:
    """sqrt of the sample mean of k(x_i, x_i)."""
    X = _as_points(X, "X")
    k = k.resolved(X)
    diag = np.array([gram(k, X[i : i + 1])[0, 0] for i in range(X.shape[0])])
    return float(np.sqrt(diag.mean()))


@dataclass(frozen=True)
class GsirModel:
    train_X: np.ndarray
    kernel_x: KernelSpec
    kernel_y: KernelSpec
    eta_x: float
    eta_y: float
    coeffs: np.ndarray
    eigenvalues: np.ndarray
    jitter: float = DEFAULT_JITTER
    # a' D E D a / a' D a per component: squared regularised canonical
    # correlation with H_Y, scale-free and in [0, 1]
    canonical: np.ndarray = field(default_factory=lambda: np.zeros(0))
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def d(self) -> int:
        return self.coeffs.shape[1]

    @property
    def n(self) -> int:
        return self.train_X.shape[0]

    def to_json(self) -> dict:
        out = {
            "format": FORMAT_VERSION,
            "kernel_x": self.kernel_x.to_json(),
            "kernel_y": self.kernel_y.to_json(),
            "eta_x": float(self.eta_x),
            "eta_y": float(self.eta_y),
            "jitter": float(self.jitter),
            "train_X": {"shape": list(self.train_X.shape), "data": self.train_X.ravel().tolist()},
            "coeffs": {"shape": list(self.coeffs.shape), "data": self.coeffs.ravel().tolist()},
            "eigenvalues": self.eigenvalues.tolist(),
            "canonical": self.canonical.tolist(),
        }
        if self.extra:
            out["extra"] = self.extra
        return out

    @classmethod
    def from_json(cls, obj: dict) -> GsirModel:
        if obj.get("format") != FORMAT_VERSION:
            raise InvalidInput(f"unsupported model format {obj.get('format')!r}")

        def mat(o):
            return np.asarray(o["data"], dtype=float).reshape(o["shape"])

        return cls(
            train_X=mat(obj["train_X"]),
            kernel_x=KernelSpec.from_json(obj["kernel_x"]),
            kernel_y=KernelSpec.from_json(obj["kernel_y"]),
            eta_x=float(obj["eta_x"]),
            eta_y=float(obj["eta_y"]),
            coeffs=mat(obj["coeffs"]),
            eigenvalues=np.asarray(obj["eigenvalues"], dtype=float),
            jitter=float(obj.get("jitter", DEFAULT_JITTER)),
            canonical=np.asarray(obj.get("canonical", []), dtype=float),
            extra=obj.get("extra", {}),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> GsirModel:
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def ridge_contraction(G: np.ndarray, c: float) -> np.ndarray:
    """``G (G + c I)^-1``, symmetrised."""
    D = ridge_solve(G, c, G)
    return 0.5 * (D + D.T)


def gsir_fit(
    data: Dataset,
    kx: KernelSpec | None = None,
    ky: KernelSpec | None = None,
    eta_x: float = DEFAULT_ETA,
    eta_y: float = DEFAULT_ETA,
    d: int = 1,
    jitter: float = DEFAULT_JITTER,
) -> GsirModel:
    """Fit d predictors spanning the estimated central class."""
    n = data.n
    if not (eta_x > 0 and eta_y > 0):
        raise InvalidInput("ridge parameters must be positive")
    if not 1 <= d < n:
        raise InvalidInput(f"need 1 <= d < n, got d={d}, n={n}")
    kx = (kx or KernelSpec.gaussian()).resolved(data.X)
    ky = (ky or KernelSpec.gaussian()).resolved(data.Y)
    gx = center_gram(gram(kx, data.X))
    gy = center_gram(gram(ky, data.Y))
    cx, cy = n * eta_x, n * eta_y
    D = ridge_contraction(gx, cx)
    E = ridge_contraction(gy, cy)
    A = D @ E @ D
    res = generalized_sym_eig(0.5 * (A + A.T), gx, jitter)
    alpha = res.eigenvectors[:, :d].copy()
    num = np.einsum("ij,ij->j", alpha, A @ alpha)
    den = np.einsum("ij,ij->j", alpha, D @ alpha)
    canonical = np.clip(np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0), 0.0, 1.0)
    alpha -= alpha.mean(axis=0, keepdims=True)
    values = gx @ alpha
    sd = values.std(axis=0)
    scale = np.where(sd > 1e-12 * max(1.0, float(np.abs(values).max(initial=0.0))), sd, 1.0)
    alpha = alpha / scale
    signs = np.sign(alpha[np.abs(alpha).argmax(axis=0), np.arange(d)])
    alpha = alpha * np.where(signs == 0, 1.0, signs)
    lam = np.clip(res.eigenvalues[:d], 0.0, None)
    return GsirModel(np.array(data.X), kx, ky, float(eta_x), float(eta_y), alpha, lam, float(jitter), canonical)


def evaluate_predictors(model: GsirModel, newX) -> np.ndarray:
    """Fitted predictors at new inputs, centred by their training means."""
    newX = _as_points(newX, "newX")
    if newX.shape[1] != model.train_X.shape[1]:
        raise InvalidInput(f"newX has {newX.shape[1]} columns, model expects {model.train_X.shape[1]}")
    K_new = gram(model.kernel_x, newX, model.train_X)
    K_tr = gram(model.kernel_x, model.train_X)
    row_center = lambda K: K - K.mean(axis=1, keepdims=True)  # noqa: E731
    train_mean = (row_center(K_tr) @ model.coeffs).mean(axis=0)
    return row_center(K_new) @ model.coeffs - train_mean
