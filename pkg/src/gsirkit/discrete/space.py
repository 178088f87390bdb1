"""Finite probability spaces, partitions and function subspaces.

Functions on a space with ``m`` atoms are plain length-``m`` arrays.  A
sub-sigma-field is represented by the partition of atoms that generates it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..errors import InvalidInput
from ..linalg import orthonormal_basis

PMF_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FiniteSpace:
    """Atoms with strictly positive probabilities."""

    points: tuple
    pmf: np.ndarray

    def __post_init__(self):
        pmf = _frozen(np.ravel(self.pmf))
        points = tuple(self.points)
        if pmf.size < 1:
            raise InvalidInput("a finite space needs at least one atom")
        if len(points) != pmf.size:
            raise InvalidInput("points and pmf have different lengths")
        if len(set(points)) != len(points):
            raise InvalidInput("atom labels must be distinct")
        if not np.all(np.isfinite(pmf)) or np.any(pmf <= 0):
            raise InvalidInput("probabilities must be strictly positive")
        if abs(pmf.sum() - 1.0) > PMF_TOL:
            raise InvalidInput(f"probabilities sum to {pmf.sum()!r}, not 1")
        object.__setattr__(self, "pmf", pmf)
        object.__setattr__(self, "points", points)

    @classmethod
    def from_pmf(cls, pmf) -> FiniteSpace:
        pmf = np.asarray(pmf, dtype=float)
        return cls(tuple(range(pmf.size)), pmf)

    @classmethod
    def uniform(cls, m: int) -> FiniteSpace:
        return cls.from_pmf(np.full(m, 1.0 / m))

    @property
    def m(self) -> int:
        return self.pmf.size

    def check(self, f, name: str = "f") -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape[0] != self.m:
            raise InvalidInput(f"{name} has {f.shape[0]} rows, space has {self.m} atoms")
        return f

    def mean(self, f) -> np.ndarray:
        return self.pmf @ self.check(f)

    def cov(self, f, g) -> np.ndarray:
        f, g = self.check(f), self.check(g, "g")
        fc = f - self.mean(f)
        gc = g - self.mean(g)
        return (fc.T * self.pmf) @ gc

    def var(self, f) -> float:
        f = self.check(f)
        return float(self.pmf @ (f - self.pmf @ f) ** 2)

    def embed(self, F) -> np.ndarray:
        """Map functions to coordinates in which the L2(P) inner product is Euclidean."""
        F = self.check(F)
        w = np.sqrt(self.pmf)
        return F * (w[:, None] if F.ndim == 2 else w)

    def unembed(self, W) -> np.ndarray:
        W = np.asarray(W, dtype=float)
        w = np.sqrt(self.pmf)
        return W / (w[:, None] if W.ndim == 2 else w)

    def l2_gram(self, F) -> np.ndarray:
        F = self.check(F)
        return (F.T * self.pmf) @ F

    def to_json(self) -> dict:
        return {"points": list(self.points), "pmf": self.pmf.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> FiniteSpace:
        return cls(tuple(obj["points"]), np.asarray(obj["pmf"], dtype=float))


@dataclass(frozen=True)
class Partition:
    """A partition of atom indices ``0..m-1`` into nonempty disjoint blocks.

    Blocks are stored in canonical order (sorted members, blocks ordered by
    their smallest member) so equal partitions compare equal.
    """

    blocks: tuple

    def __post_init__(self):
        blocks = [tuple(sorted(int(i) for i in b)) for b in self.blocks]
        if any(len(b) == 0 for b in blocks):
            raise InvalidInput("partition blocks must be nonempty")
        flat = [i for b in blocks for i in b]
        if sorted(flat) != list(range(len(flat))):
            raise InvalidInput("blocks must be disjoint and cover 0..m-1")
        blocks.sort(key=lambda b: b[0])
        object.__setattr__(self, "blocks", tuple(blocks))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> Partition:
        groups: dict[int, list[int]] = {}
        for i, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(i)
        return cls(tuple(groups.values()))

    @classmethod
    def singletons(cls, m: int) -> Partition:
        return cls(tuple((i,) for i in range(m)))

    @classmethod
    def trivial(cls, m: int) -> Partition:
        return cls((tuple(range(m)),))

    @property
    def m(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def labels(self) -> np.ndarray:
        lab = np.empty(self.m, dtype=int)
        for j, b in enumerate(self.blocks):
            lab[list(b)] = j
        return lab

    def indicators(self) -> np.ndarray:
        """``m x len(self)`` matrix whose columns are block indicators."""
        ind = np.zeros((self.m, len(self.blocks)))
        for j, b in enumerate(self.blocks):
            ind[list(b), j] = 1.0
        return ind

    def is_coarser_than(self, other: Partition) -> bool:
        """True when every block of ``other`` sits inside one block of ``self``."""
        lab = self.labels()
        return all(len({lab[i] for i in b}) == 1 for b in other.blocks)

    def to_json(self) -> list:
        return [list(b) for b in self.blocks]


@dataclass(frozen=True)
class HilbertSubspace:
    """A finite-dimensional Hilbert space of functions on a finite space.

    ``basis`` is ``m x k`` with linearly independent columns and ``metric``
    is the ``k x k`` Gram matrix of the space's own inner product in those
    basis coordinates.  ``k = 0`` encodes the zero subspace.
    """

    basis: np.ndarray
    metric: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        k = B.shape[1]
        B = _frozen(B)
        M = np.asarray(self.metric, dtype=float)
        M = _frozen(M if k or M.size else np.zeros((0, 0)))
        if M.shape != (k, k):
            raise InvalidInput(f"metric shape {M.shape} does not match basis size {k}")
        if not (np.all(np.isfinite(B)) and np.all(np.isfinite(M))):
            raise InvalidInput("basis and metric must be finite")
        if k:
            if np.linalg.matrix_rank(B) < k:
                raise InvalidInput("basis columns are linearly dependent")
            scale = max(1.0, float(np.abs(M).max()))
            if np.abs(M - M.T).max() > PMF_TOL * scale:
                raise InvalidInput("metric is not symmetric")
            if np.linalg.eigvalsh(M).min() <= 0:
                raise InvalidInput("metric is not positive definite")
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "metric", M)

    @property
    def m(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, m: int) -> HilbertSubspace:
        return cls(np.zeros((m, 0)), np.zeros((0, 0)))

    @classmethod
    def full(cls, sp: FiniteSpace) -> HilbertSubspace:
        """All of L2(P) with its own inner product."""
        return cls(np.eye(sp.m), np.diag(sp.pmf))

    @classmethod
    def span(cls, vectors, sp: FiniteSpace, tol: float = 1e-10) -> HilbertSubspace:
        """Span of the given columns, carrying the L2(P) inner product."""
        V = np.asarray(vectors, dtype=float).reshape(sp.m, -1)
        if V.shape[1] == 0:
            return cls.zero(sp.m)
        scale = np.linalg.norm(sp.embed(V), axis=0)
        keep = scale > 0
        if not keep.any():
            return cls.zero(sp.m)
        W = sp.embed(V[:, keep]) / scale[keep]
        Q = orthonormal_basis(W, tol)
        if Q.shape[1] == 0:
            return cls.zero(sp.m)
        return cls(sp.unembed(Q), np.eye(Q.shape[1]))

    @classmethod
    def from_kernel(cls, K) -> HilbertSubspace:
        """RKHS spanned by the kernel sections ``K[:, j]`` (K positive definite)."""
        K = np.asarray(K, dtype=float)
        return cls(K, 0.5 * (K + K.T))

    def functions(self, coords) -> np.ndarray:
        return self.basis @ np.asarray(coords, dtype=float)

    def with_constants(self) -> np.ndarray:
        """Columns spanning this subspace plus the constant function."""
        return np.column_stack([self.basis, np.ones(self.m)])


def _validate_joint(P: np.ndarray) -> np.ndarray:
    if P.ndim != 2 or P.size == 0:
        raise InvalidInput("joint must be a nonempty matrix")
    if not np.all(np.isfinite(P)) or np.any(P < 0):
        raise InvalidInput("joint entries must be finite and non-negative")
    if abs(P.sum() - 1.0) > PMF_TOL:
        raise InvalidInput(f"joint sums to {P.sum()!r}, not 1")
    if np.any(P.sum(axis=1) <= 0) or np.any(P.sum(axis=0) <= 0):
        raise InvalidInput("every marginal probability must be positive")
    return P


@dataclass(frozen=True)
class JointModel:
    """Joint pmf of (X, Y) over ``Omega_X x Omega_Y``."""

    joint: np.ndarray = field()

    def __post_init__(self):
        object.__setattr__(self, "joint", _frozen(_validate_joint(np.asarray(self.joint, dtype=float))))

    @property
    def m_x(self) -> int:
        return self.joint.shape[0]

    @property
    def m_y(self) -> int:
        return self.joint.shape[1]

    @property
    def p_x(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def p_y(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    @property
    def space_x(self) -> FiniteSpace:
        p = self.p_x
        return FiniteSpace.from_pmf(p / p.sum())

    @property
    def space_y(self) -> FiniteSpace:
        p = self.p_y
        return FiniteSpace.from_pmf(p / p.sum())

    def y_given_x(self) -> np.ndarray:
        """Row ``i`` is the conditional pmf of Y given X = atom i."""
        return self.joint / self.p_x[:, None]

    def x_given_y(self) -> np.ndarray:
        """Column ``j`` is the conditional pmf of X given Y = atom j."""
        return self.joint / self.p_y[None, :]

    def to_json(self) -> dict:
        return {"joint": self.joint.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> JointModel:
        return cls(np.asarray(obj["joint"], dtype=float))


def save_json(obj, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj.to_json(), indent=2) + "\n", encoding="utf-8")


def load_space(path: str | Path) -> FiniteSpace:
    return FiniteSpace.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def load_joint(path: str | Path) -> JointModel:
    return JointModel.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def stack(functions: Iterable, m: int) -> np.ndarray:
    """Stack an iterable of length-m vectors into an ``m x k`` matrix."""
    cols = [np.asarray(f, dtype=float).reshape(m) for f in functions]
    return np.column_stack(cols) if cols else np.zeros((m, 0))
