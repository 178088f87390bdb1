"""Random finite spaces, partitions and subspaces for property suites."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .space import FiniteSpace, HilbertSubspace, Partition

MAX_BLOCKS = 5


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Number of partitions of n labelled items into exactly k nonempty blocks."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def random_pmf(rng: np.random.Generator, m: int, floor: float = 1e-3) -> np.ndarray:
    p = np.clip(rng.dirichlet(np.ones(m)), floor, None)
    return p / p.sum()


def random_space(rng: np.random.Generator, m_min: int = 2, m_max: int = 12) -> FiniteSpace:
    return FiniteSpace.from_pmf(random_pmf(rng, int(rng.integers(m_min, m_max + 1))))


def random_partition(rng: np.random.Generator, m: int, max_blocks: int = MAX_BLOCKS) -> Partition:
    """Uniform draw over set partitions of m atoms with at most ``max_blocks`` blocks."""
    ks = np.arange(1, min(m, max_blocks) + 1)
    weights = np.array([stirling2(m, int(k)) for k in ks], dtype=float)
    k = int(rng.choice(ks, p=weights / weights.sum()))
    return Partition.from_labels(_sample_labels(rng, m, k))


def _sample_labels(rng: np.random.Generator, n: int, k: int) -> list[int]:
    # Last atom opens its own block with probability S(n-1, k-1) / S(n, k),
    # otherwise it joins one of the k blocks formed by the others.
    if n == 0:
        return []
    if rng.random() * stirling2(n, k) < stirling2(n - 1, k - 1):
        return _sample_labels(rng, n - 1, k - 1) + [k - 1]
    return _sample_labels(rng, n - 1, k) + [int(rng.integers(k))]


def random_subspace(rng: np.random.Generator, sp: FiniteSpace, k: int, metric: str = "random") -> HilbertSubspace:
    """Span of k orthonormalised Gaussian draws; ``metric`` is "l2" or "random"."""
    if k == 0:
        return HilbertSubspace.zero(sp.m)
    Q, _ = np.linalg.qr(rng.standard_normal((sp.m, k)))
    if metric == "l2":
        M = sp.l2_gram(Q)
    else:
        A = rng.standard_normal((k, k))
        M = A @ A.T / k + 0.5 * np.eye(k)
    return HilbertSubspace(Q, 0.5 * (M + M.T))


def random_function(rng: np.random.Generator, sp: FiniteSpace) -> np.ndarray:
    return rng.standard_normal(sp.m)
