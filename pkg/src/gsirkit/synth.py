"""Reproducible synthetic data with a known sufficient reduction.

Randomness scheme: ``numpy.random.SeedSequence(seed).spawn(k)`` yields one
child sequence per generated array, each driving its own ``PCG64`` bit
generator.  The child order is fixed per generator and documented below, so
any PCG64/SeedSequence implementation reproduces the same streams.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .discrete.operators import central_partition, is_complete
from .discrete.randgen import random_pmf
from .discrete.space import JointModel, Partition
from .errors import GenerationFailure, InvalidInput, InvalidSpec

LINKS = ("identity", "exp", "sin", "quadratic", "twoindex")
ROW_SEPARATION = 0.05
MAX_REDRAWS = 100


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        X = X[:, None] if X.ndim == 1 else X
        Y = Y[:, None] if Y.ndim == 1 else Y
        if X.ndim != 2 or Y.ndim != 2:
            raise InvalidInput("X and Y must be matrices")
        if X.shape[0] != Y.shape[0]:
            raise InvalidInput(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
        if X.shape[0] < 2:
            raise InvalidInput("a dataset needs at least two rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise InvalidInput("dataset contains non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class ScenarioSpec:
    name: str = "exp"
    n: int = 500
    p: int = 5
    link: str = "exp"
    noise_sd: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.link not in LINKS:
            raise InvalidSpec(f"unknown link {self.link!r}; expected one of {LINKS}")
        if self.n < 10:
            raise InvalidSpec("n must be at least 10")
        if self.p < 1 or (self.link == "twoindex" and self.p < 2):
            raise InvalidSpec("p too small for this link")
        if not self.noise_sd >= 0:
            raise InvalidSpec("noise_sd must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidSpec("seed must be an unsigned 64-bit integer")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> ScenarioSpec:
        return cls(**{k: obj[k] for k in ("name", "n", "p", "link", "noise_sd", "seed") if k in obj})


@dataclass(frozen=True)
class Scenario:
    data: Dataset
    true_reduction: np.ndarray
    spec: ScenarioSpec

    @property
    def r(self) -> int:
        return self.true_reduction.shape[1]


def _streams(seed: int, k: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(int(seed)).spawn(k)]


def gen_continuous(spec: ScenarioSpec) -> Scenario:
    """Standard normal X and ``Y = link(reduction) + noise_sd * eps``.

    Streams: child 0 draws X (row-major n x p), child 1 draws the noise.
    """
    gx, ge = _streams(spec.seed, 2)
    X = gx.standard_normal((spec.n, spec.p))
    eps = ge.standard_normal(spec.n)
    x1 = X[:, 0]
    if spec.link == "identity":
        truth = x1[:, None]
        signal = x1
    elif spec.link == "exp":
        truth = np.exp(x1)[:, None]
        signal = truth[:, 0]
    elif spec.link == "sin":
        truth = np.sin(2 * x1)[:, None]
        signal = truth[:, 0]
    elif spec.link == "quadratic":
        truth = (x1**2)[:, None]
        signal = truth[:, 0]
    else:
        truth = np.column_stack([x1, X[:, 1] ** 2])
        signal = truth.sum(axis=1)
    Y = signal + spec.noise_sd * eps
    return Scenario(Dataset(X, Y[:, None]), truth, spec)


@dataclass(frozen=True)
class DiscreteInstance:
    joint: JointModel
    partition: Partition
    complete: bool


def gen_discrete_joint(m_x: int, m_y: int, blocks: int, seed: int) -> DiscreteInstance:
    """Joint pmf whose central partition is known by construction.

    Streams: child 0 assigns atoms to blocks, child 1 draws the conditional
    rows P(Y | block), child 2 draws the X marginal.
    """
    if not 1 <= blocks <= m_x:
        raise InvalidInput("need 1 <= blocks <= m_x")
    if m_y < 2:
        raise InvalidInput("need m_y >= 2")
    g_assign, g_rows, g_marg = _streams(seed, 3)
    perm = g_assign.permutation(m_x)
    labels = np.empty(m_x, dtype=int)
    labels[perm[:blocks]] = np.arange(blocks)
    labels[perm[blocks:]] = g_assign.integers(0, blocks, size=m_x - blocks)
    for _ in range(MAX_REDRAWS):
        rows = g_rows.dirichlet(np.ones(m_y), size=blocks)
        tv = 0.5 * np.abs(rows[:, None, :] - rows[None, :, :]).sum(axis=2)
        if blocks == 1 or tv[np.triu_indices(blocks, 1)].min() >= ROW_SEPARATION:
            break
    else:
        raise GenerationFailure(f"could not separate {blocks} conditional rows after {MAX_REDRAWS} draws")
    px = random_pmf(g_marg, m_x)
    joint = px[:, None] * rows[labels]
    jm = JointModel(joint / joint.sum())
    G = Partition.from_labels(labels)
    if central_partition(jm) != G:
        raise GenerationFailure("generated rows are not separated at the partition tolerance")
    return DiscreteInstance(jm, G, is_complete(jm, G))


def dataset_to_csv(data: Dataset) -> str:
    """Serialise with header ``x1..xp,y1..yq``; floats use repr so they round-trip."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{j + 1}" for j in range(data.X.shape[1])] + [f"y{j + 1}" for j in range(data.Y.shape[1])])
    for row in np.hstack([data.X, data.Y]):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def matrix_to_csv(M: np.ndarray, prefix: str) -> str:
    M = np.asarray(M, dtype=float)
    M = M[:, None] if M.ndim == 1 else M
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"{prefix}{j + 1}" for j in range(M.shape[1])])
    for row in M:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def save_scenario_spec(spec: ScenarioSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec.to_json(), indent=2) + "\n", encoding="utf-8")


def load_scenario_spec(path: str | Path) -> ScenarioSpec:
    return ScenarioSpec.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
