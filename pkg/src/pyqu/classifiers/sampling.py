"""Labelled datasets, SMOTE oversampling and stratified splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pyqu.kernels import knn_indices

ENHANCED = 1
NOT_ENHANCED = 0


@dataclass(frozen=True)
class LabeledExample:
    features: tuple[float, ...]
    label: int
    sha: str | None = None


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    shas: tuple[str | None, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(0, 0)
        y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
        if y.size and not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 (not enhanced) or 1 (enhanced)")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.shas is not None:
            object.__setattr__(self, "shas", tuple(self.shas))

    def __len__(self) -> int:
        return int(self.y.shape[0])

    @property
    def dim(self) -> int:
        return int(self.X.shape[1])

    @classmethod
    def from_examples(cls, examples: Sequence[LabeledExample]) -> Dataset:
        dims = {len(e.features) for e in examples}
        if len(dims) > 1:
            raise ValueError(f"mixed feature dimensions: {sorted(dims)}")
        X = np.array([e.features for e in examples], dtype=np.float64).reshape(len(examples), -1)
        return cls(X, [e.label for e in examples], [e.sha for e in examples])

    def subset(self, idx) -> Dataset:
        shas = None if self.shas is None else tuple(self.shas[i] for i in idx)
        return Dataset(self.X[idx], self.y[idx], shas)

    def class_counts(self) -> dict[int, int]:
        return {int(c): int((self.y == c).sum()) for c in (0, 1)}


def smote_oversample(data: Dataset, k: int = 5, seed: int = 0) -> Dataset:
    """Grow the minority class to the majority size by interpolation.

    Each synthetic point is ``x + u * (z - x)`` for a random minority point
    ``x``, one of its ``k`` nearest minority neighbours ``z`` and ``u`` drawn
    uniformly from ``[0, 1]``. Synthetic rows are appended after the
    original ones.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    counts = data.class_counts()
    if min(counts.values()) == 0:
        raise ValueError("SMOTE needs both classes present")
    if counts[0] == counts[1]:
        return data
    minority = 0 if counts[0] < counts[1] else 1
    m = counts[minority]
    if m < 2:
        raise ValueError("SMOTE needs at least 2 minority examples")
    n_new = abs(counts[1] - counts[0])
    k = min(k, m - 1)
    Xm = np.ascontiguousarray(data.X[data.y == minority])
    neighbours = knn_indices(Xm, k)
    rng = np.random.default_rng(seed)
    base = rng.integers(0, m, size=n_new)
    pick = rng.integers(0, k, size=n_new)
    u = rng.random(n_new)
    x = Xm[base]
    z = Xm[neighbours[base, pick]]
    synthetic = x + u[:, None] * (z - x)
    shas = None if data.shas is None else data.shas + (None,) * n_new
    return Dataset(
        np.vstack([data.X, synthetic]),
        np.concatenate([data.y, np.full(n_new, minority, dtype=np.int64)]),
        shas,
    )


def stratified_split(data: Dataset, train_frac: float = 0.7, seed: int = 0) -> tuple[Dataset, Dataset]:
    if not 0.0 < train_frac < 1.0:
        raise ValueError(f"train_frac must lie strictly between 0 and 1, got {train_frac}")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for c in (0, 1):
        idx = np.flatnonzero(data.y == c)
        if len(idx) < 2:
            raise ValueError(f"class {c} has {len(idx)} examples; stratified split needs >= 2")
        idx = rng.permutation(idx)
        n_train = min(max(int(math.floor(len(idx) * train_frac + 0.5)), 1), len(idx) - 1)
        train_idx.append(idx[:n_train])
        test_idx.append(idx[n_train:])
    train = rng.permutation(np.concatenate(train_idx))
    test = rng.permutation(np.concatenate(test_idx))
    return data.subset(train), data.subset(test)
