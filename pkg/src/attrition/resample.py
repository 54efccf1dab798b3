"""SMOTE oversampling of the minority class."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingleClass, TooFewMinoritySamples


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    target_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if not 0 < self.target_ratio <= 1.0:
            raise ValueError("target_ratio must be in (0, 1]")


def minority_neighbors(X_min: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest other minority rows (Euclidean; ties by lower index)."""
    out = np.empty((len(X_min), k), dtype=np.intp)
    for i, row in enumerate(X_min):
        d2 = ((X_min - row) ** 2).sum(axis=1)
        d2[i] = np.inf
        out[i] = np.argsort(d2, kind="stable")[:k]
    return out


def smote_oversample(X, y, config: SmoteConfig = SmoteConfig()):
    """Return ``(X', y')`` with synthetic minority rows appended after the originals.

    Synthetic row j is built from minority row ``j % n_minority`` (round-robin in
    index order) and one of its k nearest minority neighbours picked uniformly:
    ``x + u * (neighbour - x)`` with ``u ~ U(0, 1)``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    labels, counts = np.unique(y, return_counts=True)
    if len(labels) < 2:
        raise SingleClass("SMOTE needs two classes")
    if len(labels) > 2:
        raise ValueError(f"SMOTE here is binary only, got classes {labels.tolist()}")
    minority = labels[np.argmin(counts)]
    n_maj, n_min = counts.max(), counts.min()
    target = int(np.floor(config.target_ratio * n_maj + 0.5))
    needed = target - n_min
    if needed <= 0:
        return X.copy(), y.copy()
    if n_min <= config.k_neighbors:
        raise TooFewMinoritySamples(
            f"{n_min} minority rows cannot supply {config.k_neighbors} neighbours")

    min_idx = np.flatnonzero(y == minority)
    X_min = X[min_idx]
    nn = minority_neighbors(X_min, config.k_neighbors)
    rng = np.random.default_rng(config.seed)
    base = np.arange(needed) % n_min
    pick = rng.integers(0, config.k_neighbors, size=needed)
    u = rng.random(needed)
    partner = nn[base, pick]
    synth = X_min[base] + u[:, None] * (X_min[partner] - X_min[base])
    X_out = np.vstack([X, synth])
    y_out = np.concatenate([y, np.full(needed, minority, dtype=y.dtype)])
    return X_out, y_out
