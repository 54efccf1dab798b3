"""Shared plumbing for fitted models: input checks, score->label links, seeding."""
from __future__ import annotations

import hashlib
import warnings

import numpy as np

from ..errors import DimensionMismatch, SingleClassTraining


class ConvergenceFailure(UserWarning):
    """An iterative solver hit its iteration cap; the model is returned anyway."""


def derive_seed(master: int, *keys) -> int:
    """Stable 63-bit seed from a master seed and any number of str/int keys."""
    text = ":".join([str(int(master))] + [str(k) for k in keys])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big") >> 1


def check_training_data(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-D, got shape {X.shape}")
    if len(y) != len(X):
        raise DimensionMismatch(f"{len(X)} rows but {len(y)} labels")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    if len(X) < 2 or len(np.unique(y)) < 2:
        raise SingleClassTraining("training data needs at least two rows and both classes")
    return X, y.astype(np.int64)


class FittedModel:
    """Base class: subclasses implement ``_scores`` and pick a ``link``.

    Links map scores to labels:
      ``"prob"``   label 1 iff score >= 0.5
      ``"vote"``   label 1 iff score >  0.5 (vote fractions; ties go to class 0)
      ``"margin"`` label 1 iff score >= 0
    """

    variant = None
    link = "prob"

    def __init__(self, spec, n_features: int, seed: int, converged: bool = True):
        self.spec = spec
        self.n_features = int(n_features)
        self.seed = int(seed)
        self.converged = bool(converged)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"model was trained on {self.n_features} features, got shape {X.shape}")
        return X

    def decision_scores(self, X) -> np.ndarray:
        return self._scores(self._check(X))

    def predict(self, X) -> np.ndarray:
        s = self.decision_scores(X)
        if self.link == "prob":
            out = s >= 0.5
        elif self.link == "vote":
            out = s > 0.5
        else:
            out = s >= 0.0
        return out.astype(np.int64)

    def _scores(self, X):
        raise NotImplementedError

    # serialization hooks
    def parameters(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_parameters(cls, spec, params: dict, n_features: int, seed: int, converged: bool):
        raise NotImplementedError


def warn_not_converged(name: str, iters: int):
    warnings.warn(f"{name} did not converge within {iters} iterations", ConvergenceFailure,
                  stacklevel=3)
