"""Binary SAMME AdaBoost over weighted Gini stumps."""
import math

import numpy as np

from .base import FittedModel, check_training_data
from .tree import Tree, grow_classification_tree

# stand-in error for a perfect stump, so its weight stays finite
PERFECT_ERROR = 1e-10


def samme_alpha(err: float, learning_rate: float) -> float:
    err = min(max(err, PERFECT_ERROR), 1.0 - PERFECT_ERROR)
    return learning_rate * math.log((1.0 - err) / err)


def adaboost_round(weights, misclassified, learning_rate):
    """One reweighting step.

    Returns ``(alpha, new_weights, err, stop)``. ``err >= 0.5`` yields alpha 0,
    unchanged weights and ``stop``; ``err == 0`` caps alpha and also stops.
    """
    weights = np.asarray(weights, dtype=np.float64)
    miss = np.asarray(misclassified, dtype=bool)
    err = float(np.dot(weights, miss) / weights.sum())
    if err >= 0.5:
        return 0.0, weights / weights.sum(), err, True
    alpha = samme_alpha(err, learning_rate)
    if err <= 0.0:
        return alpha, weights / weights.sum(), err, True
    new = weights * np.exp(alpha * miss)
    return alpha, new / new.sum(), err, False


class AdaBoostModel(FittedModel):
    variant = "AdaBoost"
    link = "vote"

    def __init__(self, spec, n_features, seed, stumps, alphas, converged=True):
        super().__init__(spec, n_features, seed, converged)
        self.stumps = stumps
        self.alphas = np.asarray(alphas, dtype=np.float64)
        self.weight_history = []

    @classmethod
    def fit(cls, spec, X, y, seed=0, keep_weights=False):
        X, y = check_training_data(X, y)
        n = len(y)
        w = np.full(n, 1.0 / n)
        stumps, alphas, history = [], [], []
        for _ in range(spec.n_estimators):
            stump = grow_classification_tree(X, y, w, spec.base_depth)
            miss = (stump.predict_value(X) > 0.5).astype(np.int64) != y
            alpha, w_new, err, stop = adaboost_round(w, miss, spec.learning_rate)
            if alpha > 0:
                stumps.append(stump)
                alphas.append(alpha)
            w = w_new
            if keep_weights:
                history.append(w.copy())
            if stop:
                break
        if not stumps:
            # first stump no better than chance: keep it so the model can still predict
            stumps, alphas = [stump], [1.0]
        model = cls(spec, X.shape[1], seed, stumps, alphas)
        model.weight_history = history
        return model

    def _scores(self, X):
        """Alpha-weighted fraction of stumps voting for class 1."""
        votes = np.zeros(len(X))
        for a, s in zip(self.alphas, self.stumps):
            votes += a * (s.predict_value(X) > 0.5)
        return votes / self.alphas.sum()

    def parameters(self):
        return {"stumps": [s.to_dict() for s in self.stumps], "alphas": self.alphas.tolist()}

    @classmethod
    def from_parameters(cls, spec, params, n_features, seed, converged):
        return cls(spec, n_features, seed, [Tree.from_dict(s) for s in params["stumps"]],
                   params["alphas"], converged)
