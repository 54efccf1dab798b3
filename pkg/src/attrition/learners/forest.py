"""Random forest of Gini trees with per-split feature sampling and hard-vote aggregation."""
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .base import FittedModel, check_training_data, derive_seed
from .tree import Tree, grow_classification_tree


def resolve_max_features(setting, d: int) -> int:
    if setting in (None, "all"):
        return d
    if setting == "sqrt":
        return max(1, int(math.sqrt(d)))
    if setting == "log2":
        return max(1, int(math.log2(d)))
    if isinstance(setting, float):
        return max(1, int(setting * d))
    return min(d, int(setting))


class RandomForestModel(FittedModel):
    variant = "RandomForest"
    link = "vote"

    def __init__(self, spec, n_features, seed, trees, converged=True):
        super().__init__(spec, n_features, seed, converged)
        self.trees = trees

    @classmethod
    def fit(cls, spec, X, y, seed=0, n_jobs=1):
        X, y = check_training_data(X, y)
        n, d = X.shape
        m = resolve_max_features(spec.max_features, d)
        ones = np.ones(n)

        def one_tree(t):
            # per-tree generator so the result does not depend on scheduling
            rng = np.random.default_rng(derive_seed(seed, "tree", t))
            rows = rng.integers(0, n, size=n) if spec.bootstrap else np.arange(n)
            return grow_classification_tree(X, y, ones, spec.max_depth, rng=rng,
                                            max_features=m, rows=rows,
                                            min_samples_split=spec.min_samples_split)

        if n_jobs > 1:
            with ThreadPoolExecutor(n_jobs) as pool:
                trees = list(pool.map(one_tree, range(spec.n_trees)))
        else:
            trees = [one_tree(t) for t in range(spec.n_trees)]
        return cls(spec, d, seed, trees)

    def _scores(self, X):
        """Fraction of trees voting for class 1."""
        votes = np.zeros(len(X))
        for tree in self.trees:
            votes += tree.predict_value(X) > 0.5
        return votes / len(self.trees)

    def parameters(self):
        return {"trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_parameters(cls, spec, params, n_features, seed, converged):
        return cls(spec, n_features, seed, [Tree.from_dict(t) for t in params["trees"]], converged)
