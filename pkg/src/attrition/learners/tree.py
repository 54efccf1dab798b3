"""Binary trees stored as flat node arrays, Gini split search and the decision tree learner."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NoValidSplit
from .base import FittedModel, check_training_data

LEAF = -1
# gains closer than this are ties; ties go to the lower feature, then the lower threshold
TIE_EPS = 1e-12


@dataclass
class Tree:
    """Flat node arrays. ``feature == -1`` marks a leaf; rows go left when x <= threshold."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        best, stack = 0, [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.feature[node] != LEAF:
                stack.append((self.left[node], d + 1))
                stack.append((self.right[node], d + 1))
        return best

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.intp)
        rows = np.arange(len(X))
        while True:
            f = self.feature[node]
            active = f != LEAF
            if not active.any():
                return node
            r, n, fa = rows[active], node[active], f[active]
            go_left = X[r, fa] <= self.threshold[n]
            node[active] = np.where(go_left, self.left[n], self.right[n])

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(np.asarray(d["feature"], dtype=np.intp),
                   np.asarray(d["threshold"], dtype=np.float64),
                   np.asarray(d["left"], dtype=np.intp),
                   np.asarray(d["right"], dtype=np.intp),
                   np.asarray(d["value"], dtype=np.float64))


class TreeBuilder:
    """Accumulates nodes depth-first; ``split_fn(idx)`` returns (feature, threshold) or raises."""

    def __init__(self):
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def add(self, value) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(float(value))
        return len(self.feature) - 1

    def grow(self, X, idx, depth, max_depth, leaf_value, split_fn) -> int:
        node = self.add(leaf_value(idx))
        if depth >= max_depth:
            return node
        try:
            f, thr = split_fn(idx)
        except NoValidSplit:
            return node
        mask = X[idx, f] <= thr
        self.feature[node] = int(f)
        self.threshold[node] = float(thr)
        self.left[node] = self.grow(X, idx[mask], depth + 1, max_depth, leaf_value, split_fn)
        self.right[node] = self.grow(X, idx[~mask], depth + 1, max_depth, leaf_value, split_fn)
        return node

    def build(self) -> Tree:
        return Tree(np.array(self.feature, dtype=np.intp), np.array(self.threshold),
                    np.array(self.left, dtype=np.intp), np.array(self.right, dtype=np.intp),
                    np.array(self.value))


def midpoint(a: float, b: float) -> float:
    m = (a + b) / 2.0
    # a and b adjacent floats: the midpoint can round up to b, which would send b left
    return a if m >= b else m


def gini(w1, w):
    p = w1 / w
    return 2.0 * p * (1.0 - p)


def best_split(X, y, sample_weights=None, feature_subset=None):
    """Exhaustive weighted-Gini split search.

    Candidates are midpoints between consecutive sorted unique values of each
    feature in ``feature_subset``. Returns ``(feature, threshold, gain)`` where
    gain is the parent impurity minus the weighted child impurity.
    Raises :class:`NoValidSplit` for pure nodes or when every feature is constant.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    w = np.ones(len(y)) if sample_weights is None else np.asarray(sample_weights, dtype=np.float64)
    features = range(X.shape[1]) if feature_subset is None else sorted(feature_subset)
    if len(y) < 2:
        raise NoValidSplit("fewer than 2 samples")
    if np.all(y == y[0]):
        raise NoValidSplit("node is pure")

    W = w.sum()
    W1 = w[y == 1].sum()
    parent = gini(W1, W)
    best = None
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs, ws, ys = X[order, f], w[order], y[order]
        cut = np.flatnonzero(xs[:-1] < xs[1:])
        if cut.size == 0:
            continue
        cw = np.cumsum(ws)
        cw1 = np.cumsum(ws * (ys == 1))
        wl, w1l = cw[cut], cw1[cut]
        wr, w1r = W - wl, W1 - w1l
        valid = (wl > 0) & (wr > 0)
        if not valid.any():
            continue
        cut, wl, w1l, wr, w1r = cut[valid], wl[valid], w1l[valid], wr[valid], w1r[valid]
        gain = parent - (wl / W) * gini(w1l, wl) - (wr / W) * gini(w1r, wr)
        top = gain.max()
        i = int(np.flatnonzero(gain >= top - TIE_EPS)[0])
        if best is None or gain[i] > best[2] + TIE_EPS:
            best = (int(f), midpoint(xs[cut[i]], xs[cut[i] + 1]), float(gain[i]))
    if best is None:
        raise NoValidSplit("all candidate features are constant")
    return best


def grow_classification_tree(X, y, weights, max_depth, rng=None, max_features=None,
                             min_samples_split=2, rows=None) -> Tree:
    """Gini tree; leaves hold the weighted fraction of class 1.

    ``max_features`` (int) draws that many candidate features per split from ``rng``.
    """
    d = X.shape[1]
    y1 = (y == 1).astype(np.float64)

    def leaf_value(idx):
        return float(np.dot(weights[idx], y1[idx]) / weights[idx].sum())

    def split_fn(idx):
        if len(idx) < min_samples_split:
            raise NoValidSplit("too few samples")
        subset = None
        if max_features is not None and max_features < d:
            subset = rng.choice(d, size=max_features, replace=False)
        f, thr, _ = best_split(X[idx], y[idx], weights[idx], subset)
        return f, thr

    idx = np.arange(len(y)) if rows is None else np.asarray(rows)
    builder = TreeBuilder()
    builder.grow(X, idx, 0, max_depth, leaf_value, split_fn)
    return builder.build()


class DecisionTreeModel(FittedModel):
    variant = "DecisionTree"
    link = "vote"

    def __init__(self, spec, n_features, seed, tree: Tree, converged=True):
        super().__init__(spec, n_features, seed, converged)
        self.tree = tree

    @classmethod
    def fit(cls, spec, X, y, seed=0):
        X, y = check_training_data(X, y)
        tree = grow_classification_tree(X, y, np.ones(len(y)), spec.max_depth,
                                        min_samples_split=spec.min_samples_split)
        return cls(spec, X.shape[1], seed, tree)

    def _scores(self, X):
        return self.tree.predict_value(X)

    def parameters(self):
        return {"tree": self.tree.to_dict()}

    @classmethod
    def from_parameters(cls, spec, params, n_features, seed, converged):
        return cls(spec, n_features, seed, Tree.from_dict(params["tree"]), converged)
