"""Newton-step gradient boosted trees for the binary logistic objective."""
import logging
import math

import numpy as np
from scipy.special import expit

from ..errors import NoValidSplit
from .base import FittedModel, check_training_data, derive_seed
from .tree import Tree, TreeBuilder, midpoint

log = logging.getLogger(__name__)


def log_loss(y, margin) -> float:
    """Mean binary cross-entropy from raw margins."""
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


def leaf_weight(g_sum, h_sum, lam):
    return -g_sum / (h_sum + lam)


def best_gain_split(X, g, h, features, lam, min_child_weight):
    """Exact greedy split maximising G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)."""
    G, H = g.sum(), h.sum()
    parent = G * G / (H + lam)
    best = None
    for f in sorted(features):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cut = np.flatnonzero(xs[:-1] < xs[1:])
        if cut.size == 0:
            continue
        gl = np.cumsum(g[order])[cut]
        hl = np.cumsum(h[order])[cut]
        gr, hr = G - gl, H - hl
        ok = (hl >= min_child_weight) & (hr >= min_child_weight)
        if not ok.any():
            continue
        gain = np.where(ok, gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent, -np.inf)
        i = int(np.argmax(gain))
        if gain[i] > 0 and (best is None or gain[i] > best[2]):
            best = (int(f), midpoint(xs[cut[i]], xs[cut[i] + 1]), float(gain[i]))
    if best is None:
        raise NoValidSplit("no split with positive gain")
    return best


def gbt_round(grad, hess, X, spec, rng=None) -> Tree:
    """Fit one regression tree to (grad, hess); leaves hold -sum(g)/(sum(h)+lambda)."""
    X = np.asarray(X, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    hess = np.asarray(hess, dtype=np.float64)
    d = X.shape[1]
    k = min(d, math.ceil(math.sqrt(d))) if spec.col_subsample == "sqrt" else d
    if k < d:
        rng = rng if rng is not None else np.random.default_rng(0)
        cols = np.sort(rng.choice(d, size=k, replace=False))
    else:
        cols = np.arange(d)

    def value(idx):
        return leaf_weight(grad[idx].sum(), hess[idx].sum(), spec.reg_lambda)

    def split_fn(idx):
        if len(idx) < 2:
            raise NoValidSplit("single sample")
        f, thr, _ = best_gain_split(X[idx], grad[idx], hess[idx], cols, spec.reg_lambda,
                                    spec.min_child_weight)
        return f, thr

    builder = TreeBuilder()
    builder.grow(X, np.arange(len(grad)), 0, spec.max_depth, value, split_fn)
    return builder.build()


class GradientBoostModel(FittedModel):
    variant = "GradientBoost"
    link = "prob"

    def __init__(self, spec, n_features, seed, base_margin, trees, converged=True):
        super().__init__(spec, n_features, seed, converged)
        self.base_margin = float(base_margin)
        self.trees = trees
        self.train_loss = []

    @classmethod
    def fit(cls, spec, X, y, seed=0):
        X, y = check_training_data(X, y)
        p0 = y.mean()
        base = math.log(p0 / (1.0 - p0))
        margin = np.full(len(y), base)
        losses = [log_loss(y, margin)]
        trees = []
        for r in range(spec.n_estimators):
            p = expit(margin)
            rng = np.random.default_rng(derive_seed(seed, "round", r))
            tree = gbt_round(p - y, p * (1.0 - p), X, spec, rng)
            margin = margin + spec.learning_rate * tree.predict_value(X)
            trees.append(tree)
            losses.append(log_loss(y, margin))
            if losses[-1] > losses[-2]:
                log.warning("training log-loss rose in round %d: %.12g -> %.12g",
                            r, losses[-2], losses[-1])
        model = cls(spec, X.shape[1], seed, base, trees)
        model.train_loss = losses
        return model

    def margin(self, X):
        out = np.full(len(X), self.base_margin)
        for t in self.trees:
            out += self.spec.learning_rate * t.predict_value(X)
        return out

    def _scores(self, X):
        """Probability of class 1."""
        return expit(self.margin(X))

    def parameters(self):
        return {"base_margin": self.base_margin, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_parameters(cls, spec, params, n_features, seed, converged):
        return cls(spec, n_features, seed, params["base_margin"],
                   [Tree.from_dict(t) for t in params["trees"]], converged)
