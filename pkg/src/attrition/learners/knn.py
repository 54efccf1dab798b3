"""k-nearest neighbours with an exact k-d tree index and a brute-force reference."""
from __future__ import annotations

import heapq

import numpy as np

from ..errors import KTooLarge
from .base import FittedModel, check_training_data


def _sq_dist(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    # one formula for every path so index and brute force agree bit for bit
    diff = points - q
    return (diff * diff).sum(axis=1)


def brute_force_query(X: np.ndarray, q, k: int):
    """k (index, distance) pairs by full scan; distance ties go to the lower index."""
    X = np.asarray(X, dtype=np.float64)
    if k > len(X):
        raise KTooLarge(f"k={k} exceeds {len(X)} stored rows")
    d2 = _sq_dist(X, np.asarray(q, dtype=np.float64))
    order = np.lexsort((np.arange(len(X)), d2))[:k]
    return [(int(i), float(np.sqrt(d2[i]))) for i in order]


class KDTree:
    """Exact k-d tree. Leaves hold at most ``leaf_size`` points; splits on the widest axis."""

    def __init__(self, X, leaf_size: int = 50):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.leaf_size = max(1, int(leaf_size))
        # ("leaf", lo, hi, row_ids) or ("inner", lo, hi, left_id, right_id)
        self.nodes = []
        self.root = self._build(np.arange(len(self.X)))

    def _build(self, idx):
        pts = self.X[idx]
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        node_id = len(self.nodes)
        self.nodes.append(None)
        spread = hi - lo
        if len(idx) <= self.leaf_size or spread.max() == 0.0:
            self.nodes[node_id] = ("leaf", lo, hi, idx)
            return node_id
        axis = int(np.argmax(spread))
        order = np.argsort(pts[:, axis], kind="stable")
        half = len(idx) // 2
        left, right = idx[order[:half]], idx[order[half:]]
        l_id = self._build(left)
        r_id = self._build(right)
        self.nodes[node_id] = ("inner", lo, hi, l_id, r_id)
        return node_id

    def _lower_bound(self, node, q):
        _, lo, hi = node[:3]
        gap = np.maximum(lo - q, 0.0) + np.maximum(q - hi, 0.0)
        return float(np.dot(gap, gap))

    def query(self, q, k: int):
        if k > len(self.X):
            raise KTooLarge(f"k={k} exceeds {len(self.X)} stored rows")
        q = np.asarray(q, dtype=np.float64)
        heap = []  # max-heap on (d2, idx) via negation

        def worst():
            return -heap[0][0], -heap[0][1]

        def visit(node_id):
            node = self.nodes[node_id]
            if len(heap) == k:
                bound = self._lower_bound(node, q)
                wd, _ = worst()
                if bound > wd * (1.0 + 1e-12):
                    return
            if node[0] == "leaf":
                idx = node[3]
                d2 = _sq_dist(self.X[idx], q)
                for i, dd in zip(idx.tolist(), d2.tolist()):
                    if len(heap) < k:
                        heapq.heappush(heap, (-dd, -i))
                    elif (dd, i) < worst():
                        heapq.heapreplace(heap, (-dd, -i))
                return
            children = [node[3], node[4]]
            children.sort(key=lambda c: self._lower_bound(self.nodes[c], q))
            for c in children:
                visit(c)

        visit(self.root)
        found = sorted((-nd, -ni) for nd, ni in heap)
        return [(int(i), float(np.sqrt(d))) for d, i in found]


def knn_query(store, x, k: int):
    """Nearest k stored rows to ``x``; ``store`` is a :class:`KDTree` or a raw matrix."""
    if isinstance(store, KDTree):
        return store.query(x, k)
    return brute_force_query(store, x, k)


class KNNModel(FittedModel):
    variant = "KNN"
    link = "vote"

    def __init__(self, spec, n_features, seed, X, y, converged=True):
        super().__init__(spec, n_features, seed, converged)
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)
        self.index = KDTree(self.X, spec.leaf_size)

    @classmethod
    def fit(cls, spec, X, y, seed=0):
        X, y = check_training_data(X, y)
        if spec.k > len(X):
            raise KTooLarge(f"k={spec.k} exceeds {len(X)} training rows")
        return cls(spec, X.shape[1], seed, X, y)

    def _scores(self, X):
        """Fraction of the k neighbours labelled 1 (uniform weights)."""
        out = np.empty(len(X))
        for r, q in enumerate(X):
            nbrs = self.index.query(q, self.spec.k)
            out[r] = self.y[[i for i, _ in nbrs]].mean()
        return out

    def parameters(self):
        return {"X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_parameters(cls, spec, params, n_features, seed, converged):
        X = np.asarray(params["X"], dtype=np.float64).reshape(-1, n_features)
        return cls(spec, n_features, seed, X, params["y"], converged)
