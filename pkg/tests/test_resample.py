import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attrition.errors import SingleClass, TooFewMinoritySamples
from attrition.resample import SmoteConfig, minority_neighbors, smote_oversample


def _data(rng, n_maj=40, n_min=12, d=3):
    X = np.vstack([rng.normal(size=(n_maj, d)), rng.normal(2.0, 1.0, size=(n_min, d))])
    y = np.array([0] * n_maj + [1] * n_min)
    perm = rng.permutation(len(y))
    return X[perm], y[perm]


@given(st.integers(6, 30), st.integers(31, 80), st.integers(1, 5), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_smote_properties(n_min, n_maj, k, seed):
    rng = np.random.default_rng(seed)
    X, y = _data(rng, n_maj, n_min)
    Xo, yo = smote_oversample(X, y, SmoteConfig(k_neighbors=k, seed=seed))
    assert np.bincount(yo).tolist() == [n_maj, n_maj]
    # originals first and untouched
    assert np.array_equal(Xo[: len(X)], X) and np.array_equal(yo[: len(y)], y)
    X_min = X[y == 1]
    nn = minority_neighbors(X_min, k)
    synth = Xo[len(X):]
    for j, row in enumerate(synth):
        base = j % n_min  # round-robin over minority rows
        a = X_min[base]
        ok = False
        for partner in nn[base]:
            b = X_min[partner]
            span = b - a
            u = np.dot(row - a, span) / np.dot(span, span) if np.dot(span, span) else 0.0
            if -1e-12 <= u <= 1 + 1e-12 and np.allclose(a + u * span, row, atol=1e-9):
                ok = True
                break
        assert ok, j


def test_smote_deterministic():
    rng = np.random.default_rng(1)
    X, y = _data(rng)
    a = smote_oversample(X, y, SmoteConfig(seed=5))
    b = smote_oversample(X, y, SmoteConfig(seed=5))
    c = smote_oversample(X, y, SmoteConfig(seed=6))
    assert np.array_equal(a[0], b[0])
    assert not np.array_equal(a[0], c[0])


def test_neighbors_match_brute_force():
    rng = np.random.default_rng(2)
    X = rng.integers(0, 3, size=(25, 2)).astype(float)  # many ties
    nn = minority_neighbors(X, 4)
    for i in range(len(X)):
        d = [(float(((X[j] - X[i]) ** 2).sum()), j) for j in range(len(X)) if j != i]
        assert nn[i].tolist() == [j for _, j in sorted(d)[:4]]


def test_target_ratio():
    rng = np.random.default_rng(3)
    X, y = _data(rng, 40, 10)
    _, yo = smote_oversample(X, y, SmoteConfig(target_ratio=0.5))
    assert np.bincount(yo).tolist() == [40, 20]


def test_balanced_input_returns_copy():
    X = np.arange(8.0).reshape(4, 2)
    y = np.array([0, 1, 0, 1])
    Xo, yo = smote_oversample(X, y)
    assert np.array_equal(Xo, X) and Xo is not X


def test_errors():
    X = np.zeros((10, 2))
    with pytest.raises(SingleClass):
        smote_oversample(X, np.zeros(10, dtype=int))
    y = np.array([0] * 7 + [1] * 3)
    with pytest.raises(TooFewMinoritySamples):
        smote_oversample(np.random.default_rng(0).normal(size=(10, 2)), y, SmoteConfig(k_neighbors=5))
    with pytest.raises(ValueError):
        SmoteConfig(k_neighbors=0)
