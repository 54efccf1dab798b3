import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attrition.errors import (
    CorruptPayload,
    DimensionMismatch,
    KTooLarge,
    NoValidSplit,
    SingleClassTraining,
    VersionMismatch,
)
from attrition.learners import (
    KNN,
    SPECS,
    SVM,
    AdaBoost,
    DecisionTree,
    GradientBoost,
    KDTree,
    LogisticRegression,
    RandomForest,
    adaboost_round,
    best_split,
    derive_seed,
    dual_objective,
    fit,
    gbt_round,
    load_model,
    make_spec,
    rbf_kernel,
    samme_alpha,
    save_model,
    scale_gamma,
    smo_solve,
)
from attrition.learners.svm import SVMModel
from attrition.learners.tree import midpoint

SMALL = {
    "LogisticRegression": LogisticRegression(),
    "KNN": KNN(k=5),
    "SVM": SVM(C=10.0, tol=1e-3),
    "DecisionTree": DecisionTree(max_depth=4),
    "RandomForest": RandomForest(n_trees=15, max_depth=4),
    "AdaBoost": AdaBoost(n_estimators=20, learning_rate=0.5),
    "GradientBoost": GradientBoost(n_estimators=30, learning_rate=0.1, max_depth=3),
}


@pytest.fixture(scope="module")
def blobs():
    rng = np.random.default_rng(5)
    X = np.vstack([rng.normal(0, 1, (80, 4)), rng.normal(1.5, 1, (80, 4))])
    y = np.array([0] * 80 + [1] * 80)
    return X, y


def test_registry_covers_all_models():
    assert set(SMALL) == set(SPECS)


@pytest.mark.parametrize("name", sorted(SMALL))
def test_fit_predict_and_roundtrip(blobs, name):
    X, y = blobs
    model = fit(SMALL[name], X, y, seed=3)
    pred = model.predict(X)
    assert set(np.unique(pred)) <= {0, 1}
    assert (pred == y).mean() > 0.75
    payload = save_model(model)
    doc = json.loads(payload)
    assert doc["format_version"] == 1 and doc["variant"] == name
    back = load_model(payload)
    assert np.array_equal(back.decision_scores(X), model.decision_scores(X))
    assert np.array_equal(back.predict(X), pred)
    assert save_model(back) == payload


@pytest.mark.parametrize("name", sorted(SMALL))
def test_fit_is_deterministic(blobs, name):
    X, y = blobs
    a = save_model(fit(SMALL[name], X, y, seed=9))
    b = save_model(fit(SMALL[name], X, y, seed=9))
    assert a == b


def test_dimension_and_class_checks(blobs):
    X, y = blobs
    model = fit(SMALL["LogisticRegression"], X, y)
    with pytest.raises(DimensionMismatch):
        model.predict(X[:, :3])
    with pytest.raises(SingleClassTraining):
        fit(DecisionTree(), X, np.zeros(len(X), dtype=int))
    with pytest.raises(DimensionMismatch):
        fit(DecisionTree(), X, y[:-1])
    with pytest.raises(KTooLarge):
        fit(KNN(k=500), X, y)


def test_payload_errors(blobs):
    X, y = blobs
    payload = save_model(fit(SMALL["DecisionTree"], X, y))
    doc = json.loads(payload)
    doc["format_version"] = 2
    with pytest.raises(VersionMismatch):
        load_model(json.dumps(doc).encode())
    with pytest.raises(CorruptPayload):
        load_model(b"\x00not json")
    doc["format_version"] = 1
    del doc["parameters"]
    with pytest.raises(CorruptPayload):
        load_model(json.dumps(doc).encode())


def test_make_spec_rejects_unknown():
    with pytest.raises(ValueError):
        make_spec("LogisticRegression", penalty="l1")
    with pytest.raises(ValueError):
        make_spec("Perceptron")
    assert make_spec("KNN", k=3).k == 3


def test_derive_seed_stable_and_distinct():
    assert derive_seed(0, "split") == derive_seed(0, "split")
    seeds = {derive_seed(0, "learner", n) for n in SPECS} | {derive_seed(0, "split")}
    assert len(seeds) == len(SPECS) + 1
    assert all(0 <= s < 2**63 for s in seeds)


# trees ---------------------------------------------------------------------

def test_midpoint_never_reaches_upper():
    a = 1.0
    b = np.nextafter(a, 2.0)
    assert midpoint(a, b) < b


def test_best_split_errors():
    with pytest.raises(NoValidSplit):
        best_split(np.zeros((4, 2)), np.array([0, 1, 0, 1]))
    with pytest.raises(NoValidSplit):
        best_split(np.arange(4.0)[:, None], np.ones(4, dtype=int))


def test_best_split_weighted_equals_duplicated_rows():
    rng = np.random.default_rng(0)
    X = rng.integers(0, 5, (12, 2)).astype(float)
    y = rng.integers(0, 2, 12)
    y[0], y[1] = 0, 1
    w = rng.integers(1, 4, 12)
    got = best_split(X, y, sample_weights=w.astype(float))
    rep = np.repeat(np.arange(12), w)
    want = best_split(X[rep], y[rep])
    assert got[:2] == want[:2]
    assert got[2] == pytest.approx(want[2])


@given(st.integers(1, 6), st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_tree_depth_bound(depth, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 3))
    y = (X[:, 0] + 0.5 * rng.normal(size=60) > 0).astype(int)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    model = fit(DecisionTree(max_depth=depth), X, y)
    assert model.tree.depth() <= depth


def test_forest_threads_do_not_change_result(blobs):
    from attrition.learners.forest import RandomForestModel

    X, y = blobs
    a = RandomForestModel.fit(SMALL["RandomForest"], X, y, seed=1, n_jobs=1)
    b = RandomForestModel.fit(SMALL["RandomForest"], X, y, seed=1, n_jobs=4)
    assert np.array_equal(a.decision_scores(X), b.decision_scores(X))


def test_vote_ties_go_to_class_zero(blobs):
    X, y = blobs
    model = fit(KNN(k=2), X, y)
    scores = model.decision_scores(X)
    tied = scores == 0.5
    assert np.all(model.predict(X)[tied] == 0)


# boosting ------------------------------------------------------------------

def test_adaboost_round_rules():
    w = np.full(4, 0.25)
    alpha, new, err, stop = adaboost_round(w, [True, False, False, False], 1.0)
    assert err == 0.25 and not stop
    assert alpha == pytest.approx(np.log(3))
    assert new.sum() == pytest.approx(1.0, abs=1e-12)
    assert new[0] == pytest.approx(0.5)
    alpha, new, _, stop = adaboost_round(w, [True, True, False, False], 1.0)
    assert alpha == 0.0 and stop and np.array_equal(new, w)
    alpha, _, _, stop = adaboost_round(w, [False] * 4, 0.01)
    assert stop and np.isfinite(alpha) and alpha > 0
    assert samme_alpha(0.0, 1.0) == samme_alpha(1e-10, 1.0)


def test_gbt_single_round_leaf_weights():
    X = np.array([[0.0], [0.0], [1.0], [1.0]])
    y = np.array([0, 0, 1, 1])
    p = np.full(4, 0.5)
    spec = GradientBoost(max_depth=1, reg_lambda=1.0, col_subsample=None, min_child_weight=0.0)
    tree = gbt_round(p - y, p * (1 - p), X, spec, np.random.default_rng(0))
    # each leaf: G = +/-1, H = 0.5 -> w = -G / (H + 1)
    np.testing.assert_allclose(tree.predict_value(X), [-1 / 1.5, -1 / 1.5, 1 / 1.5, 1 / 1.5])


def test_gbt_loss_recorded(blobs):
    X, y = blobs
    model = fit(SMALL["GradientBoost"], X, y)
    assert len(model.train_loss) == 31
    assert model.train_loss[-1] < model.train_loss[0]


# logistic ------------------------------------------------------------------

def test_logistic_matches_reference_solver(blobs):
    sk = pytest.importorskip("sklearn.linear_model")
    X, y = blobs
    ours = fit(LogisticRegression(), X, y)
    ref = sk.LogisticRegression(C=1.0, tol=1e-10, max_iter=10_000).fit(X, y)
    np.testing.assert_allclose(ours.coef, ref.coef_[0], atol=1e-5)
    assert ours.intercept == pytest.approx(ref.intercept_[0], abs=1e-5)
    assert ours.converged


# svm -----------------------------------------------------------------------

def test_scale_gamma():
    X = np.array([[0.0, 2.0], [2.0, 0.0]])
    assert scale_gamma(X) == pytest.approx(1 / (2 * X.var()))


def test_svm_matches_reference_solver(blobs):
    svm = pytest.importorskip("sklearn.svm")
    X, y = blobs
    model = fit(SVM(C=10.0, tol=1e-4), X, y)
    ref = svm.SVC(C=10.0, gamma="scale", tol=1e-4).fit(X, y)
    assert model.gamma == pytest.approx(ref._gamma)
    agree = (model.predict(X) == ref.predict(X)).mean()
    assert agree >= 0.99
    np.testing.assert_allclose(model.decision_scores(X), ref.decision_function(X), atol=5e-3)


def test_smo_xor_matches_qp():
    cp = pytest.importorskip("cvxpy")
    X = np.array([[0, 0], [1, 1], [0, 1], [1, 0], [0.1, 0.1], [0.9, 0.1]], dtype=float)
    y = np.array([-1, -1, 1, 1, -1, 1], dtype=float)
    C = 10.0
    K = rbf_kernel(X, X, 1.0)
    sol = smo_solve(K, y, C, tol=1e-8)
    a = cp.Variable(len(y))
    Q = (y[:, None] * y[None, :]) * K + 1e-12 * np.eye(len(y))
    prob = cp.Problem(cp.Maximize(cp.sum(a) - 0.5 * cp.quad_form(a, cp.psd_wrap(Q))),
                      [a >= 0, a <= C, y @ a == 0])
    prob.solve()
    assert dual_objective(sol.alpha, K, y) == pytest.approx(prob.value, rel=1e-5)
    assert np.all(np.sign(K @ (sol.alpha * y) + sol.bias) == y)


def test_smo_iteration_cap_warns(blobs):
    X, y = blobs
    from attrition.learners import ConvergenceFailure

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model, sol, _ = SVMModel.fit(SVM(C=10.0, tol=1e-6, max_iter=3), X, y, return_solution=True)
    assert not sol.converged and not model.converged
    assert any(issubclass(w.category, ConvergenceFailure) for w in caught)


# knn -----------------------------------------------------------------------

def test_kdtree_k_too_large():
    tree = KDTree(np.zeros((3, 2)))
    with pytest.raises(KTooLarge):
        tree.query(np.zeros(2), 4)


def test_kdtree_duplicate_points_ordered_by_index():
    X = np.zeros((10, 2))
    got = KDTree(X, leaf_size=2).query(np.zeros(2), 10)
    assert [i for i, _ in got] == list(range(10))
