"""Seven binary classifiers behind one ``fit`` / ``predict`` / ``decision_scores`` contract."""
import json

from ..errors import CorruptPayload, VersionMismatch
from .adaboost import AdaBoostModel, adaboost_round, samme_alpha
from .base import ConvergenceFailure, FittedModel, derive_seed
from .forest import RandomForestModel
from .gbt import GradientBoostModel, gbt_round, log_loss
from .knn import KDTree, KNNModel, brute_force_query, knn_query
from .logistic import LogisticModel, logistic_loss_grad
from .specs import (
    DISPLAY_NAMES,
    KNN,
    SPECS,
    SVM,
    AdaBoost,
    DecisionTree,
    GradientBoost,
    LogisticRegression,
    RandomForest,
    hyperparameters,
    make_spec,
)
from .svm import SVMModel, dual_objective, rbf_kernel, scale_gamma, smo_solve
from .tree import DecisionTreeModel, Tree, best_split

MODEL_FORMAT_VERSION = 1

MODELS = {
    "LogisticRegression": LogisticModel,
    "KNN": KNNModel,
    "SVM": SVMModel,
    "DecisionTree": DecisionTreeModel,
    "RandomForest": RandomForestModel,
    "AdaBoost": AdaBoostModel,
    "GradientBoost": GradientBoostModel,
}


def fit(spec, X, y, seed: int = 0) -> FittedModel:
    """Train the learner described by ``spec``; deterministic given ``seed``."""
    return MODELS[spec.variant].fit(spec, X, y, seed)


def predict(model: FittedModel, X):
    return model.predict(X)


def decision_scores(model: FittedModel, X):
    return model.decision_scores(X)


def save_model(model: FittedModel) -> bytes:
    """JSON envelope ``{format_version, variant, hyperparameters, parameters, seed, ...}``.

    Floats are written with ``repr`` precision so a reload predicts bit-identically.
    """
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "variant": model.variant,
        "hyperparameters": hyperparameters(model.spec),
        "parameters": model.parameters(),
        "seed": model.seed,
        "n_features": model.n_features,
        "converged": model.converged,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def load_model(payload: bytes) -> FittedModel:
    try:
        doc = json.loads(payload.decode("utf-8"))
        version = doc["format_version"]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
        raise CorruptPayload(f"model payload is not a valid envelope: {exc}") from None
    if version != MODEL_FORMAT_VERSION:
        raise VersionMismatch(f"model format {version!r}, expected {MODEL_FORMAT_VERSION}")
    try:
        spec = make_spec(doc["variant"], **doc["hyperparameters"])
        cls = MODELS[doc["variant"]]
        return cls.from_parameters(spec, doc["parameters"], doc["n_features"], doc["seed"],
                                   doc["converged"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptPayload(f"model payload is malformed: {exc}") from None


__all__ = [
    "AdaBoost", "DecisionTree", "GradientBoost", "KNN", "LogisticRegression", "RandomForest",
    "SVM", "SPECS", "DISPLAY_NAMES", "MODELS", "ConvergenceFailure", "FittedModel", "KDTree",
    "Tree", "adaboost_round", "best_split", "brute_force_query", "decision_scores",
    "derive_seed", "dual_objective", "fit", "gbt_round", "hyperparameters", "knn_query",
    "load_model", "log_loss", "logistic_loss_grad", "make_spec", "predict", "rbf_kernel",
    "samme_alpha", "save_model", "scale_gamma", "smo_solve",
]
