"""Hyperparameter records for the seven classifiers; defaults are the experiment's settings."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import ClassVar, Union


def _positive(**kw):
    for k, v in kw.items():
        if v <= 0:
            raise ValueError(f"{k} must be positive, got {v}")


def _rate(lr):
    if not 0 < lr <= 1:
        raise ValueError(f"learning_rate must be in (0, 1], got {lr}")


@dataclass(frozen=True)
class LogisticRegression:
    variant: ClassVar[str] = "LogisticRegression"
    C: float = 1.0
    tol: float = 1e-6
    max_iter: int = 1000

    def __post_init__(self):
        _positive(C=self.C, tol=self.tol, max_iter=self.max_iter)


@dataclass(frozen=True)
class KNN:
    variant: ClassVar[str] = "KNN"
    k: int = 10
    weights: str = "uniform"
    minkowski_p: int = 2
    leaf_size: int = 50

    def __post_init__(self):
        _positive(k=self.k, leaf_size=self.leaf_size)
        if self.weights != "uniform" or self.minkowski_p != 2:
            raise ValueError("only uniform weights with Euclidean (p=2) distance are supported")


@dataclass(frozen=True)
class SVM:
    variant: ClassVar[str] = "SVM"
    kernel: str = "rbf"
    C: float = 200.0
    gamma: Union[str, float] = "scale"
    tol: float = 0.1
    max_iter: int = 1_000_000

    def __post_init__(self):
        _positive(C=self.C, tol=self.tol, max_iter=self.max_iter)
        if self.kernel not in ("rbf", "linear"):
            raise ValueError(f"unsupported kernel {self.kernel!r}")


@dataclass(frozen=True)
class DecisionTree:
    variant: ClassVar[str] = "DecisionTree"
    max_depth: int = 5
    criterion: str = "gini"
    min_samples_split: int = 2

    def __post_init__(self):
        _positive(max_depth=self.max_depth)
        if self.criterion != "gini":
            raise ValueError("only the gini criterion is implemented")


@dataclass(frozen=True)
class RandomForest:
    variant: ClassVar[str] = "RandomForest"
    n_trees: int = 200
    max_depth: int = 5
    max_features: Union[str, int, float, None] = "sqrt"
    bootstrap: bool = True
    min_samples_split: int = 2

    def __post_init__(self):
        _positive(n_trees=self.n_trees, max_depth=self.max_depth)


@dataclass(frozen=True)
class AdaBoost:
    variant: ClassVar[str] = "AdaBoost"
    n_estimators: int = 150
    learning_rate: float = 0.01
    algorithm: str = "SAMME"
    base_depth: int = 1

    def __post_init__(self):
        _positive(n_estimators=self.n_estimators, base_depth=self.base_depth)
        _rate(self.learning_rate)
        if self.algorithm != "SAMME":
            raise ValueError("only SAMME is implemented")


@dataclass(frozen=True)
class GradientBoost:
    variant: ClassVar[str] = "GradientBoost"
    objective: str = "binary:logistic"
    learning_rate: float = 0.01
    n_estimators: int = 350
    max_depth: int = 3
    col_subsample: Union[str, None] = "sqrt"
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0

    def __post_init__(self):
        _positive(n_estimators=self.n_estimators, max_depth=self.max_depth)
        _rate(self.learning_rate)
        if self.reg_lambda < 0:
            raise ValueError("reg_lambda must be >= 0")
        if self.objective != "binary:logistic":
            raise ValueError("only the binary:logistic objective is implemented")


SPECS = {cls.variant: cls for cls in
         (LogisticRegression, KNN, SVM, DecisionTree, RandomForest, AdaBoost, GradientBoost)}

# display names used in reports, in report order
DISPLAY_NAMES = {
    "LogisticRegression": "Logistic Regression",
    "KNN": "KNN",
    "SVM": "SVM",
    "DecisionTree": "Decision Tree",
    "RandomForest": "Random Forest",
    "AdaBoost": "AdaBoost",
    "GradientBoost": "XGBoost",
}


def hyperparameters(spec) -> dict:
    return asdict(spec)


def make_spec(variant: str, **overrides):
    try:
        cls = SPECS[variant]
    except KeyError:
        raise ValueError(f"unknown learner {variant!r}; choose from {sorted(SPECS)}") from None
    known = {f.name for f in fields(cls)}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown hyperparameters for {variant}: {sorted(unknown)}")
    return cls(**overrides)
