"""Preprocessing: drops, skew-gated log1p, composites, label encoding, stratified split, scaling.

The forward order is fixed: drop -> log1p -> composites -> encode -> split -> scale.
Every fitted quantity lands in a :class:`FittedPipeline`, which can be written to
JSON and replayed on a raw-schema table.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    ClassTooSmall,
    DegenerateColumn,
    NegativeValue,
    NonNumericColumn,
    UnknownColumn,
    UnseenCategory,
    ZeroVariance,
)
from .tabular import CATEGORICAL, FEATURE, NUMERIC, TARGET, ColumnSchema, Table

PIPELINE_FORMAT_VERSION = 1

DEFAULT_DROPS = ("EmployeeCount", "StandardHours", "Over18", "EmployeeNumber")
DEFAULT_COMPOSITES = (
    ("WorkExperience", ("TotalWorkingYears", "YearsAtCompany", "YearsInCurrentRole",
                        "YearsSinceLastPromotion", "YearsWithCurrManager")),
    ("OverallSatisfaction", ("JobSatisfaction", "EnvironmentSatisfaction",
                             "RelationshipSatisfaction", "WorkLifeBalance")),
)


@dataclass(frozen=True)
class PipelineSpec:
    drop_columns: tuple = DEFAULT_DROPS
    skew_threshold: float = 0.5
    composites: tuple = DEFAULT_COMPOSITES
    target: str = "Attrition"
    test_fraction: float = 0.2
    seed: int = 0
    standardize: bool = True

    def __post_init__(self):
        if not 0 < self.test_fraction < 1:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.skew_threshold < 0:
            raise ValueError("skew_threshold must be >= 0")
        sources = {s for _, srcs in self.composites for s in srcs}
        clash = sources & set(self.drop_columns)
        if clash:
            raise ValueError(f"composite sources are also dropped: {sorted(clash)}")


@dataclass
class SplitResult:
    X_train: Table
    X_test: Table
    y_train: np.ndarray
    y_test: np.ndarray
    seed: int
    train_index: np.ndarray = field(repr=False, default=None)
    test_index: np.ndarray = field(repr=False, default=None)

    @property
    def feature_names(self) -> list[str]:
        return self.X_train.names


@dataclass
class FittedPipeline:
    dropped: list
    log1p_applied: list
    composite_defs: list
    encoder_maps: dict
    scaler_params: dict
    target: str
    test_fraction: float
    seed: int
    feature_names: list = field(default_factory=list)
    format_version: int = PIPELINE_FORMAT_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FittedPipeline":
        doc = json.loads(text)
        if doc.get("format_version") != PIPELINE_FORMAT_VERSION:
            raise ValueError(f"unsupported pipeline format {doc.get('format_version')!r}")
        doc["composite_defs"] = [[name, list(srcs)] for name, srcs in doc["composite_defs"]]
        return cls(**doc)

    def transform(self, raw: Table) -> SplitResult:
        """Replay every fitted step on a raw-schema table."""
        table = drop_columns(raw, self.dropped)
        table = apply_log1p(table, self.log1p_applied)
        table = engineer_composites(table, self.composite_defs)
        table, _ = encode_categoricals(table, self.encoder_maps)
        split = _split_encoded(table, self.target, self.test_fraction, self.seed)
        if self.scaler_params:
            split.X_train = apply_scaler(split.X_train, self.scaler_params)
            split.X_test = apply_scaler(split.X_test, self.scaler_params)
        return split

    def decode(self, column: str, codes) -> list[str]:
        inverse = {v: k for k, v in self.encoder_maps[column].items()}
        return [inverse[int(c)] for c in codes]


def drop_columns(table: Table, names) -> Table:
    for n in names:
        table.column_schema(n)
    keep = [c for c in table.schema if c.name not in set(names)]
    return table.with_columns(keep, table.columns)


def skewness(values) -> float:
    """Adjusted Fisher-Pearson sample skewness G1 = g1 * sqrt(n(n-1)) / (n-2)."""
    x = np.asarray(values, dtype=np.float64)
    n = len(x)
    if n < 3:
        raise DegenerateColumn(f"skewness needs at least 3 values, got {n}")
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 <= 0.0:
        raise DegenerateColumn("skewness of a constant column is undefined")
    m3 = np.mean(d * d * d)
    g1 = m3 / m2**1.5
    return float(g1 * math.sqrt(n * (n - 1)) / (n - 2))


def apply_log1p(table: Table, names) -> Table:
    cols = dict(table.columns)
    for name in names:
        x = table.numeric(name)
        neg = np.flatnonzero(x < 0)
        if neg.size:
            raise NegativeValue(name, int(neg[0]))
        cols[name] = np.log1p(x)
    return table.with_columns(table.schema, cols)


def apply_log1p_where_skewed(table: Table, threshold: float = 0.5) -> tuple[Table, list[str]]:
    """log1p every numeric feature whose skewness exceeds ``threshold``.

    Constant columns have no skewness and are left alone.
    """
    chosen = []
    for name in table.feature_names(NUMERIC):
        try:
            s = skewness(table[name])
        except DegenerateColumn:
            continue
        if s > threshold:
            chosen.append(name)
    return apply_log1p(table, chosen), chosen


def engineer_composites(table: Table, composites) -> Table:
    """Append each composite as the row-wise mean of its sources and drop the sources."""
    cols = dict(table.columns)
    schema = list(table.schema)
    consumed = set()
    for name, sources in composites:
        for s in sources:
            if table.column_schema(s).kind != NUMERIC:
                raise NonNumericColumn(f"composite source {s!r} is not numeric")
        cols[name] = np.mean(np.column_stack([table[s] for s in sources]), axis=1)
        schema.append(ColumnSchema(name, NUMERIC, FEATURE))
        consumed.update(sources)
    schema = [c for c in schema if c.name not in consumed]
    return table.with_columns(schema, cols)


def fit_label_encoder(values) -> dict:
    return {v: i for i, v in enumerate(sorted(set(values)))}


def encode_categoricals(table: Table, maps: dict | None = None) -> tuple[Table, dict]:
    """Label-encode categorical columns by sorted unique value.

    With ``maps`` given, replay those maps instead of fitting; unknown values
    raise :class:`UnseenCategory`.
    """
    fitted = {} if maps is None else maps
    cols = dict(table.columns)
    schema = []
    for c in table.schema:
        if c.kind != CATEGORICAL:
            schema.append(c)
            continue
        if maps is None:
            fitted[c.name] = fit_label_encoder(table[c.name].tolist())
        elif c.name not in maps:
            raise UnknownColumn(f"no encoder map for column {c.name!r}")
        mapping = fitted[c.name]
        codes = np.empty(table.n_rows, dtype=np.float64)
        for i, v in enumerate(table[c.name]):
            try:
                codes[i] = mapping[v]
            except KeyError:
                raise UnseenCategory(c.name, v) from None
        cols[c.name] = codes
        schema.append(ColumnSchema(c.name, NUMERIC, c.role))
    return table.with_columns(schema, cols), fitted


def stratified_allocation(counts: dict, test_fraction: float) -> dict:
    """Per-class test counts: floors plus largest-remainder top-up to round(n * fraction)."""
    n = sum(counts.values())
    total = math.floor(n * test_fraction + 0.5)
    exact = {c: k * test_fraction for c, k in counts.items()}
    alloc = {c: math.floor(e) for c, e in exact.items()}
    leftover = total - sum(alloc.values())
    by_remainder = sorted(counts, key=lambda c: (-(exact[c] - alloc[c]), c))
    for c in by_remainder[:leftover]:
        alloc[c] += 1
    return alloc


def stratified_split(X: Table, y, test_fraction: float = 0.2, seed: int = 0) -> SplitResult:
    """Seeded stratified train/test split; rows keep their original order within each part."""
    y = np.asarray(y)
    if len(y) != X.n_rows:
        raise ValueError(f"{len(y)} labels for {X.n_rows} rows")
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    labels, counts = np.unique(y, return_counts=True)
    small = [lab for lab, k in zip(labels.tolist(), counts.tolist()) if k < 2]
    if small:
        raise ClassTooSmall(f"classes with fewer than 2 members: {small}")
    alloc = stratified_allocation(dict(zip(labels.tolist(), counts.tolist())), test_fraction)
    rng = np.random.default_rng(seed)
    test_parts = []
    for lab in labels.tolist():
        members = np.flatnonzero(y == lab)
        test_parts.append(rng.permutation(members)[: alloc[lab]])
    test_idx = np.sort(np.concatenate(test_parts))
    mask = np.ones(len(y), dtype=bool)
    mask[test_idx] = False
    train_idx = np.flatnonzero(mask)
    return SplitResult(X.take(train_idx), X.take(test_idx), y[train_idx], y[test_idx],
                       seed, train_idx, test_idx)


def fit_scaler(train: Table) -> dict:
    params = {}
    for name in train.names:
        x = train.numeric(name)
        std = float(np.std(x))
        if std == 0.0:
            raise ZeroVariance(f"column {name!r} has zero variance in the training split")
        params[name] = [float(np.mean(x)), std]
    return params


def apply_scaler(table: Table, params: dict) -> Table:
    cols = {}
    for name in table.names:
        mean, std = params[name]
        cols[name] = (table.numeric(name) - mean) / std
    return table.with_columns(table.schema, cols)


def standardize(train: Table, test: Table) -> tuple[Table, Table, dict]:
    """Fit (mean, population std) on ``train`` and apply to both tables."""
    params = fit_scaler(train)
    return apply_scaler(train, params), apply_scaler(test, params), params


def _split_encoded(table: Table, target: str, test_fraction: float, seed: int) -> SplitResult:
    if table.column_schema(target).role != TARGET:
        raise ValueError(f"column {target!r} is not marked as the target")
    y = table[target].astype(np.int64)
    features = [c for c in table.schema if c.role == FEATURE]
    X = table.with_columns(features, table.columns)
    return stratified_split(X, y, test_fraction, seed)


def fit_pipeline(raw: Table, spec: PipelineSpec = PipelineSpec()) -> tuple[FittedPipeline, SplitResult]:
    """Run every step forward on ``raw``; return the fitted record and the split."""
    table = drop_columns(raw, spec.drop_columns)
    id_cols = [c.name for c in table.schema if c.role not in (FEATURE, TARGET)]
    table = drop_columns(table, id_cols)
    table, logged = apply_log1p_where_skewed(table, spec.skew_threshold)
    composites = [[name, list(srcs)] for name, srcs in spec.composites]
    table = engineer_composites(table, composites)
    table, maps = encode_categoricals(table)
    split = _split_encoded(table, spec.target, spec.test_fraction, spec.seed)
    params = {}
    if spec.standardize:
        split.X_train, split.X_test, params = standardize(split.X_train, split.X_test)
    fitted = FittedPipeline(
        dropped=list(spec.drop_columns) + id_cols,
        log1p_applied=logged,
        composite_defs=composites,
        encoder_maps=maps,
        scaler_params=params,
        target=spec.target,
        test_fraction=spec.test_fraction,
        seed=spec.seed,
        feature_names=split.X_train.names,
    )
    return fitted, split
