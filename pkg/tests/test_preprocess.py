import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp
from scipy import stats

from attrition.errors import (
    ClassTooSmall,
    DegenerateColumn,
    NegativeValue,
    UnseenCategory,
    ZeroVariance,
)
from attrition.preprocess import (
    FittedPipeline,
    PipelineSpec,
    apply_log1p,
    drop_columns,
    encode_categoricals,
    engineer_composites,
    fit_pipeline,
    fit_scaler,
    skewness,
    stratified_allocation,
    stratified_split,
)
from attrition.tabular import CATEGORICAL, FEATURE, NUMERIC, ColumnSchema, Table

EXPECTED_FEATURES = [
    "Age", "BusinessTravel", "DailyRate", "Department", "DistanceFromHome", "Education",
    "EducationField", "Gender", "HourlyRate", "JobInvolvement", "JobLevel", "JobRole",
    "MaritalStatus", "MonthlyIncome", "MonthlyRate", "NumCompaniesWorked", "OverTime",
    "PercentSalaryHike", "PerformanceRating", "StockOptionLevel", "TrainingTimesLastYear",
    "WorkExperience", "OverallSatisfaction",
]


def _skew_oracle(x):
    """Adjusted Fisher-Pearson coefficient written out from the moment definitions."""
    n = len(x)
    mean = sum(x) / n
    m2 = sum((v - mean) ** 2 for v in x) / n
    m3 = sum((v - mean) ** 3 for v in x) / n
    return m3 / m2 ** 1.5 * math.sqrt(n * (n - 1)) / (n - 2)


@given(hnp.arrays(np.float64, st.integers(3, 60),
                  elements=st.floats(-1e3, 1e3, allow_nan=False)))
@settings(max_examples=200, deadline=None)
def test_skewness_matches_oracles(x):
    assume(np.ptp(x) > 1e-3)
    got = skewness(x)
    assert got == pytest.approx(_skew_oracle(x.tolist()), rel=1e-6, abs=1e-9)
    assert got == pytest.approx(stats.skew(x, bias=False), rel=1e-6, abs=1e-9)


def test_skewness_degenerate():
    with pytest.raises(DegenerateColumn):
        skewness([1.0, 1.0, 1.0])
    with pytest.raises(DegenerateColumn):
        skewness([1.0, 2.0])


def test_log1p_rejects_negative():
    t = Table.from_columns({"a": [1.0, -2.0, 3.0]})
    with pytest.raises(NegativeValue) as info:
        apply_log1p(t, ["a"])
    assert info.value.row == 1


def test_composites_mean_and_drop_sources():
    t = Table.from_columns({"a": [1.0, 3.0], "b": [3.0, 5.0], "c": [0.0, 1.0]})
    out = engineer_composites(t, [["ab", ["a", "b"]]])
    assert out.names == ["c", "ab"]
    assert out["ab"].tolist() == [2.0, 4.0]


def test_encoder_sorted_and_unseen():
    t = Table.from_columns({"d": ["b", "a", "c", "a"]})
    enc, maps = encode_categoricals(t)
    assert maps == {"d": {"a": 0, "b": 1, "c": 2}}
    assert enc["d"].tolist() == [1.0, 0.0, 2.0, 0.0]
    with pytest.raises(UnseenCategory):
        encode_categoricals(Table.from_columns({"d": ["z"]}), maps)


@given(st.dictionaries(st.integers(0, 4), st.integers(2, 500), min_size=2, max_size=5),
       st.floats(0.05, 0.95))
def test_allocation_totals(counts, frac):
    alloc = stratified_allocation(counts, frac)
    assert sum(alloc.values()) == math.floor(sum(counts.values()) * frac + 0.5)
    for c, k in counts.items():
        assert abs(alloc[c] - k * frac) < 1 + 1e-9


def test_ibm_allocation():
    assert stratified_allocation({0: 1233, 1: 237}, 0.2) == {0: 247, 1: 47}


@given(st.integers(0, 2**31))
@settings(max_examples=20, deadline=None)
def test_split_partitions_rows(seed):
    y = np.array([0] * 30 + [1] * 9)
    X = Table.from_columns({"x": np.arange(39.0)})
    s = stratified_split(X, y, 0.25, seed)
    both = np.concatenate([s.train_index, s.test_index])
    assert sorted(both.tolist()) == list(range(39))
    assert np.all(np.diff(s.train_index) > 0) and np.all(np.diff(s.test_index) > 0)
    assert np.bincount(s.y_test).tolist() == [8, 2]  # 7.5 -> 8, 2.25 -> 2
    again = stratified_split(X, y, 0.25, seed)
    assert np.array_equal(again.test_index, s.test_index)


def test_split_class_too_small():
    X = Table.from_columns({"x": [1.0, 2.0, 3.0]})
    with pytest.raises(ClassTooSmall):
        stratified_split(X, np.array([0, 0, 1]))


def test_zero_variance():
    with pytest.raises(ZeroVariance):
        fit_scaler(Table.from_columns({"x": [2.0, 2.0]}))


def test_pipeline_spec_validation():
    with pytest.raises(ValueError):
        PipelineSpec(test_fraction=1.5)
    with pytest.raises(ValueError):
        PipelineSpec(drop_columns=("TotalWorkingYears",))


def test_ibm_pipeline_shape(ibm):
    fitted, split = fit_pipeline(ibm)
    assert split.feature_names == EXPECTED_FEATURES
    assert split.X_train.shape == (1176, 23) and split.X_test.shape == (294, 23)
    X = split.X_train.to_matrix()
    # scaler fitted on train only: train is exactly standardized, test is not
    np.testing.assert_allclose(X.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(X.std(axis=0), 1, atol=1e-12)
    assert not np.allclose(split.X_test.to_matrix().mean(axis=0), 0, atol=1e-3)
    assert "MonthlyIncome" in fitted.log1p_applied
    assert "Age" not in fitted.log1p_applied


def test_pipeline_json_replay_is_bit_identical(ibm):
    spec = PipelineSpec(seed=11)
    fitted, split = fit_pipeline(ibm, spec)
    replayed = FittedPipeline.from_json(fitted.to_json()).transform(ibm)
    assert replayed.X_train.equals(split.X_train)
    assert replayed.X_test.equals(split.X_test)
    assert np.array_equal(replayed.y_test, split.y_test)


def test_target_encoding_no_yes(ibm):
    fitted, split = fit_pipeline(ibm)
    assert fitted.encoder_maps["Attrition"] == {"No": 0, "Yes": 1}
    assert fitted.decode("Attrition", [0, 1]) == ["No", "Yes"]


def test_drop_unknown_column(ibm):
    from attrition.errors import UnknownColumn

    with pytest.raises(UnknownColumn):
        drop_columns(ibm, ["Nope"])


def test_constant_columns_skip_log1p():
    schema = [ColumnSchema("k", NUMERIC, FEATURE), ColumnSchema("y", CATEGORICAL, "target")]
    t = Table.from_columns({"k": [5.0] * 6, "y": ["No", "Yes"] * 3}, schema)
    from attrition.preprocess import apply_log1p_where_skewed

    out, chosen = apply_log1p_where_skewed(t)
    assert chosen == [] and out["k"].tolist() == [5.0] * 6
