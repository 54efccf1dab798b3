import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from attrition.errors import EmptyReport, LengthMismatch, NonBinaryLabel
from attrition.metrics import (
    ClassReport,
    class_reports,
    confusion,
    evaluate,
    parse_report_csv,
    precision_recall_f1,
    render_report,
    render_report_csv,
    weighted_average,
)

labels = st.lists(st.integers(0, 1), min_size=1, max_size=80)


@given(labels, st.data())
def test_confusion_counts_sum(t, data):
    p = data.draw(st.lists(st.integers(0, 1), min_size=len(t), max_size=len(t)))
    cm = confusion(t, p)
    assert cm.total == len(t)
    assert cm.tp + cm.fn == sum(t)
    assert cm.flipped().flipped() == cm


def test_known_values():
    t = [1, 1, 1, 0, 0, 0, 0, 0]
    p = [1, 1, 0, 1, 0, 0, 0, 0]
    cm = confusion(t, p)
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == (2, 1, 1, 4)
    prec, rec, f1 = precision_recall_f1(cm)
    assert (prec, rec) == (2 / 3, 2 / 3)
    assert f1 == pytest.approx(2 / 3)
    rep = evaluate(t, p)
    assert rep.support == 8
    assert rep.recall == pytest.approx((3 * 2 / 3 + 5 * 4 / 5) / 8)


def test_perfect_prediction_is_one():
    y = np.array([0, 1, 1, 0, 1])
    rep = evaluate(y, y)
    assert (rep.precision, rep.recall, rep.f1) == (1.0, 1.0, 1.0)


def test_zero_denominators():
    cm = confusion([0, 0], [0, 0])
    assert precision_recall_f1(cm) == (0.0, 0.0, 0.0)
    rep = evaluate([0, 0], [0, 0])
    assert [c.label for c in rep.classes] == [0]


def test_errors():
    with pytest.raises(LengthMismatch):
        confusion([0, 1], [0])
    with pytest.raises(NonBinaryLabel):
        confusion([0, 2], [0, 1])
    with pytest.raises(EmptyReport):
        weighted_average([ClassReport(0, 0.0, 0.0, 0.0, 0)])


@given(labels, st.data())
def test_weighted_recall_is_accuracy(t, data):
    p = data.draw(st.lists(st.integers(0, 1), min_size=len(t), max_size=len(t)))
    rep = evaluate(t, p)
    acc = np.mean(np.array(t) == np.array(p))
    assert rep.recall == pytest.approx(acc)
    assert 0.0 <= rep.precision <= 1.0 and 0.0 <= rep.f1 <= 1.0


def test_class_reports_labels():
    reps = class_reports([0, 1, 1], [0, 1, 0])
    assert [r.label for r in reps] == [0, 1]
    assert [r.support for r in reps] == [1, 2]


def test_render_and_csv_roundtrip():
    rows = [("Logistic Regression", evaluate([0, 1, 1, 0], [0, 1, 0, 0])),
            ("SVM", evaluate([0, 1, 1, 0], [0, 1, 1, 0]))]
    text = render_report(rows)
    lines = text.splitlines()
    assert lines[0].split() == ["Model", "Precision", "Recall", "F1-score"]
    assert lines[2].startswith("Logistic Regression")
    assert lines[3].endswith("1.00")
    parsed = parse_report_csv(render_report_csv(rows))
    assert [r["model"] for r in parsed] == ["Logistic Regression", "SVM"]
    assert parsed[1]["f1"] == 1.0 and parsed[0]["support"] == 4
    assert parsed[0]["recall"] == pytest.approx(rows[0][1].recall, abs=5e-5)
