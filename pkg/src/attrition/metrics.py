"""Confusion counts, precision / recall / F1, support-weighted averages and report rendering."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import EmptyReport, LengthMismatch, NonBinaryLabel


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def flipped(self) -> "ConfusionMatrix":
        """Same counts with class 0 treated as the positive class."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, fn=self.fp, tn=self.tp)


@dataclass(frozen=True)
class ClassReport:
    label: int
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class WeightedReport:
    classes: tuple
    precision: float
    recall: float
    f1: float

    @property
    def support(self) -> int:
        return sum(c.support for c in self.classes)


def _binary(name, values):
    arr = np.asarray(values)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise NonBinaryLabel(f"{name} contains labels other than 0/1")
    return arr.astype(np.int64)


def confusion(y_true, y_pred) -> ConfusionMatrix:
    """Counts with class 1 (attrition) as the positive class."""
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    t = _binary("y_true", y_true)
    p = _binary("y_pred", y_pred)
    return ConfusionMatrix(
        tp=int(np.sum((t == 1) & (p == 1))),
        fp=int(np.sum((t == 0) & (p == 1))),
        fn=int(np.sum((t == 1) & (p == 0))),
        tn=int(np.sum((t == 0) & (p == 0))),
    )


def precision_recall_f1(cm: ConfusionMatrix) -> tuple[float, float, float]:
    """Zero denominators give 0 rather than raising."""
    p = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    r = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


def class_reports(y_true, y_pred) -> list[ClassReport]:
    cm = confusion(y_true, y_pred)
    out = []
    for label, m in ((0, cm.flipped()), (1, cm)):
        p, r, f1 = precision_recall_f1(m)
        out.append(ClassReport(label, p, r, f1, m.tp + m.fn))
    return out


def weighted_average(reports) -> WeightedReport:
    """Support-weighted mean of each per-class metric; zero-support classes are skipped."""
    reports = tuple(r for r in reports if r.support > 0)
    if not reports:
        raise EmptyReport("no class with positive support")
    total = sum(r.support for r in reports)
    def avg(attr):
        return sum(r.support * getattr(r, attr) for r in reports) / total
    return WeightedReport(reports, avg("precision"), avg("recall"), avg("f1"))


def evaluate(y_true, y_pred) -> WeightedReport:
    return weighted_average(class_reports(y_true, y_pred))


HEADER = ("Model", "Precision", "Recall", "F1-score")


def render_report(rows) -> str:
    """Aligned text table of ``(model name, WeightedReport)`` rows, 2-decimal values."""
    body = [(name, f"{r.precision:.2f}", f"{r.recall:.2f}", f"{r.f1:.2f}") for name, r in rows]
    widths = [max(len(x[i]) for x in [HEADER, *body]) for i in range(4)]
    def fmt(cells):
        return "  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                         for i, (c, w) in enumerate(zip(cells, widths))).rstrip()
    lines = [fmt(HEADER), fmt(["-" * w for w in widths])]
    lines += [fmt(b) for b in body]
    return "\n".join(lines) + "\n"


def render_report_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "precision", "recall", "f1", "support"])
    for name, r in rows:
        w.writerow([name, f"{r.precision:.4f}", f"{r.recall:.4f}", f"{r.f1:.4f}", r.support])
    return buf.getvalue()


def parse_report_csv(text: str) -> list[dict]:
    return [
        {"model": rec["model"], "precision": float(rec["precision"]),
         "recall": float(rec["recall"]), "f1": float(rec["f1"]), "support": int(rec["support"])}
        for rec in csv.DictReader(io.StringIO(text))
    ]
