"""Prompt/completion JSONL corpus and completion parsing."""
from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..errors import LengthMismatch
from ..tabular import Table, format_number

PROMPT_PREFIX = "Analyze the employee information and predict employee turnover: "


class Label(str, enum.Enum):
    YES = "Yes"
    NO = "No"
    UNPARSEABLE = "Unparseable"


@dataclass(frozen=True)
class PromptRecord:
    prompt: str
    completion: str

    def __post_init__(self):
        if not self.prompt.startswith(PROMPT_PREFIX):
            raise ValueError("prompt does not start with the template prefix")
        if self.completion not in (Label.YES.value, Label.NO.value):
            raise ValueError(f"completion must be Yes or No, got {self.completion!r}")


@dataclass(frozen=True)
class LlmPrediction:
    raw_completion: str
    parsed: Label


def _render(value) -> str:
    if isinstance(value, (float, int, np.floating, np.integer)) and not isinstance(value, bool):
        return format_number(value)
    return str(value)


def serialize_employee(record: Mapping) -> str:
    """``Name=Value`` pairs joined by ``"; "`` in the record's column order."""
    return "; ".join(f"{name}={_render(v)}" for name, v in record.items())


def employee_records(table: Table, exclude=()) -> list[dict]:
    """Rows of ``table`` as ordered dicts, skipping ``exclude`` columns (e.g. the target)."""
    names = [n for n in table.names if n not in set(exclude)]
    cols = [table[n] for n in names]
    return [dict(zip(names, (c[i] for c in cols))) for i in range(table.n_rows)]


def make_prompt(record: Mapping) -> str:
    return PROMPT_PREFIX + serialize_employee(record)


def _label_text(label) -> str:
    if isinstance(label, str):
        if label not in ("Yes", "No"):
            raise ValueError(f"label must be Yes/No, got {label!r}")
        return label
    return "Yes" if int(label) == 1 else "No"


def build_jsonl(rows, labels) -> str:
    """One ``{"prompt", "completion"}`` object per line, LF-terminated, in input order."""
    rows, labels = list(rows), list(labels)
    if len(rows) != len(labels):
        raise LengthMismatch(f"{len(rows)} rows vs {len(labels)} labels")
    lines = []
    for rec, lab in zip(rows, labels):
        item = PromptRecord(make_prompt(rec), _label_text(lab))
        lines.append(json.dumps({"prompt": item.prompt, "completion": item.completion},
                                ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def read_jsonl(text: str) -> list[PromptRecord]:
    out = []
    for n, line in enumerate(text.splitlines(), start=1):
        obj = json.loads(line)
        if not isinstance(obj, dict) or set(obj) != {"prompt", "completion"}:
            raise ValueError(f"line {n}: expected exactly the keys prompt and completion")
        out.append(PromptRecord(obj["prompt"], obj["completion"]))
    return out


_TOKEN = re.compile(r"(?<![A-Za-z0-9])(yes|no)(?![A-Za-z0-9])", re.IGNORECASE)


def parse_completion(text: str) -> Label:
    """First standalone yes/no token, case-insensitive; otherwise UNPARSEABLE."""
    m = _TOKEN.search(text or "")
    if m is None:
        return Label.UNPARSEABLE
    return Label.YES if m.group(1).lower() == "yes" else Label.NO


def readable_rows(X: np.ndarray, pipeline, feature_names) -> list[dict]:
    """Map processed (scaled, encoded) feature rows back to readable values.

    Used for synthetic rows, which have no raw counterpart: scaling is undone,
    categorical codes are rounded to the nearest valid code and decoded, and
    log1p columns are mapped back with expm1. Composites stay averaged.
    """
    X = np.asarray(X, dtype=np.float64)
    cols = {}
    for j, name in enumerate(feature_names):
        x = X[:, j]
        if pipeline.scaler_params:
            mean, std = pipeline.scaler_params[name]
            x = x * std + mean
        if name in pipeline.encoder_maps:
            inverse = {v: k for k, v in pipeline.encoder_maps[name].items()}
            codes = np.clip(np.rint(x), 0, len(inverse) - 1).astype(int)
            cols[name] = [inverse[c] for c in codes]
        elif name in pipeline.log1p_applied:
            cols[name] = np.round(np.expm1(x), 6).tolist()
        else:
            cols[name] = np.round(x, 6).tolist()
    return [{n: cols[n][i] for n in feature_names} for i in range(len(X))]


__all__ = ["PROMPT_PREFIX", "Label", "LlmPrediction", "PromptRecord", "build_jsonl",
           "employee_records", "make_prompt", "parse_completion", "read_jsonl",
           "readable_rows", "serialize_employee"]
