"""Column-oriented typed table, CSV ingestion and descriptive statistics."""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateColumn,
    EmptyFile,
    MissingValue,
    NonNumericColumn,
    UnknownColumn,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"

FEATURE = "feature"
TARGET = "target"
DROPPED_ID = "dropped-id"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str = NUMERIC
    role: str = FEATURE

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"bad column kind {self.kind!r}")
        if self.role not in (FEATURE, TARGET, DROPPED_ID):
            raise ValueError(f"bad column role {self.role!r}")


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    std: float
    min: float
    q25: float
    q50: float
    q75: float
    max: float


def _freeze(values, kind):
    if kind == NUMERIC:
        arr = np.array(values, dtype=np.float64)
    else:
        arr = np.array([str(v) for v in values], dtype=object)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Table:
    """Immutable table. Numeric columns are float64 arrays, categorical are object arrays of str."""

    schema: tuple
    columns: Mapping[str, np.ndarray] = field(repr=False)
    n_rows: int = 0

    def __post_init__(self):
        names = [c.name for c in self.schema]
        dupes = [n for n, k in Counter(names).items() if k > 1]
        if dupes:
            raise DuplicateColumn(f"duplicate column names: {dupes}")
        if set(names) != set(self.columns):
            raise ValueError("schema and column data disagree")
        for name, col in self.columns.items():
            if len(col) != self.n_rows:
                raise ValueError(f"column {name!r} has {len(col)} values, expected {self.n_rows}")

    @classmethod
    def from_columns(cls, data: Mapping[str, Sequence], schema: Iterable[ColumnSchema] | None = None):
        """Build a table from ``{name: values}``; kinds are inferred when no schema is given."""
        if schema is None:
            schema = [ColumnSchema(name, _infer_kind(values)) for name, values in data.items()]
        schema = tuple(schema)
        cols = {c.name: _freeze(data[c.name], c.kind) for c in schema}
        n = len(next(iter(cols.values()))) if cols else 0
        return cls(schema, cols, n)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.schema]

    @property
    def n_cols(self) -> int:
        return len(self.schema)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    def column_schema(self, name: str) -> ColumnSchema:
        for c in self.schema:
            if c.name == name:
                return c
        raise UnknownColumn(f"unknown column {name!r}")

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise UnknownColumn(f"unknown column {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self.columns

    def numeric(self, name: str) -> np.ndarray:
        if self.column_schema(name).kind != NUMERIC:
            raise NonNumericColumn(f"column {name!r} is not numeric")
        return self.columns[name]

    def feature_names(self, kind: str | None = None) -> list[str]:
        return [c.name for c in self.schema if c.role == FEATURE and (kind is None or c.kind == kind)]

    @property
    def target(self) -> str | None:
        targets = [c.name for c in self.schema if c.role == TARGET]
        return targets[0] if targets else None

    def with_columns(self, schema: Sequence[ColumnSchema], columns: Mapping[str, Sequence]) -> "Table":
        cols = {c.name: _freeze(columns[c.name], c.kind) for c in schema}
        return Table(tuple(schema), cols, self.n_rows)

    def take(self, rows: Sequence[int]) -> "Table":
        rows = np.asarray(rows, dtype=np.intp)
        cols = {}
        for c in self.schema:
            arr = self.columns[c.name][rows]
            arr.setflags(write=False)
            cols[c.name] = arr
        return Table(self.schema, cols, len(rows))

    def row(self, i: int) -> dict:
        return {c.name: self.columns[c.name][i] for c in self.schema}

    def to_matrix(self, names: Sequence[str] | None = None) -> np.ndarray:
        names = self.feature_names() if names is None else names
        return np.column_stack([self.numeric(n) for n in names]) if names else np.empty((self.n_rows, 0))

    def equals(self, other: "Table") -> bool:
        if self.schema != other.schema or self.n_rows != other.n_rows:
            return False
        return all(np.array_equal(self.columns[n], other.columns[n]) for n in self.names)


def _is_number(text: str) -> bool:
    try:
        return math.isfinite(float(text))
    except ValueError:
        return False


def _infer_kind(values) -> str:
    if isinstance(values, np.ndarray) and values.dtype.kind in "iuf":
        return NUMERIC
    ok = all(isinstance(v, (int, float, np.integer, np.floating)) or
             (isinstance(v, str) and _is_number(v)) for v in values)
    return NUMERIC if ok and len(values) else CATEGORICAL


def load_csv(path, schema: Sequence[ColumnSchema] | None = None) -> Table:
    """Read a CSV with one header row into a :class:`Table`.

    With ``schema=None`` a column is numeric iff every cell parses as a finite
    number. With an explicit schema, kinds and roles are taken from it and the
    header must name exactly its columns.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise EmptyFile(f"{path}: no header row")
    header, body = [h.strip() for h in rows[0]], rows[1:]
    dupes = [n for n, k in Counter(header).items() if k > 1]
    if dupes:
        raise DuplicateColumn(f"{path}: duplicate header names {dupes}")
    if not body:
        raise EmptyFile(f"{path}: header present but no data rows")

    raw = {name: [] for name in header}
    for i, rec in enumerate(body, start=1):
        if len(rec) != len(header):
            raise MissingValue(i, header[min(len(rec), len(header) - 1)])
        for name, cell in zip(header, rec):
            if cell.strip() == "":
                raise MissingValue(i, name)
            raw[name].append(cell)

    if schema is None:
        schema = [ColumnSchema(n, NUMERIC if all(_is_number(v) for v in raw[n]) else CATEGORICAL)
                  for n in header]
    else:
        schema = list(schema)
        if [c.name for c in schema] != header:
            missing = set(c.name for c in schema) ^ set(header)
            raise UnknownColumn(f"{path}: header does not match schema ({sorted(missing)})")
        for c in schema:
            if c.kind == NUMERIC:
                for i, v in enumerate(raw[c.name], start=1):
                    if not _is_number(v):
                        raise MissingValue(i, c.name)

    data = {c.name: ([float(v) for v in raw[c.name]] if c.kind == NUMERIC else raw[c.name])
            for c in schema}
    return Table.from_columns(data, schema)


def format_number(x: float) -> str:
    """Shortest round-tripping text for a float; integral values lose the ``.0``."""
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def write_csv(table: Table, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.names)
        cols = [table[n] for n in table.names]
        kinds = [c.kind for c in table.schema]
        for i in range(table.n_rows):
            writer.writerow([format_number(col[i]) if k == NUMERIC else col[i]
                             for col, k in zip(cols, kinds)])


def summarize(table: Table, column: str) -> SummaryStats:
    """Count, mean, sample std (n-1), min, linearly interpolated quartiles, max."""
    x = table.numeric(column)
    n = len(x)
    q25, q50, q75 = np.quantile(x, [0.25, 0.5, 0.75], method="linear")
    std = float(np.std(x, ddof=1)) if n > 1 else 0.0
    return SummaryStats(n, float(np.mean(x)), std, float(x.min()), float(q25),
                        float(q50), float(q75), float(x.max()))


def class_distribution(table: Table, target: str) -> list[tuple[str, int, float]]:
    """(label, count, fraction) sorted by descending count, then label."""
    col = table[target]
    n = table.n_rows
    counts = Counter(col.tolist())
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], str(kv[0])))
    return [(label, k, k / n) for label, k in ordered]


def histogram(table: Table, column: str, bins: int) -> list[tuple[float, float, int]]:
    """Equal-width bins over [min, max]; bins are half-open except the last."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    x = table.numeric(column)
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return [(lo, hi, len(x))]
    edges = np.linspace(lo, hi, bins + 1)
    idx = np.floor((x - lo) / (hi - lo) * bins).astype(np.intp)
    idx = np.clip(idx, 0, bins - 1)
    # float rounding can put an edge value one bin off; nudge against the edges
    idx[x < edges[idx]] -= 1
    bump = (idx < bins - 1) & (x >= edges[np.minimum(idx + 1, bins)])
    idx[bump] += 1
    counts = np.bincount(idx, minlength=bins)
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)]


def render_histogram(hist, width: int = 40) -> str:
    top = max((c for _, _, c in hist), default=0) or 1
    lines = []
    for lo, hi, c in hist:
        bar = "#" * round(width * c / top)
        lines.append(f"[{lo:>12.4g}, {hi:>12.4g}) {c:>6d} {bar}")
    return "\n".join(lines)
