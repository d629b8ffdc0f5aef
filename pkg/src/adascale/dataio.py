"""CSV ingestion, feature-kind tagging, splits and CV folds."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ArgumentError, DataError
from .numerics import _generator

KINDS = ("numeric", "binary", "categorical", "ordinal")

# Columns of the UCI "default of credit card clients" sheet saved as CSV.
CREDIT_COLUMNS = (
    "ID", "LIMIT_BAL", "SEX", "EDUCATION", "MARRIAGE", "AGE",
    "PAY_0", "PAY_2", "PAY_3", "PAY_4", "PAY_5", "PAY_6",
    "BILL_AMT1", "BILL_AMT2", "BILL_AMT3", "BILL_AMT4", "BILL_AMT5", "BILL_AMT6",
    "PAY_AMT1", "PAY_AMT2", "PAY_AMT3", "PAY_AMT4", "PAY_AMT5", "PAY_AMT6",
    "default payment next month",
)
CREDIT_TARGET = "default payment next month"
CREDIT_KINDS = {"MARRIAGE": "categorical", "EDUCATION": "ordinal"}


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    feature_names: tuple[str, ...]
    feature_kinds: tuple[str, ...]
    y: np.ndarray | None = None
    target_name: str = ""

    def __post_init__(self):
        p = self.X.shape[1]
        if len(self.feature_names) != p or len(self.feature_kinds) != p:
            raise ArgumentError("feature names/kinds do not match the number of columns")
        if self.y is not None and self.y.shape[0] != self.X.shape[0]:
            raise ArgumentError("X and y have different numbers of rows")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def take(self, rows) -> "Dataset":
        return replace(self, X=self.X[rows], y=None if self.y is None else self.y[rows])


def _parse_cell(text: str, line: int, column: str) -> float:
    try:
        if "_" in text:
            raise ValueError
        v = float(text)
        if not math.isfinite(v):
            raise ValueError
    except ValueError:
        raise DataError(f"unparseable value {text!r} at row {line}, column {column!r}") from None
    return v


def infer_kind(column: np.ndarray) -> str:
    return "binary" if np.unique(column).size <= 2 else "numeric"


def load_csv(path, target_column: str | None, kind_overrides: Mapping[str, str] | None = None,
             drop_columns: Sequence[str] = ("ID",), one_hot: bool = False) -> Dataset:
    """Read a header-first, comma-separated numeric file.

    Row numbers in error messages are 1-based file lines (the header is line 1).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        seen = set()
        for h in header:
            if h in seen:
                raise DataError(f"duplicate column name {h!r}")
            seen.add(h)
        if target_column is not None and target_column not in seen:
            raise DataError(f"target column {target_column!r} not found in header")
        rows = []
        for line, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise DataError(f"row {line} has {len(rec)} fields, header has {len(header)}")
            rows.append([_parse_cell(c.strip(), line, header[k]) for k, c in enumerate(rec)])
    if not rows:
        raise DataError(f"{path} has no data rows")
    data = np.array(rows, dtype=np.float64)

    keep = [k for k, h in enumerate(header) if h != target_column and h not in set(drop_columns)]
    names = tuple(header[k] for k in keep)
    X = data[:, keep]
    y = None
    if target_column is not None:
        y = data[:, header.index(target_column)]
        if np.all(y == np.round(y)):
            y = y.astype(np.int64)

    overrides = dict(kind_overrides or {})
    for name, kind in overrides.items():
        if kind not in KINDS:
            raise ArgumentError(f"unknown feature kind {kind!r} for {name!r}")
    kinds = tuple(overrides.get(nm, infer_kind(X[:, j])) for j, nm in enumerate(names))
    for j, k in enumerate(kinds):
        if k == "binary" and np.unique(X[:, j]).size > 2:
            raise DataError(f"column {names[j]!r} declared binary but has more than 2 values")
    d = Dataset(X, names, kinds, y, target_column or "")
    return one_hot_encode(d) if one_hot else d


def one_hot_encode(d: Dataset) -> Dataset:
    """Replace each categorical column by 0/1 indicators (first level dropped)."""
    cols, names, kinds = [], [], []
    for j, (nm, kind) in enumerate(zip(d.feature_names, d.feature_kinds)):
        if kind != "categorical":
            cols.append(d.X[:, j])
            names.append(nm)
            kinds.append(kind)
            continue
        for level in np.unique(d.X[:, j])[1:]:
            cols.append((d.X[:, j] == level).astype(np.float64))
            names.append(f"{nm}={level:g}")
            kinds.append("binary")
    return Dataset(np.column_stack(cols), tuple(names), tuple(kinds), d.y, d.target_name)


def write_csv(d: Dataset, path) -> None:
    """Write ``d`` so that :func:`load_csv` reproduces ``X`` bit for bit."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = list(d.feature_names) + ([d.target_name] if d.y is not None else [])
        w.writerow(header)
        for i in range(d.n):
            row = [format(v, ".17g") for v in d.X[i]]
            if d.y is not None:
                row.append(format(d.y[i], ".17g") if d.y.dtype.kind == "f" else str(d.y[i]))
            w.writerow(row)


@dataclass(frozen=True)
class Split:
    train: Dataset
    test: Dataset
    train_index: np.ndarray
    test_index: np.ndarray


def train_test_split(d: Dataset, ratio: float, rng) -> Split:
    if not 0.0 < ratio < 1.0:
        raise ArgumentError(f"ratio must be in (0, 1), got {ratio}")
    if d.n < 2:
        raise ArgumentError("need at least 2 rows to split")
    perm = _generator(rng).permutation(d.n)
    n_train = math.ceil(d.n * ratio)
    tr, te = perm[:n_train], perm[n_train:]
    return Split(d.take(tr), d.take(te), tr, te)


def kfold_indices(n: int, k: int, rng) -> list[np.ndarray]:
    """Shuffle ``range(n)`` and deal it round-robin into ``k`` validation folds."""
    if k < 2:
        raise ArgumentError("k must be >= 2")
    if k > n:
        raise ArgumentError(f"cannot make {k} folds from {n} rows")
    perm = _generator(rng).permutation(n)
    return [np.sort(perm[f::k]) for f in range(k)]
