"""CSV ingestion of intensity matrices and binary labels."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .exceptions import ParseError


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    labels: list[str]


def _as_binary(values: pd.Series, what: str) -> np.ndarray:
    if values.isna().any():
        raise ParseError(f"{what} has missing values")
    num = pd.to_numeric(values, errors="coerce")
    if num.isna().any() or not num.isin([0, 1]).all():
        raise ParseError(f"{what} must contain only 0/1 values")
    return num.to_numpy(dtype=float)


def _read_label_file(path: str) -> np.ndarray:
    raw = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True)
    if raw.shape[1] != 1:
        raise ParseError(f"label file {path} must have exactly one column")
    col = raw.iloc[:, 0].str.strip()
    if pd.to_numeric(col.iloc[:1], errors="coerce").isna().all():
        col = col.iloc[1:]
    return _as_binary(col.reset_index(drop=True), f"label file {path}")


def read_dataset(input_path: str, labels: str) -> Dataset:
    """Read an ``n x p`` matrix with a header row of column labels.

    ``labels`` is either the name of a column of the input (removed from the
    predictors) or the path of a one-column file holding the outcome.
    """
    try:
        frame = pd.read_csv(input_path, float_precision="round_trip")
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read {input_path}: {exc}") from exc
    frame.columns = [str(c).strip() for c in frame.columns]
    if labels in frame.columns:
        y = _as_binary(frame[labels], f"label column {labels!r}")
        frame = frame.drop(columns=[labels])
    elif os.path.isfile(labels):
        try:
            y = _read_label_file(labels)
        except (OSError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"cannot read label file {labels}: {exc}") from exc
        if y.shape[0] != frame.shape[0]:
            raise ParseError(
                f"label file has {y.shape[0]} entries but the input has {frame.shape[0]} rows")
    else:
        raise ParseError(f"{labels!r} is neither an input column nor a file")
    if frame.shape[1] == 0:
        raise ParseError("input has no predictor columns")
    if frame.isna().any().any():
        bad = frame.columns[frame.isna().any()].tolist()
        raise ParseError(f"missing values in columns {bad[:10]}")
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    if numeric.isna().any().any():
        bad = frame.columns[numeric.isna().any()].tolist()
        raise ParseError(f"non-numeric values in columns {bad[:10]}")
    return Dataset(numeric.to_numpy(dtype=float), y, list(frame.columns))


def write_matrix_csv(path, X, y, labels=None, label_column: str = "label") -> None:
    """Write ``X`` with an appended label column, losslessly (``repr`` floats)."""
    X = np.asarray(X, dtype=float)
    if labels is None:
        labels = [f"x{j + 1}" for j in range(X.shape[1])]
    with open(path, "w") as fh:
        fh.write(",".join(list(labels) + [label_column]) + "\n")
        for row, yi in zip(X, y):
            fh.write(",".join(repr(float(v)) for v in row) + f",{int(yi)}\n")
