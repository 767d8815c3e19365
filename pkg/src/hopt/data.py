"""Normalized regression datasets and their CSV + JSON-sidecar format."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .space import Normalizer


class DatasetFormatError(ValueError):
    """Malformed dataset file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix and response column, both min-max normalized.

    ``check_range=False`` admits values outside [0, 1]; that happens for
    held-out test sets scaled with the training set's normalizers.
    """

    features: np.ndarray
    responses: np.ndarray
    feature_names: tuple[str, ...] = ()
    response_name: str = "response"
    feature_normalizer: Normalizer | None = None
    response_normalizer: Normalizer | None = None
    meta: Mapping[str, Any] = field(default_factory=dict)
    check_range: bool = True

    def __post_init__(self) -> None:
        X = np.atleast_2d(np.asarray(self.features, dtype=float)).copy()
        y = np.asarray(self.responses, dtype=float).ravel().copy()
        if X.shape[0] != y.shape[0]:
            raise ValueError("features and responses differ in length")
        if y.size == 0:
            raise ValueError("empty dataset")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        if self.check_range and (X.min() < 0 or X.max() > 1 or y.min() < 0 or y.max() > 1):
            raise ValueError("dataset values must lie in [0, 1]")
        names = tuple(self.feature_names) or tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValueError("feature_names length does not match the column count")
        if self.response_name in names or len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "responses", y)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, rows: np.ndarray) -> Dataset:
        return Dataset(
            self.features[rows], self.responses[rows], self.feature_names, self.response_name,
            self.feature_normalizer, self.response_normalizer, self.meta, self.check_range,
        )

    def digest(self) -> str:
        """SHA-256 over the raw float64 bytes of features and responses."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.features).tobytes())
        h.update(np.ascontiguousarray(self.responses).tobytes())
        return h.hexdigest()


def sidecar_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".meta.json")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_dataset(ds: Dataset, path: str | Path) -> None:
    """Write ``path`` (CSV) plus its ``.meta.json`` sidecar."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*ds.feature_names, ds.response_name])
        for row, y in zip(ds.features, ds.responses):
            w.writerow([*(_fmt(v) for v in row), _fmt(y)])
    side: dict[str, Any] = {
        "feature_names": list(ds.feature_names),
        "response_name": ds.response_name,
        "meta": ds.meta,
    }
    if ds.feature_normalizer is not None:
        side["feature_normalizer"] = ds.feature_normalizer.to_dict()
    if ds.response_normalizer is not None:
        side["response_normalizer"] = ds.response_normalizer.to_dict()
    with open(sidecar_path(path), "w", encoding="utf-8") as fh:
        json.dump(side, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_dataset(path: str | Path, response: str | None = None) -> Dataset:
    """Parse a dataset CSV; the sidecar (if present) supplies names and normalizers.

    Without a sidecar the last column is the response and all values must
    already lie in [0, 1].
    """
    path = Path(path)
    side: dict[str, Any] = {}
    sp = sidecar_path(path)
    if sp.exists():
        try:
            side = json.loads(sp.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"{sp.name}: invalid JSON sidecar ({exc.msg})", exc.lineno) from None
    response = response or side.get("response_name")
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DatasetFormatError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        rows = list(csv.reader(fh))
    if not rows or not any(c.strip() for c in rows[0]):
        raise DatasetFormatError("missing header row", 1)
    header = [c.strip() for c in rows[0]]
    if len(header) < 2:
        raise DatasetFormatError("need at least one feature and one response column", 1)
    if len(set(header)) != len(header):
        raise DatasetFormatError("duplicate column names in header", 1)
    if response is None:
        response = header[-1]
    elif response not in header:
        raise DatasetFormatError(f"missing response column {response!r}", 1)
    r_idx = header.index(response)
    f_idx = [j for j in range(len(header)) if j != r_idx]
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise DatasetFormatError(f"expected {len(header)} columns, found {len(row)}", lineno)
        try:
            vals = [float(c) for c in row]
        except ValueError:
            bad = next(c for c in row if not _is_float(c))
            raise DatasetFormatError(f"not a number: {bad!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise DatasetFormatError("non-finite value", lineno)
        if "feature_normalizer" not in side and any(v < 0 or v > 1 for v in vals):
            raise DatasetFormatError("value outside [0, 1] and no normalizer sidecar", lineno)
        values.append(vals)
    if not values:
        raise DatasetFormatError("no data rows", 2)
    arr = np.asarray(values, dtype=float)
    fn = Normalizer.from_dict(side["feature_normalizer"]) if "feature_normalizer" in side else None
    rn = Normalizer.from_dict(side["response_normalizer"]) if "response_normalizer" in side else None
    return Dataset(
        arr[:, f_idx], arr[:, r_idx], tuple(header[j] for j in f_idx), response,
        fn, rn, side.get("meta", {}), check_range=fn is None,
    )


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True
