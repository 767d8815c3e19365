"""Cross-validated accuracy and training cost of one learner configuration."""

from __future__ import annotations

import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from .data import Dataset
from .learners import FitFailure, fit_learner
from .space import DesignSpace, HpPoint

FAILURE_LOSS = 1.0


def _pair(predicted, actual) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(predicted, dtype=float).ravel()
    a = np.asarray(actual, dtype=float).ravel()
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.size} predictions vs {a.size} actuals")
    if p.size == 0:
        raise ValueError("empty prediction vector")
    return p, a


def rmse(predicted, actual) -> float:
    p, a = _pair(predicted, actual)
    e = np.abs(p - a)
    # the min only guards against rounding pushing RMSE above max |error|
    return float(min(np.sqrt(np.mean(e * e)), e.max()))


def mxae(predicted, actual) -> float:
    p, a = _pair(predicted, actual)
    return float(np.max(np.abs(p - a)))


def fold_indices(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle split into ``folds`` parts whose sizes differ by at most one."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if n < folds:
        raise ValueError(f"dataset of {n} rows cannot be split into {folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, folds)]


@dataclass(frozen=True)
class EvalRecord:
    point: HpPoint
    fold_rmse: tuple[float, ...]
    fold_mxae: tuple[float, ...]
    mean_rmse: float
    sd_rmse: float
    mean_mxae: float
    sd_mxae: float
    train_time_s: float
    failed_folds: tuple[int, ...] = ()

    @classmethod
    def from_folds(cls, point, fold_rmse, fold_mxae, train_time_s, failed_folds=()) -> EvalRecord:
        r = np.asarray(fold_rmse, dtype=float)
        m = np.asarray(fold_mxae, dtype=float)
        ddof = 1 if r.size > 1 else 0
        return cls(
            HpPoint(point), tuple(r.tolist()), tuple(m.tolist()),
            float(r.mean()), float(r.std(ddof=ddof)), float(m.mean()), float(m.std(ddof=ddof)),
            float(train_time_s), tuple(failed_folds),
        )

    @property
    def failed(self) -> bool:
        return bool(self.failed_folds)

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.mean_rmse, self.mean_mxae)


def _clamped_predict(model, X: np.ndarray) -> np.ndarray:
    pred = np.asarray(model.predict(X), dtype=float)
    pred = np.where(np.isfinite(pred), pred, 0.5)
    return np.clip(pred, 0.0, 1.0)


def cross_validate(
    data: Dataset,
    point: Mapping[str, Any],
    learner_kind: str,
    folds: int = 5,
    seed: int = 0,
) -> EvalRecord:
    """k-fold CV; the partition depends only on ``(data.n, folds, seed)``.

    Predictions are clamped to [0, 1] before scoring. A fold whose fit fails
    scores :data:`FAILURE_LOSS` on both measures and is listed in
    ``failed_folds``. ``train_time_s`` sums the per-fold fit times.
    """
    parts = fold_indices(data.n, folds, seed)
    X, y = data.features, data.responses
    f_rmse, f_mxae, failed = [], [], []
    total = 0.0
    for k, test in enumerate(parts):
        train = np.setdiff1d(np.arange(data.n), test, assume_unique=True)
        t0 = time.perf_counter()
        try:
            model = fit_learner(learner_kind, point, X[train], y[train], seed=seed + k)
        except FitFailure:
            model = None
        total += time.perf_counter() - t0
        if model is None:
            f_rmse.append(FAILURE_LOSS)
            f_mxae.append(FAILURE_LOSS)
            failed.append(k)
            continue
        pred = _clamped_predict(model, X[test])
        f_rmse.append(rmse(pred, y[test]))
        f_mxae.append(mxae(pred, y[test]))
    return EvalRecord.from_folds(point, f_rmse, f_mxae, round(total, 3), failed)


def timed_single_fit(data: Dataset, point: Mapping[str, Any], learner_kind: str, seed: int = 0):
    """Fit once on the whole dataset; returns ``(model, seconds)``. Fit failures propagate."""
    t0 = time.perf_counter()
    model = fit_learner(learner_kind, point, data.features, data.responses, seed=seed)
    return model, round(time.perf_counter() - t0, 3)


def score_model(model, data: Dataset) -> tuple[float, float]:
    pred = _clamped_predict(model, data.features)
    return rmse(pred, data.responses), mxae(pred, data.responses)


def record_header(space: DesignSpace, folds: int, include_time: bool = True) -> list[str]:
    cols = list(space.names)
    cols += [f"rmse_fold{k + 1}" for k in range(folds)]
    cols += [f"mxae_fold{k + 1}" for k in range(folds)]
    cols += ["mean_rmse", "sd_rmse", "mean_mxae", "sd_mxae", "failed_folds"]
    if include_time:
        cols.append("train_time_s")
    return cols


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def record_row(rec: EvalRecord, space: DesignSpace, include_time: bool = True) -> list[str]:
    row = [_cell(rec.point[name]) if name in rec.point else "" for name in space.names]
    row += [_cell(v) for v in rec.fold_rmse]
    row += [_cell(v) for v in rec.fold_mxae]
    row += [_cell(v) for v in (rec.mean_rmse, rec.sd_rmse, rec.mean_mxae, rec.sd_mxae)]
    row.append(";".join(str(k) for k in rec.failed_folds))
    if include_time:
        row.append(format(rec.train_time_s, ".3f"))
    return row


def parse_point_cells(space: DesignSpace, cells: Sequence[str]) -> HpPoint:
    """Inverse of the point part of :func:`record_row`."""
    vals: dict[str, Any] = {}
    for spec, cell in zip(space.params, cells):
        if cell == "":
            continue
        if spec.kind == "categorical":
            vals[spec.name] = cell
        elif spec.kind == "integer":
            vals[spec.name] = int(float(cell))
        else:
            vals[spec.name] = float(cell)
    return HpPoint(vals)
