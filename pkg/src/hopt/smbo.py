"""Sequential model-based HOpt with recursive design-space shrinking.

Loop: evaluate an LHS design, fit one bagged-forest surrogate per objective
(RMSE, MXAE), acquire a new point by repeatedly sampling and shrinking
around the best lower-confidence-bound candidate, evaluate it, archive it.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .data import Dataset
from .evaluation import EvalRecord, cross_validate
from .learners.forest import RfrHyperparams, RfrModel, rfr_fit
from .pareto import ParetoArchive, pareto_front
from .space import (
    DesignSpace,
    HpPoint,
    Subspace,
    categorical_mask,
    columns_to_points,
    encode_columns,
    encode_for_surrogate,
    lhs_columns,
    lhs_sample,
    shrink,
)

CHEBYSHEV_RHO = 0.05
DUPLICATE_RETRIES = 10


@dataclass(frozen=True)
class SmboConfig:
    n_initial: int = 30
    n_total: int = 100
    r_p: float = 0.25
    n_ii: int = 10
    n_re: int = 5
    candidates_per_iter: int = 200
    phi: float | None = None
    seed: int = 0
    folds: int = 5
    surrogate_trees: int = 200

    def __post_init__(self) -> None:
        if self.n_initial < 2:
            raise ValueError("n_initial must be >= 2 to fit a surrogate")
        if self.n_total < self.n_initial:
            raise ValueError("n_total must be >= n_initial")
        if not 0.0 < self.r_p < 1.0:
            raise ValueError("r_p must lie in (0, 1)")
        if min(self.n_ii, self.n_re, self.candidates_per_iter, self.surrogate_trees) < 1:
            raise ValueError("n_ii, n_re, candidates_per_iter and surrogate_trees must be >= 1")
        if self.phi is not None and self.phi < 0:
            raise ValueError("phi must be >= 0")

    def phi_for(self, space: DesignSpace) -> float:
        if self.phi is not None:
            return float(self.phi)
        return 2.0 if space.has_categorical else 1.0

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class SurrogatePrediction:
    mu: tuple[float, float]
    sigma: tuple[float, float]


def lcb_values(mu, sigma, phi: float):
    """Lower confidence bound ``mu - phi * sigma`` (elementwise)."""
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0):
        raise ValueError("sigma must be non-negative")
    out = np.asarray(mu, dtype=float) - phi * sigma
    return float(out) if out.ndim == 0 else out


def lcb(pred: SurrogatePrediction, phi: float) -> tuple[float, float]:
    """Per-objective lower confidence bound of one surrogate prediction."""
    v = lcb_values(pred.mu, pred.sigma, phi)
    return (float(v[0]), float(v[1]))


@dataclass(frozen=True)
class Surrogate:
    """One forest per objective; spread of the tree outputs is the uncertainty."""

    space: DesignSpace
    models: tuple[RfrModel, RfrModel]

    def predict_encoded(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mus, sds = [], []
        for m in self.models:
            mu, sd = m.predict_mean_std(X)
            mus.append(mu)
            sds.append(sd)
        return np.column_stack(mus), np.column_stack(sds)


def surrogate_hyperparams(n_features: int, trees: int = 200) -> RfrHyperparams:
    return RfrHyperparams(trees=trees, nf=max(1, math.ceil(n_features / 3)), min_ts=2, max_tn=None)


def surrogate_fit(archive: ParetoArchive, space: DesignSpace, seed: int = 0, trees: int = 200) -> Surrogate:
    if len(archive) < 2:
        raise ValueError("surrogate needs at least two archived points")
    X = np.array([encode_for_surrogate(p, space) for p in archive.points])
    Y = archive.objectives()
    hp = surrogate_hyperparams(len(space), trees)
    cat = categorical_mask(space)
    models = tuple(rfr_fit(X, Y[:, j], hp, seed=seed + 7919 * j, is_categorical=cat) for j in range(2))
    return Surrogate(space, models)  # type: ignore[arg-type]


def surrogate_predict(s: Surrogate, point: Mapping[str, Any]) -> SurrogatePrediction:
    mu, sd = s.predict_encoded(encode_for_surrogate(point, s.space)[None, :])
    return SurrogatePrediction((float(mu[0, 0]), float(mu[0, 1])), (float(sd[0, 0]), float(sd[0, 1])))


def scalarize(L: np.ndarray, weights) -> np.ndarray:
    """Augmented Chebyshev value ``max_j w_j L_j + rho * sum_j w_j L_j`` per row."""
    wl = np.asarray(L, dtype=float) * np.asarray(weights, dtype=float)
    return wl.max(axis=1) + CHEBYSHEV_RHO * wl.sum(axis=1)


@dataclass
class RestartResult:
    weights: tuple[float, float]
    point: HpPoint
    lcb: tuple[float, float]
    score: float
    subspaces: list[Subspace] = field(default_factory=list)


@dataclass
class Acquisition:
    point: HpPoint
    restarts: list[RestartResult]
    nondominated: list[int]
    chosen_restart: int
    duplicate_retries: int = 0


def choose_restart(lcbs) -> tuple[list[int], int]:
    """Non-dominated restart winners and the lexicographic pick among them."""
    L = np.asarray(lcbs, dtype=float).reshape(-1, 2)
    nd = pareto_front(L)
    return nd, min(nd, key=lambda k: (L[k, 0], L[k, 1], k))


def acquire(
    surrogate: Surrogate,
    space: DesignSpace,
    cfg: SmboConfig,
    seed: int | np.random.Generator,
    archive: ParetoArchive | None = None,
) -> Acquisition:
    """Run ``n_re`` shrinking searches and pick one non-dominated winner."""
    rng = np.random.default_rng(seed)
    phi = cfg.phi_for(space)
    full = Subspace.full(space)
    restarts: list[RestartResult] = []
    for _ in range(cfg.n_re):
        w1 = float(rng.random())
        w = (w1, 1.0 - w1)
        sub = full
        chain = [sub]
        best: RestartResult | None = None
        for _ in range(cfg.n_ii):
            cols = lhs_columns(sub, cfg.candidates_per_iter, rng)
            mu, sd = surrogate.predict_encoded(encode_columns(space, cols))
            L = mu - phi * sd
            scores = scalarize(L, w)
            i = int(np.argmin(scores))
            pt = columns_to_points(space, cols, rows=[i])[0]
            if best is None or scores[i] < best.score:
                best = RestartResult(w, pt, (float(L[i, 0]), float(L[i, 1])), float(scores[i]))
            sub = shrink(sub, pt, cfg.r_p)
            chain.append(sub)
        assert best is not None
        best.subspaces = chain
        restarts.append(best)

    nd, chosen = choose_restart([r.lcb for r in restarts])
    point = restarts[chosen].point
    retries = 0
    if archive is not None and archive.contains(point):
        seen = set(archive.points)
        final = restarts[chosen].subspaces[-1]
        for _ in range(DUPLICATE_RETRIES):
            retries += 1
            point = lhs_sample(final, 1, rng)[0]
            if point not in seen:
                break
        else:
            for _ in range(1000):
                retries += 1
                point = lhs_sample(space, 1, rng)[0]
                if point not in seen:
                    break
    return Acquisition(point, restarts, nd, chosen, retries)


def acquire_optimum(surrogate, space, cfg, seed, archive=None) -> HpPoint:
    return acquire(surrogate, space, cfg, seed, archive).point


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    origin: str
    best_rmse: float
    best_mxae: float
    hypervolume: float


@dataclass
class HoptResult:
    archive: ParetoArchive
    trace: list[TraceRow]
    config: SmboConfig
    timing: dict[str, float]


def run_hopt(
    space: DesignSpace,
    data: Dataset | None,
    learner_kind: str,
    cfg: SmboConfig = SmboConfig(),
    cv_seed: int | None = None,
    evaluate: Callable[[HpPoint], EvalRecord] | None = None,
    on_record: Callable[[EvalRecord, TraceRow], None] | None = None,
) -> HoptResult:
    """Evaluate ``n_initial`` LHS points, then acquire one point per iteration up to ``n_total``.

    ``evaluate`` replaces k-fold CV of ``learner_kind`` on ``data`` when
    given. ``cv_seed`` fixes the fold partition for every evaluation
    (defaults to ``cfg.seed``). ``timing`` separates evaluation, surrogate
    fitting and surrogate prediction from the remaining loop overhead.
    """
    cv_seed = cfg.seed if cv_seed is None else cv_seed
    if evaluate is None:
        if data is None:
            raise ValueError("data is required unless evaluate is given")

        def evaluate(p: HpPoint) -> EvalRecord:
            return cross_validate(data, p, learner_kind, folds=cfg.folds, seed=cv_seed)

    rng = np.random.default_rng(cfg.seed)
    archive = ParetoArchive()
    trace: list[TraceRow] = []
    timing = {"evaluate": 0.0, "surrogate_fit": 0.0, "surrogate_predict": 0.0, "total": 0.0}
    t_start = time.perf_counter()

    def record(p: HpPoint, origin: str) -> None:
        t0 = time.perf_counter()
        rec = evaluate(p)
        timing["evaluate"] += time.perf_counter() - t0
        archive.add(rec, origin)
        objs = archive.objectives()
        row = TraceRow(len(archive), origin, float(objs[:, 0].min()), float(objs[:, 1].min()), archive.hypervolume())
        trace.append(row)
        if on_record is not None:
            on_record(rec, row)

    for p in lhs_sample(space, cfg.n_initial, rng):
        record(p, "initial")
    while len(archive) < cfg.n_total:
        t0 = time.perf_counter()
        surr = surrogate_fit(archive, space, seed=int(rng.integers(2**31)), trees=cfg.surrogate_trees)
        timing["surrogate_fit"] += time.perf_counter() - t0
        timed = _TimedSurrogate(surr)
        acq = acquire(timed, space, cfg, int(rng.integers(2**31)), archive)
        timing["surrogate_predict"] += timed.elapsed
        record(acq.point, "acquired")
    timing["total"] = time.perf_counter() - t_start
    return HoptResult(archive, trace, cfg, timing)


class _TimedSurrogate:
    """Wraps a surrogate to accumulate time spent in prediction."""

    def __init__(self, inner: Surrogate) -> None:
        self.inner = inner
        self.space = inner.space
        self.elapsed = 0.0

    def predict_encoded(self, X):
        t0 = time.perf_counter()
        out = self.inner.predict_encoded(X)
        self.elapsed += time.perf_counter() - t0
        return out
