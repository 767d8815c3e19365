"""Two-objective Pareto fronts, hypervolume and a posteriori selection."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .evaluation import EvalRecord
from .space import HpPoint


def pareto_front(points) -> list[int]:
    """Indices (ascending) of points not dominated under minimization.

    ``a`` dominates ``b`` when ``a <= b`` in both objectives and ``a < b`` in
    at least one; exact duplicates therefore never dominate each other.
    """
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(P)
    if n == 0:
        return []
    order = np.lexsort((P[:, 1], P[:, 0]))
    keep: list[int] = []
    best_prev = np.inf  # min f2 over strictly smaller f1
    k = 0
    while k < n:
        f1 = P[order[k], 0]
        g = k
        while g < n and P[order[g], 0] == f1:
            g += 1
        gmin = P[order[k], 1]
        if gmin < best_prev:
            for q in range(k, g):
                if P[order[q], 1] == gmin:
                    keep.append(int(order[q]))
            best_prev = gmin
        k = g
    return sorted(keep)


def hypervolume_2d(points, ref=(1.0, 1.0)) -> float:
    """Area dominated by ``points`` and bounded above by ``ref`` (minimization)."""
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    P = P[(P[:, 0] < ref[0]) & (P[:, 1] < ref[1])]
    if len(P) == 0:
        return 0.0
    F = P[pareto_front(P)]
    F = F[np.argsort(F[:, 0], kind="mergesort")]
    area = 0.0
    prev_f2 = ref[1]
    for f1, f2 in F:
        if f2 < prev_f2:
            area += (ref[0] - f1) * (prev_f2 - f2)
            prev_f2 = f2
    return float(area)


class ParetoArchive:
    """All evaluated points with their records and the current front.

    Single writer; the front is recomputed exactly on every insertion.
    """

    def __init__(self) -> None:
        self.points: list[HpPoint] = []
        self.records: list[EvalRecord] = []
        self.origins: list[str] = []
        self._front: list[int] = []

    def __len__(self) -> int:
        return len(self.records)

    def add(self, record: EvalRecord, origin: str = "acquired") -> None:
        self.points.append(record.point)
        self.records.append(record)
        self.origins.append(origin)
        self._front = pareto_front(self.objectives())

    def objectives(self) -> np.ndarray:
        return np.array([r.objectives for r in self.records], dtype=float).reshape(-1, 2)

    @property
    def front(self) -> list[int]:
        return list(self._front)

    def front_records(self) -> list[EvalRecord]:
        return [self.records[i] for i in self._front]

    def contains(self, point: HpPoint) -> bool:
        return point in set(self.points)

    def hypervolume(self, ref=(1.0, 1.0)) -> float:
        return hypervolume_2d(self.objectives(), ref) if self.records else 0.0


def _filtered(objs: np.ndarray) -> np.ndarray:
    med = np.median(objs, axis=0)
    keep = np.flatnonzero((objs[:, 0] <= med[0]) & (objs[:, 1] <= med[1]))
    return keep if keep.size else np.arange(len(objs))


def knee_index(objs) -> int:
    """Member closest to the ideal point after per-objective min-max scaling."""
    objs = np.asarray(objs, dtype=float).reshape(-1, 2)
    lo, hi = objs.min(axis=0), objs.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    dist = np.sqrt((((objs - lo) / span) ** 2).sum(axis=1))
    return int(np.argmin(dist))


def select_from_front(
    front: Sequence[EvalRecord] | Sequence[tuple[float, float]],
    strategy: str = "random",
    seed: int = 0,
) -> int:
    """Index into ``front`` of the chosen member.

    Members with RMSE or MXAE above the front median are dropped (all are
    kept if that leaves nothing); the survivor is drawn at random or taken
    as the knee point.
    """
    if len(front) == 0:
        raise ValueError("empty front")
    objs = np.array(
        [f.objectives if isinstance(f, EvalRecord) else tuple(f) for f in front], dtype=float
    ).reshape(-1, 2)
    keep = _filtered(objs)
    if strategy == "random":
        return int(keep[np.random.default_rng(seed).integers(len(keep))])
    if strategy == "knee":
        return int(keep[knee_index(objs[keep])])
    raise ValueError(f"unknown selection strategy {strategy!r}")
