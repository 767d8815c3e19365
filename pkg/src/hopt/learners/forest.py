"""Random forest regression built from bagged CART trees.

Trees are grown best-first so that a terminal-node cap can be honoured:
every open leaf carries its best split, and the leaf with the largest
reduction in squared error is expanded next. Without a cap this yields the
same tree as plain recursive growth.

Split search on numeric features scans midpoints between consecutive
distinct values. Categorical features (encoded as category index, with -1
for "inactive") are split natively: categories are ordered by mean response
and the best prefix becomes the left-going set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

UNLIMITED = -1
_MAXCAT = 63


@numba.njit(cache=True)
def _best_split(X, y, samples, start, end, is_cat, nf, min_ts, feat_pool):
    """Return (gain, feature, threshold, mask) of the best admissible split, or gain=-1."""
    n = end - start
    d = X.shape[1]
    if n < 2 * min_ts or n < 2:
        return -1.0, -1, 0.0, np.int64(0)
    ymin = np.inf
    ymax = -np.inf
    tot = 0.0
    sq = 0.0
    for k in range(start, end):
        v = y[samples[k]]
        tot += v
        sq += v * v
        ymin = min(ymin, v)
        ymax = max(ymax, v)
    if ymin == ymax:
        return -1.0, -1, 0.0, np.int64(0)
    # draw nf features without replacement, then visit them in index order
    for k in range(d):
        feat_pool[k] = k
    for k in range(nf):
        r = k + np.random.randint(0, d - k)
        tmp = feat_pool[k]
        feat_pool[k] = feat_pool[r]
        feat_pool[r] = tmp
    chosen = np.sort(feat_pool[:nf].copy())

    parent = tot * tot / n
    tol = 1e-12 * (sq + 1e-300)
    best_score = -np.inf
    best_f = -1
    best_thr = 0.0
    best_mask = np.int64(0)
    vals = np.empty(n)
    ys = np.empty(n)
    for fi in range(nf):
        f = chosen[fi]
        for k in range(n):
            vals[k] = X[samples[start + k], f]
            ys[k] = y[samples[start + k]]
        if is_cat[f]:
            cnt = np.zeros(_MAXCAT + 1)
            sm = np.zeros(_MAXCAT + 1)
            for k in range(n):
                c = int(vals[k]) + 1
                cnt[c] += 1.0
                sm[c] += ys[k]
            present = np.empty(_MAXCAT + 1, dtype=np.int64)
            npres = 0
            for c in range(_MAXCAT + 1):
                if cnt[c] > 0:
                    present[npres] = c
                    npres += 1
            if npres < 2:
                continue
            means = np.empty(npres)
            for q in range(npres):
                means[q] = sm[present[q]] / cnt[present[q]]
            order = np.argsort(means, kind="mergesort")
            sl = 0.0
            nl = 0.0
            mask = np.int64(0)
            for q in range(npres - 1):
                c = present[order[q]]
                sl += sm[c]
                nl += cnt[c]
                mask |= np.int64(1) << np.int64(c)
                nr = n - nl
                if nl < min_ts or nr < min_ts:
                    continue
                sr = tot - sl
                score = sl * sl / nl + sr * sr / nr
                if score > best_score + tol:
                    best_score = score
                    best_f = f
                    best_thr = 0.0
                    best_mask = mask
        else:
            order = np.argsort(vals, kind="mergesort")
            sl = 0.0
            for k in range(1, n):
                sl += ys[order[k - 1]]
                a = vals[order[k - 1]]
                b = vals[order[k]]
                if a == b:
                    continue
                if k < min_ts or n - k < min_ts:
                    continue
                sr = tot - sl
                score = sl * sl / k + sr * sr / (n - k)
                if score > best_score + tol:
                    best_score = score
                    best_f = f
                    thr = a + (b - a) / 2.0
                    if thr >= b:
                        thr = a
                    best_thr = thr
                    best_mask = np.int64(0)
    if best_f < 0:
        return -1.0, -1, 0.0, np.int64(0)
    gain = best_score - parent
    if gain < 0.0:
        gain = 0.0
    return gain, best_f, best_thr, best_mask


@numba.njit(cache=True)
def _goes_left(x, is_cat_f, thr, mask):
    if is_cat_f:
        c = int(x) + 1
        return ((mask >> np.int64(c)) & np.int64(1)) == 1
    return x <= thr


@numba.njit(cache=True)
def _node_mean(y, samples, a, b):
    # a pure node keeps its common value exactly so identical targets give zero spread
    first = y[samples[a]]
    s = 0.0
    pure = True
    for k in range(a, b):
        v = y[samples[k]]
        s += v
        if v != first:
            pure = False
    return first if pure else s / (b - a)


@numba.njit(cache=True)
def _grow(X, y, samples, is_cat, nf, min_ts, max_tn, seed):
    np.random.seed(seed)
    n = samples.shape[0]
    cap = 2 * n + 1
    feat = np.full(cap, -1, dtype=np.int64)
    thr = np.zeros(cap)
    mask = np.zeros(cap, dtype=np.int64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap)
    nstart = np.zeros(cap, dtype=np.int64)
    nend = np.zeros(cap, dtype=np.int64)
    # pending split per open leaf
    pgain = np.full(cap, -1.0)
    pfeat = np.full(cap, -1, dtype=np.int64)
    pthr = np.zeros(cap)
    pmask = np.zeros(cap, dtype=np.int64)
    pool = np.empty(X.shape[1], dtype=np.int64)

    nstart[0] = 0
    nend[0] = n
    value[0] = _node_mean(y, samples, 0, n)
    g, f, t, m = _best_split(X, y, samples, 0, n, is_cat, nf, min_ts, pool)
    pgain[0] = g
    pfeat[0] = f
    pthr[0] = t
    pmask[0] = m
    nnodes = 1
    nleaves = 1
    while max_tn < 0 or nleaves < max_tn:
        node = -1
        bestg = -1.0
        for q in range(nnodes):
            if left[q] < 0 and pfeat[q] >= 0 and pgain[q] > bestg:
                bestg = pgain[q]
                node = q
        if node < 0:
            break
        f = pfeat[node]
        a = nstart[node]
        b = nend[node]
        # stable in-place partition of samples[a:b]
        buf = samples[a:b].copy()
        lo = a
        for k in range(b - a):
            if _goes_left(X[buf[k], f], is_cat[f], pthr[node], pmask[node]):
                samples[lo] = buf[k]
                lo += 1
        hi = lo
        for k in range(b - a):
            if not _goes_left(X[buf[k], f], is_cat[f], pthr[node], pmask[node]):
                samples[hi] = buf[k]
                hi += 1
        feat[node] = f
        thr[node] = pthr[node]
        mask[node] = pmask[node]
        for child, cs, ce in ((nnodes, a, lo), (nnodes + 1, lo, b)):
            nstart[child] = cs
            nend[child] = ce
            value[child] = _node_mean(y, samples, cs, ce)
            g, f2, t2, m2 = _best_split(X, y, samples, cs, ce, is_cat, nf, min_ts, pool)
            pgain[child] = g
            pfeat[child] = f2
            pthr[child] = t2
            pmask[child] = m2
        left[node] = nnodes
        right[node] = nnodes + 1
        nnodes += 2
        nleaves += 1
    return (
        feat[:nnodes].copy(),
        thr[:nnodes].copy(),
        mask[:nnodes].copy(),
        left[:nnodes].copy(),
        right[:nnodes].copy(),
        value[:nnodes].copy(),
    )


@numba.njit(cache=True)
def _predict_all(Xq, roots, feat, thr, mask, left, right, value, is_cat):
    nq = Xq.shape[0]
    nt = roots.shape[0]
    out = np.empty((nq, nt))
    # tree-major order keeps one tree's nodes hot in cache across all queries
    for t in range(nt):
        for i in range(nq):
            node = roots[t]
            while left[node] >= 0:
                f = feat[node]
                if _goes_left(Xq[i, f], is_cat[f], thr[node], mask[node]):
                    node = left[node]
                else:
                    node = right[node]
            out[i, t] = value[node]
    return out


@dataclass(frozen=True)
class RfrHyperparams:
    trees: int = 500
    nf: int = 3
    min_ts: int = 5
    max_tn: int | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.trees:
            raise ValueError("trees must be >= 1")
        if self.nf < 1 or self.min_ts < 1:
            raise ValueError("nf and min_ts must be >= 1")
        if self.max_tn is not None and self.max_tn < 1:
            raise ValueError("max_tn must be >= 1 or None")


@dataclass(frozen=True)
class RfrModel:
    """Flat node arrays for all trees; tree ``t`` starts at ``roots[t]``."""

    roots: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    catmask: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    is_cat: np.ndarray
    hp: RfrHyperparams

    @property
    def n_trees(self) -> int:
        return len(self.roots)

    def tree_predictions(self, X: np.ndarray) -> np.ndarray:
        """(n_queries, n_trees) matrix of individual tree outputs."""
        X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
        return _predict_all(
            X, self.roots, self.feature, self.threshold, self.catmask,
            self.left, self.right, self.value, self.is_cat,
        )

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.tree_predictions(X).mean(axis=1)

    def predict_mean_std(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        P = self.tree_predictions(X)
        agree = P.min(axis=1) == P.max(axis=1)
        mu = np.where(agree, P[:, 0], P.mean(axis=1))
        return mu, np.where(agree, 0.0, P.std(axis=1))

    def tree(self, t: int) -> dict[str, np.ndarray]:
        """Node arrays of one tree with child links relative to its root."""
        a = self.roots[t]
        b = self.roots[t + 1] if t + 1 < len(self.roots) else len(self.value)
        sl = slice(a, b)
        rel = lambda v: np.where(v >= 0, v - a, -1)  # noqa: E731
        return {
            "feature": self.feature[sl], "threshold": self.threshold[sl],
            "catmask": self.catmask[sl], "left": rel(self.left[sl]),
            "right": rel(self.right[sl]), "value": self.value[sl],
        }


def rfr_fit(
    X: np.ndarray,
    y: np.ndarray,
    hp: RfrHyperparams,
    seed: int = 0,
    is_categorical: np.ndarray | None = None,
    bootstrap: bool = True,
) -> RfrModel:
    """Fit a forest; tree ``t`` uses a bootstrap resample seeded with ``seed + t``."""
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
    y = np.ascontiguousarray(np.asarray(y, dtype=float).ravel())
    n, d = X.shape
    if n == 0 or len(y) != n:
        raise ValueError("X and y must be non-empty with equal length")
    if hp.nf > d:
        raise ValueError(f"nf={hp.nf} exceeds the {d} available features")
    is_cat = np.zeros(d, dtype=np.bool_) if is_categorical is None else np.asarray(is_categorical, dtype=np.bool_)
    max_tn = UNLIMITED if hp.max_tn is None else int(hp.max_tn)
    parts = []
    roots = np.empty(hp.trees, dtype=np.int64)
    offset = 0
    for t in range(hp.trees):
        if bootstrap:
            samples = np.random.default_rng(seed + t).integers(0, n, size=n).astype(np.int64)
        else:
            samples = np.arange(n, dtype=np.int64)
        tree = _grow(X, y, samples, is_cat, int(hp.nf), int(hp.min_ts), max_tn, (seed + t) % (2**32))
        feat, thr, mask, left, right, value = tree
        roots[t] = offset
        left = np.where(left >= 0, left + offset, -1)
        right = np.where(right >= 0, right + offset, -1)
        parts.append((feat, thr, mask, left, right, value))
        offset += len(value)
    cols = [np.concatenate([p[k] for p in parts]) for k in range(6)]
    return RfrModel(roots, *cols, is_cat=is_cat, hp=hp)
