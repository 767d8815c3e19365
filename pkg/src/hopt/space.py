"""Mixed-variable design spaces, min-max scaling, LHS and subspace shrinking."""

from __future__ import annotations

import json
import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

CONTINUOUS = "continuous"
INTEGER = "integer"
CATEGORICAL = "categorical"
KINDS = (CONTINUOUS, INTEGER, CATEGORICAL)

# encoded value of an inactive conditional parameter; sits below every
# normalized numeric value and below every category index
INACTIVE = -1.0


class SpaceError(ValueError):
    """Invalid design space, point or sampling request."""


def _as_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class ParamSpec:
    """One hyperparameter domain.

    ``conditional_on`` is ``(parent_name, allowed_values)``; the parameter is
    active only when the parent takes one of ``allowed_values``.
    """

    name: str
    kind: str
    lower: float | None = None
    upper: float | None = None
    categories: tuple[str, ...] = ()
    conditional_on: tuple[str, tuple[str, ...]] | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise SpaceError("parameter name must be non-empty")
        if self.kind not in KINDS:
            raise SpaceError(f"{self.name}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            cats = tuple(str(c) for c in self.categories)
            if not cats:
                raise SpaceError(f"{self.name}: categorical needs categories")
            if len(set(cats)) != len(cats):
                raise SpaceError(f"{self.name}: duplicate categories")
            if len(cats) > 62:
                raise SpaceError(f"{self.name}: at most 62 categories supported")
            object.__setattr__(self, "categories", cats)
        else:
            if self.lower is None or self.upper is None:
                raise SpaceError(f"{self.name}: numeric parameter needs bounds")
            lo, hi = float(self.lower), float(self.upper)
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise SpaceError(f"{self.name}: bounds must be finite")
            if self.kind == CONTINUOUS and not lo < hi:
                raise SpaceError(f"{self.name}: need lower < upper")
            if self.kind == INTEGER:
                if lo != int(lo) or hi != int(hi):
                    raise SpaceError(f"{self.name}: integer bounds must be whole")
                if not lo <= hi:
                    raise SpaceError(f"{self.name}: need lower <= upper")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        if self.conditional_on is not None:
            parent, values = self.conditional_on
            if isinstance(values, str):
                values = (values,)
            object.__setattr__(self, "conditional_on", (str(parent), tuple(str(v) for v in values)))

    @property
    def width(self) -> float:
        return float(self.upper - self.lower)

    def contains(self, value: Any) -> bool:
        if self.kind == CATEGORICAL:
            return value in self.categories
        if isinstance(value, (bool, np.bool_)):
            return False
        if self.kind == INTEGER and (not float(value).is_integer()):
            return False
        return self.lower <= float(value) <= self.upper

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind}
        if self.kind == CATEGORICAL:
            d["categories"] = list(self.categories)
        else:
            d["lower"], d["upper"] = self.lower, self.upper
            if self.kind == INTEGER:
                d["lower"], d["upper"] = int(self.lower), int(self.upper)
        if self.conditional_on is not None:
            d["conditional_on"] = [self.conditional_on[0], list(self.conditional_on[1])]
        return d


class HpPoint(Mapping):
    """Immutable, hashable assignment of hyperparameter values."""

    __slots__ = ("_items", "_hash")

    def __init__(self, values: Mapping[str, Any] | None = None, **kw: Any) -> None:
        merged = dict(values or {}, **kw)
        self._items = tuple(sorted((k, _plain(v)) for k, v in merged.items()))
        self._hash = hash(self._items)

    def __getitem__(self, key: str) -> Any:
        for k, v in self._items:
            if k == key:
                return v
        raise KeyError(key)

    def __iter__(self) -> Iterator[str]:
        return (k for k, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, HpPoint):
            return self._items == other._items
        if isinstance(other, Mapping):
            return dict(self._items) == dict(other)
        return NotImplemented

    def __repr__(self) -> str:
        body = ", ".join(f"{k}={v!r}" for k, v in self._items)
        return f"HpPoint({body})"

    def replace(self, **kw: Any) -> HpPoint:
        d = dict(self._items)
        d.update(kw)
        return HpPoint(d)

    def without(self, *names: str) -> HpPoint:
        return HpPoint({k: v for k, v in self._items if k not in names})


def _plain(v: Any) -> Any:
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.str_):
        return str(v)
    return v


@dataclass(frozen=True)
class DesignSpace:
    params: tuple[ParamSpec, ...]

    def __post_init__(self) -> None:
        params = tuple(self.params)
        object.__setattr__(self, "params", params)
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise SpaceError("parameter names must be unique")
        by_name = {p.name: p for p in params}
        for p in params:
            if p.conditional_on is None:
                continue
            parent_name, values = p.conditional_on
            parent = by_name.get(parent_name)
            if parent is None or parent is p:
                raise SpaceError(f"{p.name}: condition references unknown parameter {parent_name!r}")
            if parent.kind != CATEGORICAL:
                raise SpaceError(f"{p.name}: conditions must reference a categorical parameter")
            if parent.conditional_on is not None:
                raise SpaceError(f"{p.name}: nested conditions are not supported")
            bad = [v for v in values if v not in parent.categories]
            if bad:
                raise SpaceError(f"{p.name}: condition values {bad} not in {parent_name}")

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def has_categorical(self) -> bool:
        return any(p.kind == CATEGORICAL for p in self.params)

    def __getitem__(self, name: str) -> ParamSpec:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    def __contains__(self, name: object) -> bool:
        return any(p.name == name for p in self.params)

    def __len__(self) -> int:
        return len(self.params)

    def is_active(self, spec: ParamSpec, values: Mapping[str, Any]) -> bool:
        if spec.conditional_on is None:
            return True
        parent, allowed = spec.conditional_on
        return values.get(parent) in allowed

    def validate(self, point: Mapping[str, Any]) -> None:
        """Raise :class:`SpaceError` unless ``point`` satisfies every domain and condition."""
        extra = set(point) - set(self.names)
        if extra:
            raise SpaceError(f"unknown parameters {sorted(extra)}")
        for spec in self.params:
            active = self.is_active(spec, point)
            if active and spec.name not in point:
                raise SpaceError(f"missing value for {spec.name}")
            if not active and spec.name in point:
                raise SpaceError(f"{spec.name} is inactive but assigned")
            if active and not spec.contains(point[spec.name]):
                raise SpaceError(f"{spec.name}={point[spec.name]!r} outside its domain")

    def contains(self, point: Mapping[str, Any]) -> bool:
        try:
            self.validate(point)
        except SpaceError:
            return False
        return True

    def to_dict(self) -> dict[str, Any]:
        return {p.name: p.to_dict() for p in self.params}

    @classmethod
    def from_dict(cls, data: Mapping[str, Mapping[str, Any]]) -> DesignSpace:
        params = []
        for name, d in data.items():
            cond = d.get("conditional_on")
            params.append(
                ParamSpec(
                    name=name,
                    kind=d["kind"],
                    lower=d.get("lower"),
                    upper=d.get("upper"),
                    categories=tuple(d.get("categories", ())),
                    conditional_on=(cond[0], cond[1]) if cond else None,
                )
            )
        return cls(tuple(params))

    @classmethod
    def load(cls, path: str) -> DesignSpace:
        """Read a JSON space file: ``{"name": {"kind": ..., "lower": ..., ...}}``."""
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def normalize(value, v_min: float, v_max: float):
    """Min-max scale ``value`` from ``[v_min, v_max]`` into ``[0, 1]``."""
    if not v_max > v_min:
        raise SpaceError(f"constant design variable: v_min={v_min!r}, v_max={v_max!r}")
    return (value - v_min) / (v_max - v_min)


def denormalize(nv, v_min: float, v_max: float):
    if not v_max > v_min:
        raise SpaceError(f"constant design variable: v_min={v_min!r}, v_max={v_max!r}")
    return v_min + nv * (v_max - v_min)


@dataclass(frozen=True)
class Normalizer:
    """Per-column min-max scaling bounds."""

    v_min: np.ndarray
    v_max: np.ndarray

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.v_min, dtype=float)).copy()
        hi = np.atleast_1d(np.asarray(self.v_max, dtype=float)).copy()
        if lo.shape != hi.shape:
            raise SpaceError("v_min and v_max must have equal length")
        bad = np.flatnonzero(~(hi > lo))
        if bad.size:
            raise SpaceError(f"constant design variable in column(s) {bad.tolist()}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "v_min", lo)
        object.__setattr__(self, "v_max", hi)

    @classmethod
    def fit(cls, values: np.ndarray) -> Normalizer:
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        return cls(values.min(axis=0), values.max(axis=0))

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.v_min) / (self.v_max - self.v_min)

    def inverse(self, values: np.ndarray) -> np.ndarray:
        return self.v_min + np.asarray(values, dtype=float) * (self.v_max - self.v_min)

    def to_dict(self) -> dict[str, list[float]]:
        return {"v_min": self.v_min.tolist(), "v_max": self.v_max.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Normalizer:
        return cls(np.asarray(d["v_min"], dtype=float), np.asarray(d["v_max"], dtype=float))


@dataclass(frozen=True)
class Subspace:
    """Restricted domains for every parameter of a :class:`DesignSpace`.

    ``bounds`` maps numeric parameter names to ``(lower, upper)`` and
    categorical names to their category tuple.
    """

    space: DesignSpace
    bounds: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def full(cls, space: DesignSpace) -> Subspace:
        b = {}
        for p in space.params:
            b[p.name] = p.categories if p.kind == CATEGORICAL else (p.lower, p.upper)
        return cls(space, b)

    def contains_subspace(self, other: Subspace) -> bool:
        for p in self.space.params:
            mine, theirs = self.bounds[p.name], other.bounds[p.name]
            if p.kind == CATEGORICAL:
                if not set(theirs) <= set(mine):
                    return False
            elif not (mine[0] <= theirs[0] <= theirs[1] <= mine[1]):
                return False
        return True

    def widths(self) -> dict[str, float]:
        return {
            p.name: self.bounds[p.name][1] - self.bounds[p.name][0]
            for p in self.space.params
            if p.kind != CATEGORICAL
        }


def _stratified_unit(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n x d Latin hypercube in [0, 1): one sample per 1/n stratum per column."""
    u = rng.random((n, d))
    out = np.empty((n, d))
    for j in range(d):
        out[:, j] = (rng.permutation(n) + u[:, j]) / n
    return out


def lhs_columns(
    sub: Subspace | DesignSpace, n: int, seed: int | np.random.Generator | None
) -> dict[str, np.ndarray]:
    """Column-wise LHS draw over ``sub``; inactive entries are not masked here.

    Numeric columns are float arrays, categorical columns are integer indices
    into the subspace's category tuple.
    """
    if n < 1:
        raise SpaceError("n must be >= 1")
    if isinstance(sub, DesignSpace):
        sub = Subspace.full(sub)
    rng = _as_rng(seed)
    space = sub.space
    numeric = [p for p in space.params if p.kind != CATEGORICAL]
    unit = _stratified_unit(n, len(numeric), rng)
    cols: dict[str, np.ndarray] = {}
    for j, p in enumerate(numeric):
        lo, hi = sub.bounds[p.name]
        if p.kind == CONTINUOUS:
            cols[p.name] = lo + unit[:, j] * (hi - lo)
        else:
            # stratify over [lo - 0.5, hi + 0.5) so each integer gets equal mass
            raw = (lo - 0.5) + unit[:, j] * (hi - lo + 1.0)
            cols[p.name] = np.clip(np.rint(raw), lo, hi)
    for p in space.params:
        if p.kind == CATEGORICAL:
            cats = sub.bounds[p.name]
            lookup = np.array([p.categories.index(c) for c in cats], dtype=int)
            cols[p.name] = lookup[rng.integers(0, len(cats), size=n)]
    return cols


def columns_to_points(space: DesignSpace, cols: Mapping[str, np.ndarray], rows=None) -> list[HpPoint]:
    n = len(next(iter(cols.values())))
    rows = range(n) if rows is None else rows
    out = []
    for i in rows:
        vals: dict[str, Any] = {}
        for p in space.params:
            if p.kind == CATEGORICAL:
                vals[p.name] = p.categories[int(cols[p.name][i])]
        for p in space.params:
            if p.kind == CATEGORICAL or not space.is_active(p, vals):
                continue
            v = cols[p.name][i]
            vals[p.name] = int(v) if p.kind == INTEGER else float(v)
        for p in space.params:
            if p.kind == CATEGORICAL and not space.is_active(p, vals):
                del vals[p.name]
        out.append(HpPoint(vals))
    return out


def lhs_sample(
    space: DesignSpace | Subspace, n: int, seed: int | np.random.Generator | None
) -> list[HpPoint]:
    """Draw ``n`` Latin-hypercube points over a space or subspace.

    Continuous dimensions get exactly one sample per ``1/n`` stratum,
    integers are stratified in real space and rounded, categoricals are
    independent uniform draws. Inactive conditional parameters are dropped.
    """
    sub = Subspace.full(space) if isinstance(space, DesignSpace) else space
    cols = lhs_columns(sub, n, seed)
    return columns_to_points(sub.space, cols)


def shrink(sub: Subspace, best: Mapping[str, Any], r_p: float = 0.25) -> Subspace:
    """Window of half-width ``r_p * width`` around ``best``, intersected with ``sub``.

    Integer ranges are rounded outward and never left empty. Categorical sets
    and parameters that are inactive in ``best`` keep their current domain.
    """
    if not 0.0 < r_p < 1.0:
        raise SpaceError("r_p must lie in (0, 1)")
    new = dict(sub.bounds)
    for p in sub.space.params:
        if p.kind == CATEGORICAL or p.name not in best:
            continue
        lo, hi = sub.bounds[p.name]
        b = float(best[p.name])
        half = r_p * (hi - lo)
        nlo, nhi = max(lo, b - half), min(hi, b + half)
        if p.kind == INTEGER:
            nlo, nhi = float(math.floor(nlo)), float(math.ceil(nhi))
            nlo, nhi = max(nlo, lo), min(nhi, hi)
            if nlo > nhi:
                k = float(min(max(round(b), lo), hi))
                nlo = nhi = k
        new[p.name] = (nlo, nhi)
    return Subspace(sub.space, new)


def encode_columns(space: DesignSpace, cols: Mapping[str, np.ndarray]) -> np.ndarray:
    """Vectorized surrogate encoding of LHS columns (see :func:`encode_for_surrogate`)."""
    n = len(next(iter(cols.values())))
    X = np.empty((n, len(space)))
    for j, p in enumerate(space.params):
        if p.kind == CATEGORICAL:
            X[:, j] = cols[p.name]
        elif p.width > 0:
            X[:, j] = (cols[p.name] - p.lower) / p.width
        else:
            X[:, j] = 0.0
        if p.conditional_on is not None:
            parent, allowed = p.conditional_on
            cats = space[parent].categories
            table = np.array([c in allowed for c in cats], dtype=bool)
            X[~table[np.asarray(cols[parent], dtype=int)], j] = INACTIVE
    return X


def encode_for_surrogate(point: Mapping[str, Any], space: DesignSpace) -> np.ndarray:
    """Feature row for the surrogate forest.

    Numeric values are min-max scaled by the full parameter bounds, categories
    become their index, inactive parameters take :data:`INACTIVE`.
    """
    row = np.empty(len(space))
    for j, p in enumerate(space.params):
        if p.name not in point:
            row[j] = INACTIVE
        elif p.kind == CATEGORICAL:
            row[j] = p.categories.index(point[p.name])
        elif p.width > 0:
            row[j] = (float(point[p.name]) - p.lower) / p.width
        else:
            row[j] = 0.0
    return row


def categorical_mask(space: DesignSpace) -> np.ndarray:
    return np.array([p.kind == CATEGORICAL for p in space.params], dtype=bool)
