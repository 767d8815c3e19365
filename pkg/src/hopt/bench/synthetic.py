"""Synthetic regression families with known ground truth.

Each family carries complexity tags (variable count, mixed-type flag,
domain continuity) so results can be grouped by problem type.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..data import Dataset
from ..space import Normalizer, _stratified_unit


@dataclass(frozen=True)
class SyntheticFamily:
    name: str
    dims: int
    mixed: bool
    continuous_domain: bool
    levels: dict[int, int]  # column -> number of discrete levels
    truth: Callable[[np.ndarray], np.ndarray]

    def tags(self) -> dict:
        return {"variables": self.dims, "mixed": self.mixed, "continuous_domain": self.continuous_domain}


def _smooth(X: np.ndarray) -> np.ndarray:
    return (
        np.sin(np.pi * X[:, 0]) * np.cos(0.5 * np.pi * X[:, 1])
        + 0.5 * (X[:, 2] - 0.4) ** 2
        + 0.3 * X[:, 3] * X[:, 4]
    )


def _mixed(X: np.ndarray) -> np.ndarray:
    level = np.rint(X[:, 3] * 2).astype(int)  # categorical, 3 levels
    offset = np.array([0.0, 0.35, -0.2])[level]
    return np.sin(1.5 * np.pi * X[:, 0]) * (1.0 + X[:, 2]) + 0.4 * X[:, 1] ** 2 + offset


def _discontinuous(X: np.ndarray) -> np.ndarray:
    smooth = 0.15 * np.sin(2 * np.pi * X[:, 1]) + 0.1 * X[:, 2] + 0.05 * X[:, 3]
    return smooth + 0.6 * (X[:, 0] > 0.5)


FAMILIES: dict[str, SyntheticFamily] = {
    "smooth": SyntheticFamily("smooth", 5, False, True, {}, _smooth),
    "mixed": SyntheticFamily("mixed", 4, True, True, {2: 5, 3: 3}, _mixed),
    "discontinuous": SyntheticFamily("discontinuous", 4, False, False, {}, _discontinuous),
}


def family(kind: str) -> SyntheticFamily:
    try:
        return FAMILIES[kind]
    except KeyError:
        raise ValueError(f"unknown synthetic kind {kind!r}; choose from {sorted(FAMILIES)}") from None


def synthetic_dataset(kind: str, n: int, noise_sd: float = 0.0, seed: int = 0) -> Dataset:
    """LHS sample of family ``kind`` on the unit cube, min-max normalized.

    Discrete columns are snapped to ``levels`` evenly spaced values in [0, 1].
    ``noise_sd`` is Gaussian noise in raw response units.
    """
    fam = family(kind)
    if n < 2:
        raise ValueError("n must be >= 2")
    if noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    rng = np.random.default_rng(seed)
    X = _stratified_unit(n, fam.dims, rng)
    for col, k in fam.levels.items():
        X[:, col] = np.rint(X[:, col] * (k - 1)) / (k - 1)
    y = fam.truth(X)
    if noise_sd > 0:
        y = y + rng.normal(0.0, noise_sd, size=n)
    fn, rn = Normalizer.fit(X), Normalizer.fit(y[:, None])
    meta = {"generator": "synthetic", "kind": kind, "n": int(n), "seed": int(seed),
            "noise_sd": float(noise_sd), "complexity": fam.tags()}
    names = tuple(f"x{j + 1}" for j in range(fam.dims))
    return Dataset(fn.transform(X), rn.transform(y[:, None]).ravel(), names, "y", fn, rn, meta)


def ground_truth(ds: Dataset) -> np.ndarray:
    """Noise-free normalized response at the dataset's own inputs."""
    fam = family(ds.meta["kind"])
    X = ds.feature_normalizer.inverse(ds.features)
    y = fam.truth(X)
    return ds.response_normalizer.transform(y[:, None]).ravel()
