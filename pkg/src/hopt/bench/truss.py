"""Planar pin-jointed truss solved by the direct stiffness method.

The default problem is the classic ten-bar cantilever: two square bays,
supports on the left, equal downward loads at the two free lower nodes.
"""

from __future__ import annotations

import json
import warnings
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..data import Dataset
from ..space import CONTINUOUS, DesignSpace, Normalizer, ParamSpec, lhs_columns

INCH = 0.0254
KIP = 4448.2216152605
FEASIBLE_DISPLACEMENT = 0.60  # m
MIN_SAMPLE_FACTOR = 3


class TrussError(ValueError):
    """Invalid truss definition or kinematically unstable structure."""


@dataclass(frozen=True)
class TrussProblem:
    """Geometry, material, supports and loads of a planar truss.

    ``nodes`` is (n, 2) in meters, ``members`` is (m, 2) of 0-based node
    indices, ``supports`` is (n, 2) booleans (True = fixed dof), ``loads``
    is (n, 2) in newtons. The response is the downward displacement of
    ``response_node``.
    """

    nodes: np.ndarray
    members: np.ndarray
    E: np.ndarray
    supports: np.ndarray
    loads: np.ndarray
    response_node: int
    area_bounds: tuple[float, float] = (0.6e-4, 225.8e-4)

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        members = np.asarray(self.members, dtype=np.int64).reshape(-1, 2)
        E = np.asarray(self.E, dtype=float).ravel()
        if E.size not in (1, len(members)):
            raise TrussError(f"E needs 1 or {len(members)} values, got {E.size}")
        E = np.broadcast_to(E, (len(members),)).copy()
        sup = np.asarray(self.supports, dtype=bool).reshape(-1, 2)
        loads = np.asarray(self.loads, dtype=float).reshape(-1, 2)
        n = len(nodes)
        if sup.shape[0] != n or loads.shape[0] != n:
            raise TrussError("supports and loads need one row per node")
        if members.size == 0 or members.min() < 0 or members.max() >= n:
            raise TrussError("member references an unknown node")
        if np.any(members[:, 0] == members[:, 1]):
            raise TrussError("member connects a node to itself")
        if np.any(E <= 0) or not np.all(np.isfinite(E)):
            raise TrussError("elastic moduli must be positive")
        if not 0 <= self.response_node < n:
            raise TrussError("response_node out of range")
        lo, hi = self.area_bounds
        if not 0 < lo < hi:
            raise TrussError("area bounds must satisfy 0 < lower < upper")
        lengths = np.linalg.norm(nodes[members[:, 1]] - nodes[members[:, 0]], axis=1)
        if np.any(lengths <= 0):
            raise TrussError("zero-length member")
        for name, arr in (("nodes", nodes), ("members", members), ("E", E), ("supports", sup), ("loads", loads)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "area_bounds", (float(lo), float(hi)))

    @property
    def n_members(self) -> int:
        return len(self.members)

    @property
    def free_dofs(self) -> np.ndarray:
        return np.flatnonzero(~self.supports.ravel())

    @classmethod
    def ten_bar(cls) -> TrussProblem:
        bay = 360.0 * INCH
        nodes = [(2 * bay, bay), (2 * bay, 0.0), (bay, bay), (bay, 0.0), (0.0, bay), (0.0, 0.0)]
        members = [(4, 2), (2, 0), (5, 3), (3, 1), (2, 3), (0, 1), (4, 3), (5, 2), (2, 1), (3, 0)]
        supports = np.zeros((6, 2), dtype=bool)
        supports[4:] = True
        loads = np.zeros((6, 2))
        loads[1, 1] = loads[3, 1] = -100.0 * KIP
        return cls(np.array(nodes), np.array(members), np.full(10, 68.95e9), supports, loads, response_node=1)

    def to_dict(self) -> dict[str, Any]:
        return {
            "nodes": self.nodes.tolist(),
            "members": self.members.tolist(),
            "E": self.E.tolist(),
            "supports": self.supports.tolist(),
            "loads": self.loads.tolist(),
            "response_node": int(self.response_node),
            "area_bounds": list(self.area_bounds),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> TrussProblem:
        """Overlay ``d`` on the ten-bar defaults; any subset of fields may be given."""
        base = cls.ten_bar().to_dict()
        unknown = set(d) - set(base)
        if unknown:
            raise TrussError(f"unknown truss config keys: {sorted(unknown)}")
        base.update(d)
        base["area_bounds"] = tuple(base["area_bounds"])
        return cls(**base)

    @classmethod
    def load(cls, path: str | Path) -> TrussProblem:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class TrussSolution:
    displacements: np.ndarray  # (n, 2)
    axial_forces: np.ndarray  # (m,), tension positive
    reactions: np.ndarray  # (n, 2), zero on free dofs

    def downward(self, node: int) -> float:
        return float(-self.displacements[node, 1])


def _geometry(problem: TrussProblem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d = problem.nodes[problem.members[:, 1]] - problem.nodes[problem.members[:, 0]]
    L = np.linalg.norm(d, axis=1)
    return L, d[:, 0] / L, d[:, 1] / L


def _check_areas(problem: TrussProblem, areas) -> np.ndarray:
    a = np.asarray(areas, dtype=float).ravel()
    if a.shape != (problem.n_members,):
        raise TrussError(f"expected {problem.n_members} areas, got {a.size}")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise TrussError("areas must be finite and positive")
    return a


def stiffness_matrix(problem: TrussProblem, areas) -> np.ndarray:
    """Global (2n x 2n) stiffness matrix before constraints."""
    a = _check_areas(problem, areas)
    L, c, s = _geometry(problem)
    K = np.zeros((2 * len(problem.nodes),) * 2)
    for e, (i, j) in enumerate(problem.members):
        k = problem.E[e] * a[e] / L[e]
        t = np.array([-c[e], -s[e], c[e], s[e]])
        dofs = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
        K[np.ix_(dofs, dofs)] += k * np.outer(t, t)
    return K


def truss_analyze(problem: TrussProblem, areas) -> TrussSolution:
    a = _check_areas(problem, areas)
    K = stiffness_matrix(problem, a)
    free = problem.free_dofs
    Kff = K[np.ix_(free, free)]
    if free.size == 0:
        raise TrussError("no free degrees of freedom")
    if np.linalg.cond(Kff) > 1e13:
        raise TrussError("reduced stiffness matrix is singular (unstable structure)")
    try:
        cf = cho_factor(Kff)
    except LinAlgError:
        raise TrussError("reduced stiffness matrix is not positive definite (unstable structure)") from None
    f = problem.loads.ravel()
    u = np.zeros_like(f)
    u[free] = cho_solve(cf, f[free])
    r = K @ u - f
    r[free] = 0.0
    L, c, s = _geometry(problem)
    ui = u.reshape(-1, 2)[problem.members[:, 0]]
    uj = u.reshape(-1, 2)[problem.members[:, 1]]
    elong = (uj[:, 0] - ui[:, 0]) * c + (uj[:, 1] - ui[:, 1]) * s
    N = problem.E * a / L * elong
    return TrussSolution(u.reshape(-1, 2), N, r.reshape(-1, 2))


def truss_solve(problem: TrussProblem, areas) -> float:
    """Downward displacement (m) of the response node."""
    return truss_analyze(problem, areas).downward(problem.response_node)


def area_space(problem: TrussProblem) -> DesignSpace:
    lo, hi = problem.area_bounds
    return DesignSpace([ParamSpec(f"A{e + 1}", CONTINUOUS, lo, hi) for e in range(problem.n_members)])


def generate_tbpt_dataset(n: int, seed: int, problem: TrussProblem | None = None) -> Dataset:
    """LHS over the member areas, solved and min-max normalized.

    Rows are kept regardless of feasibility; the sidecar metadata lists rows
    whose raw displacement exceeds the 0.60 m limit.
    """
    problem = problem or TrussProblem.ten_bar()
    if n < 2:
        raise ValueError("n must be >= 2")
    floor = MIN_SAMPLE_FACTOR * problem.n_members
    if n < floor:
        warnings.warn(f"n={n} is below the recommended minimum of {floor} samples", stacklevel=2)
    space = area_space(problem)
    cols = lhs_columns(space, n, seed)
    X = np.column_stack([cols[name] for name in space.names])
    y = np.array([truss_solve(problem, row) for row in X])
    fn, rn = Normalizer.fit(X), Normalizer.fit(y[:, None])
    infeasible = np.flatnonzero(y > FEASIBLE_DISPLACEMENT)
    meta = {
        "generator": "tbpt",
        "n": int(n),
        "seed": int(seed),
        "response_units": "m",
        "feasible_limit_m": FEASIBLE_DISPLACEMENT,
        "infeasible_rows": infeasible.tolist(),
        "complexity": {"variables": problem.n_members, "mixed": False, "continuous_domain": True},
    }
    return Dataset(
        fn.transform(X), rn.transform(y[:, None]).ravel(), tuple(space.names), "d",
        fn, rn, meta,
    )
