"""Kernel functions shared by GPR and SVR."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.spatial.distance import cdist

KERNEL_KINDS = ("rbfdot", "polydot", "tanhdot", "laplacedot")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbfdot"
    sigma: float = 1.0
    degree: int = 1
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind in ("rbfdot", "laplacedot") and self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.kind == "polydot" and (int(self.degree) != self.degree or self.degree < 1):
            raise ValueError("degree must be an integer >= 1")
        object.__setattr__(self, "degree", int(self.degree))

    @classmethod
    def from_point(cls, point: Mapping[str, Any]) -> KernelSpec:
        kind = point.get("kernel", "rbfdot")
        kw: dict[str, Any] = {"kind": kind}
        for key in ("sigma", "degree", "scale", "offset"):
            if key in point:
                kw[key] = point[key]
        return cls(**kw)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "sigma": self.sigma,
            "degree": self.degree,
            "scale": self.scale,
            "offset": self.offset,
        }


def kernel_eval(k: KernelSpec, x, x2) -> float:
    """Evaluate the kernel on a single pair of feature rows."""
    x = np.asarray(x, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    if x.shape != x2.shape:
        raise ValueError("feature rows must have the same dimension")
    if k.kind == "rbfdot":
        d = x - x2
        return float(np.exp(-k.sigma * np.dot(d, d)))
    if k.kind == "laplacedot":
        d = x - x2
        return float(np.exp(-k.sigma * np.sqrt(np.dot(d, d))))
    dot = float(np.dot(x, x2))
    if k.kind == "polydot":
        return float((k.scale * dot + k.offset) ** k.degree)
    return float(np.tanh(k.scale * dot + k.offset))


def gram(k: KernelSpec, A: np.ndarray, B: np.ndarray | None = None) -> np.ndarray:
    """Kernel matrix between the rows of ``A`` and ``B`` (``B`` defaults to ``A``)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    sym = B is None
    B = A if sym else np.atleast_2d(np.asarray(B, dtype=float))
    if k.kind == "rbfdot":
        K = np.exp(-k.sigma * cdist(A, B, "sqeuclidean"))
    elif k.kind == "laplacedot":
        K = np.exp(-k.sigma * cdist(A, B, "euclidean"))
    else:
        inner = k.scale * (A @ B.T) + k.offset
        K = inner**k.degree if k.kind == "polydot" else np.tanh(inner)
    if sym:
        # exact symmetry regardless of BLAS summation order
        K = np.triu(K) + np.triu(K, 1).T
    return K
