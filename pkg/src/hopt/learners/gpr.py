"""Zero-mean Gaussian process regression (kernel interpolation with jitter)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .base import FitFailure
from .kernels import KernelSpec, gram

JITTER_LADDER = tuple(10.0**e for e in range(-8, -1))


@dataclass(frozen=True)
class GprModel:
    X: np.ndarray
    kernel: KernelSpec
    weights: np.ndarray
    jitter: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return gram(self.kernel, np.atleast_2d(X), self.X) @ self.weights


def gpr_fit(X: np.ndarray, y: np.ndarray, kernel: KernelSpec) -> GprModel:
    """Solve ``(K + jitter * s * I) w = y`` by Cholesky.

    The jitter climbs by decades from 1e-8 to 1e-2 until the factorization
    succeeds; ``s`` is the mean absolute Gram diagonal (at least 1) so the
    ladder is independent of kernel magnitude.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if len(X) != len(y):
        raise ValueError("X and y lengths differ")
    if len(np.unique(X, axis=0)) < 2:
        raise ValueError("GPR needs at least two distinct rows")
    K = gram(kernel, X)
    if not np.all(np.isfinite(K)):
        raise FitFailure("non-finite Gram matrix", kernel)
    s = max(1.0, float(np.mean(np.abs(np.diag(K)))))
    n = len(X)
    for jit in JITTER_LADDER:
        A = K + (jit * s) * np.eye(n)
        try:
            c = cho_factor(A, lower=True, check_finite=False)
        except LinAlgError:
            continue
        w = cho_solve(c, y, check_finite=False)
        if np.all(np.isfinite(w)):
            return GprModel(X.copy(), kernel, w, jit * s)
    raise FitFailure(f"Gram matrix not positive definite up to jitter 1e-2 ({kernel})", kernel)
