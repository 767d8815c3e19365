"""Epsilon-SVR trained by pairwise (SMO-type) coordinate ascent on the dual.

The dual is written over ``beta = [alpha, alpha*]`` with signs
``z = [+1, -1]``::

    min  1/2 beta' Q beta + p' beta
    s.t. z' beta = 0,  0 <= beta <= C

where ``Q_st = z_s z_t K(x_s, x_t)``, ``p = [eps - y, eps + y]``. Each step
updates the maximal-violating pair picked with second-order information.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .base import FitFailure
from .kernels import KernelSpec, gram

KKT_TOL = 1e-3
MAX_PASSES = 10_000
_TAU = 1e-12


@dataclass(frozen=True)
class SvrModel:
    X: np.ndarray
    alpha: np.ndarray
    alpha_star: np.ndarray
    b: float
    kernel: KernelSpec
    C: float
    epsilon: float
    iterations: int

    @property
    def coef(self) -> np.ndarray:
        return self.alpha - self.alpha_star

    def predict(self, X: np.ndarray) -> np.ndarray:
        return gram(self.kernel, np.atleast_2d(X), self.X) @ self.coef + self.b


@numba.njit(cache=True)
def _smo(K, y, C, eps, tol, max_iter):
    n = y.shape[0]
    m2 = 2 * n
    beta = np.zeros(m2)
    z = np.empty(m2)
    G = np.empty(m2)
    for t in range(n):
        z[t] = 1.0
        z[t + n] = -1.0
        G[t] = eps - y[t]
        G[t + n] = eps + y[t]
    it = 0
    converged = False
    while it < max_iter:
        # i: maximal -z*G over I_up
        gmax = -np.inf
        i = -1
        for t in range(m2):
            up = (z[t] > 0 and beta[t] < C) or (z[t] < 0 and beta[t] > 0)
            if up:
                v = -z[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        gmin = np.inf
        j = -1
        best = np.inf
        if i >= 0:
            ii = i % n
            for t in range(m2):
                low = (z[t] > 0 and beta[t] > 0) or (z[t] < 0 and beta[t] < C)
                if not low:
                    continue
                v = -z[t] * G[t]
                if v < gmin:
                    gmin = v
                bdiff = gmax - v
                if bdiff > 0:
                    tt = t % n
                    a = K[ii, ii] + K[tt, tt] - 2.0 * K[ii, tt]
                    if a <= 0:
                        a = _TAU
                    score = -(bdiff * bdiff) / a
                    if score < best:
                        best = score
                        j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            converged = True
            break
        it += 1
        ii = i % n
        jj = j % n
        Qii = K[ii, ii]
        Qjj = K[jj, jj]
        Qij = z[i] * z[j] * K[ii, jj]
        oi = beta[i]
        oj = beta[j]
        if z[i] != z[j]:
            quad = Qii + Qjj + 2.0 * Qij
            if quad <= 0:
                quad = _TAU
            delta = (-G[i] - G[j]) / quad
            diff = beta[i] - beta[j]
            beta[i] += delta
            beta[j] += delta
            if diff > 0:
                if beta[j] < 0:
                    beta[j] = 0.0
                    beta[i] = diff
            else:
                if beta[i] < 0:
                    beta[i] = 0.0
                    beta[j] = -diff
            if diff > 0:
                if beta[i] > C:
                    beta[i] = C
                    beta[j] = C - diff
            else:
                if beta[j] > C:
                    beta[j] = C
                    beta[i] = C + diff
        else:
            quad = Qii + Qjj - 2.0 * Qij
            if quad <= 0:
                quad = _TAU
            delta = (G[i] - G[j]) / quad
            s = beta[i] + beta[j]
            beta[i] -= delta
            beta[j] += delta
            if s > C:
                if beta[i] > C:
                    beta[i] = C
                    beta[j] = s - C
            else:
                if beta[j] < 0:
                    beta[j] = 0.0
                    beta[i] = s
            if s > C:
                if beta[j] > C:
                    beta[j] = C
                    beta[i] = s - C
            else:
                if beta[i] < 0:
                    beta[i] = 0.0
                    beta[j] = s
        di = beta[i] - oi
        dj = beta[j] - oj
        for t in range(m2):
            tt = t % n
            G[t] += z[t] * (z[i] * K[tt, ii] * di + z[j] * K[tt, jj] * dj)
    # bias: average over free variables, else midpoint of the feasible interval
    ub = np.inf
    lb = -np.inf
    nfree = 0
    sfree = 0.0
    for t in range(m2):
        yg = z[t] * G[t]
        if beta[t] >= C:
            if z[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif beta[t] <= 0:
            if z[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            nfree += 1
            sfree += yg
    if nfree > 0:
        rho = sfree / nfree
    else:
        rho = 0.5 * (ub + lb)
    return beta[:n].copy(), beta[n:].copy(), -rho, it, converged


def svr_fit(
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    epsilon: float,
    kernel: KernelSpec,
    tol: float = KKT_TOL,
    max_passes: int = MAX_PASSES,
) -> SvrModel:
    """Fit an epsilon-SVR; the dual is solved until the maximal KKT violation is below ``tol``.

    One pass is ``n`` pair updates; ``max_passes`` passes without
    convergence raise :class:`FitFailure`.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if len(X) != len(y) or len(y) == 0:
        raise ValueError("X and y must be non-empty with equal length")
    if not C > 0:
        raise FitFailure(f"C must be > 0, got {C}", kernel)
    if epsilon < 0:
        raise FitFailure(f"epsilon must be >= 0, got {epsilon}", kernel)
    K = np.ascontiguousarray(gram(kernel, X))
    if not np.all(np.isfinite(K)):
        raise FitFailure("non-finite kernel matrix", kernel)
    a, a_star, b, it, ok = _smo(K, y, float(C), float(epsilon), float(tol), int(max_passes) * len(y))
    if not ok or not np.isfinite(b):
        raise FitFailure(f"SVR dual did not converge in {it} updates", kernel)
    both = np.minimum(a, a_star)
    a = a - both
    a_star = a_star - both
    return SvrModel(X.copy(), a, a_star, float(b), kernel, float(C), float(epsilon), int(it))
