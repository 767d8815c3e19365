"""Single-hidden-layer regression network trained by mini-batch gradient descent.

Parameters live in one flat vector ``[W1 (d*h), b1 (h), W2 (h), b2]`` so the
optimizers can update them in a single pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .base import FitFailure

ACTIVATIONS = ("tanhdot", "relu", "sigmoid", "softrelu")
OPTIMIZERS = ("sgd", "rmsprop", "adam", "adagrad")

RMS_DECAY = 0.9
ADAM_BETAS = (0.9, 0.999)
ADAPT_EPS = 1e-8


@dataclass(frozen=True)
class AnnHyperparams:
    hidden_neurons: int = 10
    activation: str = "tanhdot"
    optimizer: str = "sgd"
    batch_size: int = 120
    learning_rate: float = 0.1
    momentum: float | None = 0.0
    max_epochs: int = 2000
    tol: float = 1e-4
    patience: int = 100

    def __post_init__(self) -> None:
        if self.hidden_neurons < 1:
            raise ValueError("hidden_neurons must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if (self.momentum is not None) != (self.optimizer == "sgd"):
            raise ValueError("momentum is set iff optimizer is sgd")
        if self.batch_size < 1 or self.max_epochs < 1 or not self.learning_rate > 0:
            raise ValueError("batch_size, max_epochs and learning_rate must be positive")
        if self.tol < 0 or self.patience < 0:
            raise ValueError("tol and patience must be >= 0")


@numba.njit(cache=True)
def _act(z, kind):
    if kind == 0:
        return np.tanh(z)
    if kind == 1:
        return np.maximum(z, 0.0)
    if kind == 2:
        return 1.0 / (1.0 + np.exp(-z))
    # softplus, written to avoid overflow for large z
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


@numba.njit(cache=True)
def _act_grad(z, a, kind):
    if kind == 0:
        return 1.0 - a * a
    if kind == 1:
        return (z > 0.0) * 1.0
    if kind == 2:
        return a * (1.0 - a)
    return 1.0 / (1.0 + np.exp(-z))


@numba.njit(cache=True)
def _forward(theta, X, h, kind):
    d = X.shape[1]
    W1 = theta[: d * h].reshape((d, h))
    b1 = theta[d * h : d * h + h]
    W2 = theta[d * h + h : d * h + 2 * h]
    b2 = theta[d * h + 2 * h]
    Z = X @ W1 + b1
    A = _act(Z, kind)
    out = A @ W2 + b2
    return Z, A, out


@numba.njit(cache=True)
def _loss_grad(theta, X, y, h, kind):
    n, d = X.shape
    Z, A, out = _forward(theta, X, h, kind)
    r = out - y
    loss = np.mean(r * r)
    dout = 2.0 * r / n
    W2 = theta[d * h + h : d * h + 2 * h]
    grad = np.empty_like(theta)
    dZ = np.outer(dout, W2) * _act_grad(Z, A, kind)
    grad[: d * h] = (X.T @ dZ).ravel()
    grad[d * h : d * h + h] = dZ.sum(axis=0)
    grad[d * h + h : d * h + 2 * h] = A.T @ dout
    grad[d * h + 2 * h] = dout.sum()
    return loss, grad


@numba.njit(cache=True)
def _train(theta, X, y, h, kind, opt, batch, lr, mom, epochs, seed, tol, patience):
    np.random.seed(seed)
    n = X.shape[0]
    p = theta.shape[0]
    s1 = np.zeros(p)  # sgd: previous step; rmsprop/adagrad: squared-gradient state; adam: m
    s2 = np.zeros(p)  # adam: v
    t = 0
    best = np.inf
    since_best = 0
    ran = epochs
    for ep in range(epochs):
        perm = np.random.permutation(n)
        ep_loss = 0.0
        for lo in range(0, n, batch):
            hi = min(lo + batch, n)
            idx = perm[lo:hi]
            loss, g = _loss_grad(theta, X[idx], y[idx], h, kind)
            if not np.isfinite(loss):
                return theta, False, ep
            ep_loss += loss * (hi - lo) / n
            t += 1
            if opt == 0:
                step = -lr * g + mom * s1
                theta += step
                s1 = step
            elif opt == 1:
                s1 = RMS_DECAY * s1 + (1.0 - RMS_DECAY) * g * g
                theta -= lr * g / (np.sqrt(s1) + ADAPT_EPS)
            elif opt == 2:
                b1, b2 = ADAM_BETAS
                s1 = b1 * s1 + (1.0 - b1) * g
                s2 = b2 * s2 + (1.0 - b2) * g * g
                mhat = s1 / (1.0 - b1**t)
                vhat = s2 / (1.0 - b2**t)
                theta -= lr * mhat / (np.sqrt(vhat) + ADAPT_EPS)
            else:
                s1 = s1 + g * g
                theta -= lr * g / (np.sqrt(s1) + ADAPT_EPS)
        # convergence stop: epoch loss has not improved by a relative tol for `patience` epochs
        if ep_loss < best * (1.0 - tol):
            best = ep_loss
            since_best = 0
        else:
            since_best += 1
            if patience > 0 and since_best >= patience:
                ran = ep + 1
                break
    _, _, out = _forward(theta, X, h, kind)
    ok = np.all(np.isfinite(theta)) and np.all(np.isfinite(out))
    return theta, ok, ran


def sgd_step(w, grad, lr: float, momentum: float, prev_step):
    """One momentum-SGD update; returns ``(new_w, step)`` with ``step = -lr*grad + momentum*prev_step``."""
    step = -lr * np.asarray(grad, dtype=float) + momentum * np.asarray(prev_step, dtype=float)
    return np.asarray(w, dtype=float) + step, step


def n_params(n_inputs: int, hidden: int) -> int:
    return n_inputs * hidden + 2 * hidden + 1


def init_params(n_inputs: int, hidden: int, seed: int) -> np.ndarray:
    """Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases."""
    rng = np.random.default_rng(seed)
    a1 = np.sqrt(6.0 / (n_inputs + hidden))
    a2 = np.sqrt(6.0 / (hidden + 1))
    theta = np.zeros(n_params(n_inputs, hidden))
    theta[: n_inputs * hidden] = rng.uniform(-a1, a1, n_inputs * hidden)
    theta[n_inputs * hidden + hidden : n_inputs * hidden + 2 * hidden] = rng.uniform(-a2, a2, hidden)
    return theta


def loss_and_grad(theta, X, y, hidden: int, activation: str) -> tuple[float, np.ndarray]:
    """Mean squared error and its gradient with respect to the flat parameters."""
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
    y = np.ascontiguousarray(np.asarray(y, dtype=float).ravel())
    loss, g = _loss_grad(np.asarray(theta, dtype=float).copy(), X, y, hidden, ACTIVATIONS.index(activation))
    return float(loss), g


@dataclass(frozen=True)
class AnnModel:
    theta: np.ndarray
    n_inputs: int
    hp: AnnHyperparams
    epochs_run: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
        _, _, out = _forward(self.theta, X, self.hp.hidden_neurons, ACTIVATIONS.index(self.hp.activation))
        return out


def ann_fit(X: np.ndarray, y: np.ndarray, hp: AnnHyperparams, seed: int = 0) -> AnnModel:
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))
    y = np.ascontiguousarray(np.asarray(y, dtype=float).ravel())
    n, d = X.shape
    if hp.batch_size > n:
        raise ValueError(f"batch_size={hp.batch_size} exceeds dataset size {n}")
    theta = init_params(d, hp.hidden_neurons, seed)
    theta, ok, epochs = _train(
        theta, X, y, hp.hidden_neurons,
        ACTIVATIONS.index(hp.activation), OPTIMIZERS.index(hp.optimizer),
        int(hp.batch_size), float(hp.learning_rate),
        float(hp.momentum or 0.0), int(hp.max_epochs), int(seed) % (2**32),
        float(hp.tol), int(hp.patience),
    )
    if not ok:
        raise FitFailure(f"training diverged after {epochs} epochs", hp)
    return AnnModel(theta, d, hp, int(epochs))
