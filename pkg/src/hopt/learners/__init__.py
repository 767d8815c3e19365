"""The four tunable regressors behind one ``fit_learner`` entry point."""

from __future__ import annotations

import json
from collections.abc import Mapping
from typing import Any

import numpy as np

from .ann import AnnHyperparams, AnnModel, ann_fit
from .base import FitFailure
from .forest import RfrHyperparams, RfrModel, rfr_fit
from .gpr import GprModel, gpr_fit
from .kernels import KernelSpec, gram, kernel_eval
from .svr import SvrModel, svr_fit

__all__ = [
    "AnnHyperparams", "AnnModel", "FitFailure", "GprModel", "KernelSpec",
    "RfrHyperparams", "RfrModel", "SvrModel", "ann_fit", "fit_learner",
    "gpr_fit", "gram", "kernel_eval", "load_model", "model_from_dict",
    "model_to_dict", "rfr_fit", "save_model", "svr_fit",
]

MODEL_FORMAT = "hopt-model"
MODEL_VERSION = 1


def rfr_hyperparams(point: Mapping[str, Any]) -> RfrHyperparams:
    return RfrHyperparams(
        trees=int(point.get("trees", 500)),
        nf=int(point.get("nf", 3)),
        min_ts=int(point.get("min_ts", 5)),
        max_tn=None if point.get("max_tn") is None else int(point["max_tn"]),
    )


def ann_hyperparams(point: Mapping[str, Any], max_epochs: int = 2000) -> AnnHyperparams:
    opt = point.get("optimizer", "sgd")
    return AnnHyperparams(
        hidden_neurons=int(point.get("hidden_neurons", 10)),
        activation=point.get("activation", "tanhdot"),
        optimizer=opt,
        batch_size=int(point.get("batch_size", 120)),
        learning_rate=float(point.get("learning_rate", 0.1)),
        momentum=float(point.get("momentum", 0.0)) if opt == "sgd" else None,
        max_epochs=int(point.get("max_epochs", max_epochs)),
    )


def fit_learner(kind: str, point: Mapping[str, Any], X: np.ndarray, y: np.ndarray, seed: int = 0):
    """Fit learner ``kind`` configured by ``point``; the returned model has ``predict``.

    ANN batch sizes larger than the training set are reduced to its size.
    """
    if kind == "gpr":
        return gpr_fit(X, y, KernelSpec.from_point(point))
    if kind == "svr":
        return svr_fit(X, y, float(point.get("C", 1.0)), float(point.get("epsilon", 0.1)), KernelSpec.from_point(point))
    if kind == "rfr":
        return rfr_fit(X, y, rfr_hyperparams(point), seed=seed)
    if kind == "ann":
        hp = ann_hyperparams(point)
        n = len(np.atleast_2d(X))
        if hp.batch_size > n:
            hp = AnnHyperparams(**{**hp.__dict__, "batch_size": n})
        return ann_fit(X, y, hp, seed=seed)
    raise ValueError(f"unknown learner {kind!r}")


def _arr(a: np.ndarray) -> dict[str, Any]:
    return {"dtype": str(a.dtype), "shape": list(a.shape), "data": a.ravel().tolist()}


def _unarr(d: Mapping[str, Any]) -> np.ndarray:
    return np.asarray(d["data"], dtype=d["dtype"]).reshape(d["shape"])


def model_to_dict(model) -> dict[str, Any]:
    head = {"format": MODEL_FORMAT, "version": MODEL_VERSION}
    if isinstance(model, GprModel):
        return {**head, "kind": "gpr", "X": _arr(model.X), "weights": _arr(model.weights),
                "jitter": model.jitter, "kernel": model.kernel.to_dict()}
    if isinstance(model, SvrModel):
        return {**head, "kind": "svr", "X": _arr(model.X), "alpha": _arr(model.alpha),
                "alpha_star": _arr(model.alpha_star), "b": model.b, "kernel": model.kernel.to_dict(),
                "C": model.C, "epsilon": model.epsilon, "iterations": model.iterations}
    if isinstance(model, RfrModel):
        arrays = {k: _arr(getattr(model, k)) for k in
                  ("roots", "feature", "threshold", "catmask", "left", "right", "value", "is_cat")}
        return {**head, "kind": "rfr", **arrays, "hp": model.hp.__dict__}
    if isinstance(model, AnnModel):
        return {**head, "kind": "ann", "theta": _arr(model.theta), "n_inputs": model.n_inputs,
                "hp": model.hp.__dict__, "epochs_run": model.epochs_run}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(d: Mapping[str, Any]):
    if d.get("format") != MODEL_FORMAT or d.get("version") != MODEL_VERSION:
        raise ValueError("unsupported model artifact format/version")
    kind = d["kind"]
    if kind == "gpr":
        return GprModel(_unarr(d["X"]), KernelSpec(**d["kernel"]), _unarr(d["weights"]), d["jitter"])
    if kind == "svr":
        return SvrModel(_unarr(d["X"]), _unarr(d["alpha"]), _unarr(d["alpha_star"]), d["b"],
                        KernelSpec(**d["kernel"]), d["C"], d["epsilon"], d["iterations"])
    if kind == "rfr":
        keys = ("roots", "feature", "threshold", "catmask", "left", "right", "value", "is_cat")
        return RfrModel(*(_unarr(d[k]) for k in keys), hp=RfrHyperparams(**d["hp"]))
    if kind == "ann":
        return AnnModel(_unarr(d["theta"]), d["n_inputs"], AnnHyperparams(**d["hp"]), d["epochs_run"])
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path: str):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
