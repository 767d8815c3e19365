"""Tuning spaces and initial hyperparameter values for the four learners."""

from __future__ import annotations

from .space import CATEGORICAL, CONTINUOUS, INTEGER, DesignSpace, HpPoint, ParamSpec

LEARNERS = ("gpr", "svr", "rfr", "ann")
KERNELS = ("rbfdot", "polydot", "tanhdot", "laplacedot")
ACTIVATIONS = ("tanhdot", "relu", "sigmoid", "softrelu")
OPTIMIZERS = ("sgd", "rmsprop", "adam", "adagrad")

_DISTANCE_KERNELS = ("rbfdot", "laplacedot")
_DOT_KERNELS = ("polydot", "tanhdot")


def _kernel_params() -> list[ParamSpec]:
    return [
        ParamSpec("kernel", CATEGORICAL, categories=KERNELS),
        ParamSpec("sigma", CONTINUOUS, 0.0, 10.0, conditional_on=("kernel", _DISTANCE_KERNELS)),
        ParamSpec("degree", INTEGER, 1, 10, conditional_on=("kernel", ("polydot",))),
        ParamSpec("scale", CONTINUOUS, 0.0, 10.0, conditional_on=("kernel", _DOT_KERNELS)),
        ParamSpec("offset", CONTINUOUS, -10.0, 10.0, conditional_on=("kernel", _DOT_KERNELS)),
    ]


def gpr_space() -> DesignSpace:
    return DesignSpace(tuple(_kernel_params()))


def svr_space() -> DesignSpace:
    return DesignSpace(
        (
            ParamSpec("C", CONTINUOUS, 0.0, 10.0),
            ParamSpec("epsilon", CONTINUOUS, 0.0, 1.0),
            *_kernel_params(),
        )
    )


def rfr_space(n_features: int | None = None) -> DesignSpace:
    """RFR space; ``nf`` is capped at ``n_features`` when given."""
    nf_hi = 100 if n_features is None else max(1, min(100, int(n_features)))
    return DesignSpace(
        (
            ParamSpec("trees", INTEGER, 1, 1000),
            ParamSpec("nf", INTEGER, 1, nf_hi),
            ParamSpec("min_ts", INTEGER, 1, 50),
            ParamSpec("max_tn", INTEGER, 1, 1000),
        )
    )


def ann_space() -> DesignSpace:
    return DesignSpace(
        (
            ParamSpec("hidden_neurons", INTEGER, 1, 100),
            ParamSpec("activation", CATEGORICAL, categories=ACTIVATIONS),
            ParamSpec("optimizer", CATEGORICAL, categories=OPTIMIZERS),
            ParamSpec("batch_size", INTEGER, 50, 200),
            ParamSpec("learning_rate", CONTINUOUS, 0.01, 1.0),
            ParamSpec("momentum", CONTINUOUS, 0.5, 0.99, conditional_on=("optimizer", ("sgd",))),
        )
    )


def space_for(learner: str, n_features: int | None = None) -> DesignSpace:
    if learner == "gpr":
        return gpr_space()
    if learner == "svr":
        return svr_space()
    if learner == "rfr":
        return rfr_space(n_features)
    if learner == "ann":
        return ann_space()
    raise ValueError(f"unknown learner {learner!r}; expected one of {LEARNERS}")


# Initial ("before HOpt") values. RFR's unlimited max_tn is expressed by
# omitting the key; ANN's momentum of 0.0 lies outside its tuning range and
# is therefore not validated against the space.
INITIAL_POINTS = {
    "gpr": HpPoint(kernel="rbfdot", sigma=0.5),
    "svr": HpPoint(C=1.0, epsilon=0.1, kernel="rbfdot", sigma=0.5),
    "rfr": HpPoint(trees=500, nf=3, min_ts=5),
    "ann": HpPoint(
        hidden_neurons=10,
        activation="tanhdot",
        optimizer="sgd",
        batch_size=120,
        learning_rate=0.1,
        momentum=0.0,
    ),
}


def initial_point(learner: str) -> HpPoint:
    try:
        return INITIAL_POINTS[learner]
    except KeyError:
        raise ValueError(f"unknown learner {learner!r}") from None
