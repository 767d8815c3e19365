from __future__ import annotations

import numpy as np
import pytest

from hopt.learners import (
    AnnHyperparams,
    FitFailure,
    KernelSpec,
    RfrHyperparams,
    ann_fit,
    fit_learner,
    gpr_fit,
    gram,
    kernel_eval,
    load_model,
    rfr_fit,
    save_model,
    svr_fit,
)
from hopt.learners.ann import ACTIVATIONS, init_params, loss_and_grad, n_params, sgd_step
from hopt.presets import initial_point
from oracles import SVR_TAU, cart_oracle, check_svr_kkt, gauss_solve, same_tree, traverse


# ---------------------------------------------------------------- kernels


def test_kernel_examples():
    x = np.array([0.3, 0.7, 0.1])
    x2 = np.array([0.9, 0.2, 0.4])
    assert kernel_eval(KernelSpec("rbfdot", sigma=0.5), x, x) == 1.0
    assert kernel_eval(KernelSpec("polydot", degree=1, scale=1.0, offset=0.0), x, x2) == pytest.approx(float(x @ x2), abs=1e-15)
    KernelSpec("polydot", degree=3, scale=7.22, offset=-2.24)


@pytest.mark.parametrize("kind", ["rbfdot", "polydot", "tanhdot", "laplacedot"])
def test_kernel_symmetry_and_gram_consistency(kind):
    rng = np.random.default_rng(1)
    k = KernelSpec(kind, sigma=1.3, degree=3, scale=0.7, offset=0.4)
    A = rng.random((15, 4))
    K = gram(k, A)
    assert np.array_equal(K, K.T)
    for i in range(15):
        for j in range(15):
            assert kernel_eval(k, A[i], A[j]) == kernel_eval(k, A[j], A[i])
            assert K[i, j] == pytest.approx(kernel_eval(k, A[i], A[j]), rel=1e-12, abs=1e-12)
    B = rng.random((5, 4))
    np.testing.assert_allclose(gram(k, A, B), [[kernel_eval(k, a, b) for b in B] for a in A], rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("kind", ["rbfdot", "laplacedot"])
def test_distance_kernels_bounded(kind):
    rng = np.random.default_rng(2)
    k = KernelSpec(kind, sigma=2.0)
    for _ in range(200):
        x, x2 = rng.random(3), rng.random(3)
        v = kernel_eval(k, x, x2)
        assert 0 < v < 1
        assert kernel_eval(k, x, x) == 1.0


def test_kernel_validation():
    with pytest.raises(ValueError):
        KernelSpec("rbfdot", sigma=-1.0)
    with pytest.raises(ValueError):
        KernelSpec("polydot", degree=0)
    with pytest.raises(ValueError):
        KernelSpec("cosine")


# ---------------------------------------------------------------- GPR


def test_gpr_interpolates_linear_data():
    X = np.linspace(0, 1, 5)[:, None]
    y = X.ravel()
    m = gpr_fit(X, y, KernelSpec("rbfdot", sigma=0.5))
    assert np.max(np.abs(m.predict(X) - y)) <= 1e-6


@pytest.mark.parametrize("n", [5, 12, 40])
def test_gpr_training_residual_is_ridge_term(n):
    # y - K w = jitter * w exactly for the regularised solve
    X = np.linspace(0, 1, n)[:, None]
    y = X.ravel()
    m = gpr_fit(X, y, KernelSpec("rbfdot", sigma=0.5))
    np.testing.assert_allclose(y - m.predict(X), m.jitter * m.weights, rtol=0, atol=1e-9)


def test_gpr_constant_targets():
    X = np.random.default_rng(0).random((10, 2))
    m = gpr_fit(X, np.full(10, 0.3), KernelSpec("rbfdot", sigma=2.0))
    np.testing.assert_allclose(m.predict(X), 0.3, atol=1e-6)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("kind", ["rbfdot", "laplacedot", "polydot"])
def test_gpr_matches_gaussian_elimination_oracle(seed, kind):
    rng = np.random.default_rng(seed)
    X, y = rng.random((20, 3)), rng.random(20)
    k = KernelSpec(kind, sigma=1.5, degree=4, scale=0.8, offset=1.0)  # full-rank Gram for 20 points
    m = gpr_fit(X, y, k)
    K = [[kernel_eval(k, a, b) + (m.jitter if i == j else 0.0) for j, b in enumerate(X)] for i, a in enumerate(X)]
    w = gauss_solve(K, y)
    Q = rng.random((10, 3))
    oracle = np.array([sum(kernel_eval(k, q, x) * wi for x, wi in zip(X, w)) for q in Q])
    np.testing.assert_allclose(m.predict(Q), oracle, rtol=0, atol=1e-8)


def test_gpr_errors():
    with pytest.raises(ValueError):
        gpr_fit(np.ones((5, 2)), np.arange(5.0), KernelSpec("rbfdot", sigma=1.0))
    X = np.random.default_rng(0).random((30, 2))
    # tanh Gram with huge negative offset is indefinite beyond any jitter in the ladder
    with pytest.raises(FitFailure) as exc:
        gpr_fit(X, X[:, 0], KernelSpec("tanhdot", scale=10.0, offset=-10.0))
    assert exc.value.config is not None


# ---------------------------------------------------------------- SVR


@pytest.mark.parametrize("seed", range(20))
def test_svr_kkt_random_fits(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(15, 60)), int(rng.integers(1, 5))
    X = rng.random((n, d))
    y = np.clip(np.sin(3 * X.sum(axis=1)) * 0.4 + 0.5 + rng.normal(0, 0.05, n), 0, 1)
    kind = ["rbfdot", "laplacedot", "polydot"][seed % 3]
    k = KernelSpec(kind, sigma=float(rng.uniform(0.2, 5)), degree=int(rng.integers(1, 4)),
                   scale=float(rng.uniform(0.1, 1.5)), offset=float(rng.uniform(0, 1)))
    m = svr_fit(X, y, C=float(rng.uniform(0.1, 10)), epsilon=float(rng.uniform(0, 0.2)), kernel=k)
    check_svr_kkt(m, X, y)


def test_svr_linear_data_inside_tube():
    X = np.linspace(0, 1, 25)[:, None]
    y = 2 * X.ravel() + 1
    m = svr_fit(X, y, C=100.0, epsilon=0.01, kernel=KernelSpec("polydot", degree=1, scale=1.0, offset=0.0))
    assert np.max(np.abs(m.predict(X) - y)) <= 0.01 + SVR_TAU


def test_svr_wide_tube_has_no_support_vectors():
    X = np.random.default_rng(3).random((20, 2))
    y = np.random.default_rng(4).random(20) * 0.5
    m = svr_fit(X, y, C=1.0, epsilon=1.0, kernel=KernelSpec("rbfdot", sigma=1.0))
    assert np.all(m.alpha == 0) and np.all(m.alpha_star == 0)
    np.testing.assert_allclose(m.predict(X), m.b)


def test_svr_accepts_table4_config():
    X = np.random.default_rng(5).random((40, 10))
    y = X.mean(axis=1)
    fit_learner("svr", {"C": 0.81, "epsilon": 0.07, "kernel": "polydot", "degree": 7, "scale": 2.73, "offset": 5.87}, X, y)


def test_svr_invalid_c_is_fit_failure():
    X = np.random.default_rng(0).random((10, 2))
    with pytest.raises(FitFailure):
        svr_fit(X, X[:, 0], C=0.0, epsilon=0.1, kernel=KernelSpec("rbfdot", sigma=1.0))


# ---------------------------------------------------------------- RFR


@pytest.mark.parametrize("seed", range(10))
def test_rfr_single_tree_equals_exhaustive_cart(seed):
    rng = np.random.default_rng(seed)
    X = rng.random((12, 3))
    X[:4, 1] = 0.5  # ties in one feature
    y = rng.random(12)
    m = rfr_fit(X, y, RfrHyperparams(trees=1, nf=3, min_ts=1, max_tn=None), seed=seed, bootstrap=False)
    oracle = cart_oracle(X, y, np.arange(12))
    same_tree(oracle, m.tree(0))
    np.testing.assert_array_equal(m.predict(X), y)


def test_rfr_single_row_predicts_constant():
    m = rfr_fit(np.array([[0.2, 0.4]]), np.array([0.7]), RfrHyperparams(trees=1, nf=1, min_ts=1))
    np.testing.assert_array_equal(m.predict(np.random.default_rng(0).random((5, 2))), 0.7)


def test_rfr_mean_of_trees_and_range():
    rng = np.random.default_rng(0)
    X, y = rng.random((80, 4)), rng.random(80)
    m = rfr_fit(X, y, RfrHyperparams(trees=25, nf=2, min_ts=3), seed=4)
    Q = rng.random((200, 4)) * 1.4 - 0.2
    P = m.tree_predictions(Q)
    for i in range(0, 200, 37):
        for t in range(m.n_trees):
            assert P[i, t] == traverse(m.tree(t), Q[i])
    np.testing.assert_array_equal(m.predict(Q), P.mean(axis=1))
    assert m.predict(Q).min() >= y.min() and m.predict(Q).max() <= y.max()


def test_rfr_respects_min_ts_and_max_tn():
    rng = np.random.default_rng(1)
    X, y = rng.random((100, 3)), rng.random(100)
    m = rfr_fit(X, y, RfrHyperparams(trees=5, nf=3, min_ts=7, max_tn=6), seed=0, bootstrap=False)
    for t in range(5):
        tree = m.tree(t)
        leaves = np.flatnonzero(tree["left"] < 0)
        assert len(leaves) <= 6
        counts = {}
        for x in X:
            node = 0
            while tree["left"][node] >= 0:
                node = tree["left"][node] if x[tree["feature"][node]] <= tree["threshold"][node] else tree["right"][node]
            counts[node] = counts.get(node, 0) + 1
        assert min(counts.values()) >= 7


def test_rfr_categorical_feature_split():
    rng = np.random.default_rng(2)
    cat = rng.integers(0, 4, 60).astype(float)
    X = np.column_stack([cat, rng.random(60)])
    y = np.array([0.1, 0.9, 0.2, 0.8])[cat.astype(int)]
    m = rfr_fit(X, y, RfrHyperparams(trees=1, nf=2, min_ts=1), bootstrap=False, is_categorical=np.array([True, False]))
    np.testing.assert_allclose(m.predict(X), y, rtol=0, atol=1e-15)
    assert m.tree(0)["feature"][0] == 0


def test_rfr_nf_above_feature_count():
    with pytest.raises(ValueError):
        rfr_fit(np.random.default_rng(0).random((10, 2)), np.arange(10.0), RfrHyperparams(trees=1, nf=3))


def test_rfr_variance_across_seeds_shrinks_with_trees():
    rng = np.random.default_rng(3)
    X, y = rng.random((60, 3)), rng.random(60)
    q = np.array([[0.4, 0.5, 0.6]])
    var = []
    for trees in (1, 10, 100):
        preds = [rfr_fit(X, y, RfrHyperparams(trees=trees, nf=2, min_ts=2), seed=1000 * s).predict(q)[0] for s in range(50)]
        var.append(np.var(preds))
    assert var[0] >= var[1] >= var[2]


# ---------------------------------------------------------------- ANN


def test_sgd_rule_examples():
    w, step = sgd_step(1.0, 0.5, 0.1, 0.9, 0.0)
    assert w == pytest.approx(0.95, abs=1e-15)
    w2, _ = sgd_step(w, 0.5, 0.1, 0.9, step)
    assert w2 == pytest.approx(0.855, abs=1e-15)


@pytest.mark.parametrize("activation", ACTIVATIONS)
def test_ann_gradient_matches_finite_differences(activation):
    rng = np.random.default_rng(ACTIVATIONS.index(activation))
    d, h, h_step = 7, 8, 1e-5
    for _ in range(50):
        X, y = rng.random((12, d)), rng.random(12)
        theta = rng.normal(0, 0.7, n_params(d, h))
        _, g = loss_and_grad(theta, X, y, h, activation)
        fd = np.empty_like(theta)
        for k in range(theta.size):
            tp, tm = theta.copy(), theta.copy()
            tp[k] += h_step
            tm[k] -= h_step
            fd[k] = (loss_and_grad(tp, X, y, h, activation)[0] - loss_and_grad(tm, X, y, h, activation)[0]) / (2 * h_step)
        rel = np.linalg.norm(g - fd) / max(np.linalg.norm(g), np.linalg.norm(fd), 1e-12)
        assert rel < 1e-4, (activation, rel)


def test_ann_init_bounds():
    theta = init_params(10, 20, 0)
    a1 = np.sqrt(6 / 30)
    assert np.all(np.abs(theta[:200]) <= a1)
    assert np.all(theta[200:220] == 0)


def test_ann_fits_and_is_deterministic():
    rng = np.random.default_rng(0)
    X = rng.random((150, 3))
    y = 0.5 + 0.3 * np.sin(2 * X[:, 0]) * X[:, 1]
    hp = AnnHyperparams(hidden_neurons=10, activation="tanhdot", optimizer="adam", batch_size=50,
                        learning_rate=0.01, momentum=None, max_epochs=300)
    m1, m2 = ann_fit(X, y, hp, seed=3), ann_fit(X, y, hp, seed=3)
    np.testing.assert_array_equal(m1.predict(X), m2.predict(X))
    assert np.sqrt(np.mean((m1.predict(X) - y) ** 2)) < 0.05


@pytest.mark.parametrize("optimizer", ["sgd", "rmsprop", "adam", "adagrad"])
def test_ann_optimizers_reduce_loss(optimizer):
    rng = np.random.default_rng(1)
    X = rng.random((100, 2))
    y = X[:, 0] * 0.5 + 0.2
    hp = AnnHyperparams(hidden_neurons=5, optimizer=optimizer, batch_size=50, learning_rate=0.05,
                        momentum=0.5 if optimizer == "sgd" else None, max_epochs=200)
    m = ann_fit(X, y, hp, seed=0)
    base = np.mean((y - y.mean()) ** 2)
    assert np.mean((m.predict(X) - y) ** 2) < base


def test_ann_divergence_is_fit_failure():
    rng = np.random.default_rng(0)
    X = rng.random((60, 2)) * 50
    hp = AnnHyperparams(hidden_neurons=5, activation="relu", batch_size=60, learning_rate=1e6, momentum=0.9, max_epochs=50)
    with pytest.raises(FitFailure):
        ann_fit(X, X[:, 0], hp)


def test_ann_hyperparam_rules():
    with pytest.raises(ValueError):
        AnnHyperparams(optimizer="adam", momentum=0.9)
    with pytest.raises(ValueError):
        AnnHyperparams(optimizer="sgd", momentum=None)
    with pytest.raises(ValueError):
        ann_fit(np.zeros((10, 2)), np.zeros(10), AnnHyperparams(batch_size=20))


# ---------------------------------------------------------------- dispatch and artifacts


@pytest.mark.parametrize("kind", ["gpr", "svr", "rfr", "ann"])
def test_fit_learner_deterministic_and_round_trip(kind, tmp_path):
    rng = np.random.default_rng(7)
    X, y = rng.random((60, 4)), rng.random(60)
    point = initial_point(kind)
    m1 = fit_learner(kind, point, X, y, seed=2)
    m2 = fit_learner(kind, point, X, y, seed=2)
    Q = rng.random((30, 4))
    np.testing.assert_array_equal(m1.predict(Q), m2.predict(Q))
    path = tmp_path / f"{kind}.json"
    save_model(m1, str(path))
    np.testing.assert_array_equal(load_model(str(path)).predict(Q), m1.predict(Q))


def test_fit_learner_unknown_kind():
    with pytest.raises(ValueError):
        fit_learner("knn", {}, np.zeros((3, 1)), np.zeros(3))
