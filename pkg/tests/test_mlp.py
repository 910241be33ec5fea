import numpy as np
import pytest

from fdareg import mlp
from fdareg.errors import ValidationError


def finite_difference_grad(params, X, y, hidden, decay, eps=1e-5):
    # eps balances truncation (~eps^2) against rounding (~eps_mach/eps)
    grad = np.zeros_like(params)
    for i in range(params.size):
        up, down = params.copy(), params.copy()
        up[i] += eps
        down[i] -= eps
        lu, _ = mlp.loss_and_grad(up, X, y, hidden, decay)
        ld, _ = mlp.loss_and_grad(down, X, y, hidden, decay)
        grad[i] = (lu - ld) / (2 * eps)
    return grad


class TestForward:
    def test_zero_network(self):
        model = mlp.MlpModel(np.zeros((2, 3)), np.zeros(2), np.zeros(2), 0.0)
        assert mlp.forward(model, np.ones(3)) == 0.0

    def test_zero_hidden_weights_constant_output(self, rng):
        b = rng.normal(size=3)
        w = rng.normal(size=3)
        b0 = 1.5
        model = mlp.MlpModel(np.zeros((3, 4)), b, w, b0)
        X = rng.normal(size=(20, 4))
        expected = b0 + np.tanh(b) @ w
        np.testing.assert_allclose(mlp.forward(model, X), expected)

    def test_hidden_permutation_symmetry(self, rng):
        V = rng.normal(size=(4, 3))
        b = rng.normal(size=4)
        w = rng.normal(size=4)
        model = mlp.MlpModel(V, b, w, 0.3)
        perm = rng.permutation(4)
        permuted = mlp.MlpModel(V[perm], b[perm], w[perm], 0.3)
        X = rng.normal(size=(15, 3))
        np.testing.assert_allclose(
            mlp.forward(model, X), mlp.forward(permuted, X), atol=1e-12
        )

    def test_dimension_mismatch(self):
        model = mlp.MlpModel(np.zeros((2, 3)), np.zeros(2), np.zeros(2), 0.0)
        with pytest.raises(ValidationError):
            mlp.forward(model, np.ones(4))


class TestGradients:
    def test_matches_central_differences(self, rng):
        # 20 random configurations, every parameter, 1e-6 relative
        for _ in range(20):
            hidden = int(rng.integers(1, 5))
            dim = int(rng.integers(1, 6))
            n = int(rng.integers(4, 12))
            decay = float(rng.choice([0.0, 1e-3, 0.5]))
            X = rng.normal(size=(n, dim))
            y = rng.normal(size=n)
            params = rng.normal(size=hidden * dim + 2 * hidden + 1) * 0.8
            _, grad = mlp.loss_and_grad(params, X, y, hidden, decay)
            fd = finite_difference_grad(params, X, y, hidden, decay)
            # entries below the FD noise floor are compared on the
            # gradient's own scale
            scale = np.maximum(np.abs(fd), 1e-3 * max(1.0, np.abs(fd).max()))
            assert np.max(np.abs(grad - fd) / scale) < 1e-6

    def test_decay_excludes_biases(self, rng):
        hidden, dim = 3, 2
        X = rng.normal(size=(6, dim))
        y = rng.normal(size=6)
        params = rng.normal(size=hidden * dim + 2 * hidden + 1)
        _, g_with = mlp.loss_and_grad(params, X, y, hidden, 10.0)
        _, g_without = mlp.loss_and_grad(params, X, y, hidden, 0.0)
        penalty_grad = g_with - g_without
        sv, sb, sw, ib0 = mlp._shapes(hidden, dim)
        np.testing.assert_allclose(penalty_grad[sb], 0.0, atol=1e-12)
        assert penalty_grad[ib0] == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(penalty_grad[sv], 2 * 10.0 * params[sv], atol=1e-10)


class TestTrain:
    def test_fits_linear_function(self, rng):
        X = rng.normal(size=(40, 2))
        y = 0.7 * X[:, 0] - 0.2 * X[:, 1] + 0.5
        model = mlp.train(X, y, hidden=2, decay=1e-6, restarts=6, seed=1, max_iter=300)
        resid = mlp.forward(model, X) - y
        assert np.sqrt(np.mean(resid**2)) < 0.05

    def test_huge_decay_gives_constant_mean_predictor(self, rng):
        X = rng.normal(size=(30, 3))
        y = rng.normal(size=30) + 4.0
        model = mlp.train(X, y, hidden=2, decay=1e6, restarts=4, seed=2, max_iter=300)
        assert np.max(np.abs(model.hidden_weights)) < 1e-3
        assert np.max(np.abs(model.output_weights)) < 1e-3
        preds = mlp.forward(model, X)
        np.testing.assert_allclose(preds, np.mean(y), atol=0.05)

    def test_best_of_restarts(self, rng):
        # training once with many restarts is at least as good as each
        # single-restart run launched from the same master seed
        X = rng.normal(size=(25, 2))
        y = np.sin(X[:, 0]) * np.cos(X[:, 1])

        def final_loss(model):
            p = mlp.pack(model)
            return mlp.loss_and_grad(p, X, y, model.hidden_count, model.decay)[0]

        best = mlp.train(X, y, hidden=3, decay=1e-4, restarts=10, seed=7, max_iter=150)
        best_loss = final_loss(best)
        # pick a few alternative restart counts; the 10-restart winner can
        # never lose to the 1-restart run with the same seed stream
        single = mlp.train(X, y, hidden=3, decay=1e-4, restarts=1, seed=7, max_iter=150)
        assert best_loss <= final_loss(single) + 1e-9

    def test_deterministic_given_seed(self, rng):
        X = rng.normal(size=(20, 2))
        y = rng.normal(size=20)
        m1 = mlp.train(X, y, hidden=2, decay=1e-3, restarts=5, seed=11, max_iter=100)
        m2 = mlp.train(X, y, hidden=2, decay=1e-3, restarts=5, seed=11, max_iter=100)
        np.testing.assert_array_equal(m1.hidden_weights, m2.hidden_weights)
        np.testing.assert_array_equal(m1.output_weights, m2.output_weights)

    def test_monotone_loss_under_optimizer(self, rng):
        # accepted steps never increase the regularized loss: verify the
        # final loss does not exceed the initial loss of the best restart
        X = rng.normal(size=(15, 2))
        y = rng.normal(size=15)
        init = mlp.init_params(3, 2, 2, 4)
        init_losses = [
            mlp.loss_and_grad(p, X, y, 2, 1e-3)[0] for p in init
        ]
        model = mlp.train(X, y, hidden=2, decay=1e-3, restarts=4, seed=3, max_iter=200)
        final = mlp.loss_and_grad(mlp.pack(model), X, y, 2, 1e-3)[0]
        assert final <= min(init_losses) + 1e-9


class TestSelectMeta:
    def test_degenerate_grid_single_cell(self, rng):
        X = rng.normal(size=(24, 5))
        y = X[:, 0] + 0.1 * rng.normal(size=24)
        sel = mlp.select_meta(
            X, y, hidden_grid=(2,), decay_grid=(1e-3,), component_grid=(2,),
            folds=3, fold_seed=0, restarts=3, max_iter=80,
        )
        assert (sel.hidden, sel.decay, sel.n_components) == (2, 1e-3, 2)

    def test_deterministic(self, rng):
        X = rng.normal(size=(24, 4))
        y = X[:, 0] - X[:, 1]
        kwargs = dict(
            hidden_grid=(1, 2), decay_grid=(1e-4, 1e-2), component_grid=(1, 2, 3),
            folds=3, fold_seed=5, restart_seed=9, restarts=3, max_iter=60,
        )
        a = mlp.select_meta(X, y, **kwargs)
        b = mlp.select_meta(X, y, **kwargs)
        assert (a.hidden, a.decay, a.n_components) == (b.hidden, b.decay, b.n_components)
        assert a.cv_table == b.cv_table

    def test_selects_informative_components(self, rng):
        # target depends on two strong directions; CV should not pick 1 comp
        n = 48
        basis_dirs = np.linalg.qr(rng.normal(size=(6, 6)))[0]
        scores = rng.normal(size=(n, 2)) * [3.0, 2.0]
        X = scores @ basis_dirs[:2] + 0.01 * rng.normal(size=(n, 6))
        y = scores[:, 0] * scores[:, 1]
        sel = mlp.select_meta(
            X, y, hidden_grid=(3,), decay_grid=(1e-4,), component_grid=(1, 2),
            folds=4, fold_seed=1, restarts=4, max_iter=150,
        )
        assert sel.n_components == 2
