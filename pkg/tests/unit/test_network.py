"""Tests for the scoring network, hinge loss and gradients."""

import numpy as np
import pytest

from src.models import (
    DenseLayer,
    DimensionMismatchError,
    NormalizerStats,
    NumericError,
    RankerModel,
)
from src.services.network import (
    DEFAULT_HIDDEN,
    backward,
    check_gradients,
    forward,
    forward_batch,
    hinge_pair_loss,
    init_model,
    pair_objective,
)
from src.utils.rng import make_rng


def _identity(dim):
    return NormalizerStats(np.zeros(dim), np.ones(dim))


def _model(layers, dim=None, normalizer=None):
    dim = dim or np.asarray(layers[0][0]).shape[0]
    return RankerModel(
        layers=[DenseLayer(np.asarray(w, float), np.asarray(b, float)) for w, b in layers],
        normalizer=normalizer or _identity(dim),
    )


class TestInitModel:
    def test_default_architecture(self):
        model = init_model(55)
        assert model.dims == [55, *DEFAULT_HIDDEN, 1]

    def test_weights_within_fan_in_bound_and_zero_biases(self):
        model = init_model(20, hidden=(8, 4), seed=3)
        for layer in model.layers:
            assert np.abs(layer.weight).max() <= np.sqrt(6.0 / layer.fan_in)
            assert not layer.bias.any()

    def test_seeded(self):
        a, b = init_model(10, (6,), seed=7), init_model(10, (6,), seed=7)
        c = init_model(10, (6,), seed=8)
        for x, y in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(x, y)
        assert not np.array_equal(a.layers[0].weight, c.layers[0].weight)

    def test_parameters_are_float32_exact(self):
        model = init_model(12, (5,), seed=1)
        for p in model.parameters():
            np.testing.assert_array_equal(p, p.astype(np.float32).astype(np.float64))

    def test_invalid_input_dim(self):
        with pytest.raises(ValueError):
            init_model(0)


class TestForward:
    def test_zero_model_scores_zero(self, rng):
        model = _model([(np.zeros((4, 3)), np.zeros(3)), (np.zeros((3, 1)), np.zeros(1))])
        assert forward(model, rng.normal(size=4)) == 0.0

    def test_single_layer_by_hand(self):
        model = _model([([[0.25], [-0.5]], [0.1])])
        assert forward(model, np.array([2.0, 1.0])) == pytest.approx(0.1, abs=1e-12)

    def test_two_unit_network_by_hand(self):
        # hidden = relu([x1 - x2, x1 + x2]); score = 2 * h1 - h2 + 0.5
        model = _model(
            [
                ([[1.0, 1.0], [-1.0, 1.0]], [0.0, 0.0]),
                ([[2.0], [-1.0]], [0.5]),
            ]
        )
        assert forward(model, np.array([3.0, 1.0])) == pytest.approx(2 * 2 - 4 + 0.5, abs=1e-6)
        assert forward(model, np.array([1.0, 3.0])) == pytest.approx(0 - 4 + 0.5, abs=1e-6)

    def test_normalizer_applied(self):
        normalizer = NormalizerStats(np.array([1.0, 2.0]), np.array([2.0, 4.0]))
        model = _model([([[1.0], [1.0]], [0.0])], normalizer=normalizer)
        assert forward(model, np.array([3.0, 6.0])) == pytest.approx(2.0)

    def test_deterministic_and_batched(self, rng):
        model = init_model(8, (6, 4), seed=2)
        x = rng.normal(size=(5, 8))
        scores = forward_batch(model, x)
        assert forward(model, x[2]) == pytest.approx(scores[2], rel=1e-12)
        np.testing.assert_array_equal(forward_batch(model, x), scores)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            forward(init_model(8, (4,)), np.zeros(7))

    def test_non_finite_score(self):
        model = _model([([[1e308], [1e308]], [0.0])])
        with pytest.raises(NumericError):
            forward(model, np.array([1e10, 1e10]))


class TestHingePairLoss:
    @pytest.mark.parametrize(
        "s_pos,s_neg,expected",
        [(2.0, 0.5, 0.0), (0.7, 0.5, 0.8), (0.3, 0.3, 1.0)],
    )
    def test_values(self, s_pos, s_neg, expected):
        assert hinge_pair_loss(s_pos, s_neg, margin=1.0) == pytest.approx(expected)

    def test_reversed_labels_flip_the_sign(self):
        assert hinge_pair_loss(0.5, 2.0, y_pos=0, y_neg=1) == 0.0

    def test_zero_iff_margin_met(self, rng):
        for s_pos, s_neg in rng.normal(scale=2.0, size=(200, 2)):
            loss = hinge_pair_loss(s_pos, s_neg, margin=1.0)
            assert loss >= 0.0
            assert (loss == 0.0) == (s_pos - s_neg >= 1.0)


class TestBackward:
    def test_satisfied_margin_leaves_only_weight_decay(self):
        model = _model([([[10.0]], [0.0])])
        loss, grads = backward(model, np.array([[1.0]]), np.array([[-1.0]]), 1.0, 0.01)
        assert loss == 0.0
        for grad, param in zip(grads, model.parameters()):
            np.testing.assert_allclose(grad, 0.01 * param)

    def test_zero_model_has_zero_gradient(self, rng):
        model = _model([(np.zeros((4, 3)), np.zeros(3)), (np.zeros((3, 1)), np.zeros(1))])
        loss, grads = backward(model, rng.normal(size=(2, 4)), rng.normal(size=(2, 4)))
        assert loss == 1.0
        assert all(not g.any() for g in grads)

    def test_linear_model_by_hand(self):
        # score = w . x + b; every pair violates the margin
        model = _model([([[0.0], [0.0]], [0.0])])
        x_pos = np.array([[1.0, 2.0], [3.0, 0.0]])
        x_neg = np.array([[0.0, 1.0], [1.0, 1.0]])
        loss, (grad_w, grad_b) = backward(model, x_pos, x_neg)
        assert loss == 1.0
        np.testing.assert_allclose(grad_w[:, 0], -(x_pos - x_neg).mean(axis=0))
        np.testing.assert_allclose(grad_b, [0.0])

    def test_gradient_layout_matches_parameters(self, rng):
        model = init_model(6, (5, 3), seed=1)
        _, grads = backward(model, rng.normal(size=(4, 6)), rng.normal(size=(4, 6)))
        assert [g.shape for g in grads] == [p.shape for p in model.parameters()]

    def test_empty_batch(self):
        model = init_model(4, (3,))
        with pytest.raises(ValueError):
            backward(model, np.empty((0, 4)), np.empty((0, 4)))

    def test_objective_matches_loss_without_decay(self, rng):
        model = init_model(5, (4,), seed=9)
        x_pos, x_neg = rng.normal(size=(3, 5)), rng.normal(size=(3, 5))
        loss, _ = backward(model, x_pos, x_neg)
        assert pair_objective(model, x_pos, x_neg) == pytest.approx(loss)

    def test_finite_differences_toy_model(self, rng):
        model = init_model(8, (6, 5, 4), seed=4)
        x_pos, x_neg = rng.normal(size=(4, 8)), rng.normal(size=(4, 8))
        error, checked = check_gradients(model, x_pos, x_neg, weight_decay=5e-4)
        assert checked > 0
        assert error < 1e-4

    def test_finite_differences_random_models(self):
        rng = make_rng(2024)
        for trial in range(100):
            dim = int(rng.integers(4, 17))
            hidden = tuple(int(w) for w in rng.integers(2, 7, size=int(rng.integers(1, 4))))
            n_pairs = int(rng.integers(1, 6))
            model = init_model(dim, hidden, seed=trial)
            x_pos = rng.normal(size=(n_pairs, dim))
            x_neg = rng.normal(size=(n_pairs, dim))
            decay = float(rng.choice([0.0, 5e-4, 1e-2]))

            error, _ = check_gradients(model, x_pos, x_neg, margin=1.0, weight_decay=decay)
            assert error < 1e-4, f"trial {trial}: relative error {error:.3e}"
