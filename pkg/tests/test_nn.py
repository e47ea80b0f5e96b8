import numpy as np
import pytest

from saginmc.errors import ShapeError
from saginmc.harness.verification import run_gradient_checks
from saginmc.learning.nn import (
    AdamState,
    Head,
    Mlp,
    adam_step,
    entropy,
    gradient_check,
    greedy_argmax,
    log_probabilities,
    mlp_backward,
)


class TestForward:
    def test_identity_net(self):
        net = Mlp([3, 3], seed=0)
        net.weights[0][...] = np.eye(3)
        x = np.array([0.5, -2.0, 7.0])
        output, _ = net.forward(x)
        np.testing.assert_allclose(output, x)

    def test_uniform_softmax(self):
        net = Mlp([2, 3], head=Head.SOFTMAX, seed=0)
        net.weights[0][...] = 0.0
        output, _ = net.forward(np.array([1.0, -1.0]))
        np.testing.assert_allclose(output, np.full(3, 1.0 / 3.0))

    def test_matches_manual_computation(self, rng):
        net = Mlp([3, 5, 2], seed=4)
        x = rng.normal(size=(6, 3))
        hidden = np.tanh(x @ net.weights[0] + net.biases[0])
        expected = hidden @ net.weights[1] + net.biases[1]
        output, _ = net.forward(x)
        np.testing.assert_allclose(output, expected)

    def test_batch_matches_rows(self, rng):
        net = Mlp([4, 6, 3], head=Head.SOFTMAX, seed=1)
        x = rng.normal(size=(5, 4))
        batch, _ = net.forward(x)
        for row, expected in zip(x, batch):
            single, _ = net.forward(row)
            np.testing.assert_allclose(single, expected)

    def test_softmax_is_a_distribution(self, rng):
        net = Mlp([4, 8, 15], head=Head.SOFTMAX, seed=2)
        output, _ = net.forward(rng.normal(scale=10.0, size=(50, 4)))
        assert np.all(output >= 0.0)
        np.testing.assert_allclose(output.sum(axis=1), 1.0, atol=1e-9)

    def test_softmax_shift_invariance(self, rng):
        net = Mlp([4, 5], head=Head.SOFTMAX, seed=3)
        x = rng.normal(size=4)
        before, _ = net.forward(x)
        net.biases[-1] += 100.0
        after, _ = net.forward(x)
        np.testing.assert_allclose(before, after)

    def test_wrong_input_width(self):
        net = Mlp([3, 2], seed=0)
        with pytest.raises(ShapeError):
            net.forward(np.zeros(4))


class TestInitialization:
    def test_seeded_reproducibility(self):
        np.testing.assert_array_equal(Mlp([5, 7, 3], seed=11).get_flat(), Mlp([5, 7, 3], seed=11).get_flat())

    def test_xavier_bounds(self):
        net = Mlp([31, 64, 64, 15], seed=0)
        for w, b in zip(net.weights, net.biases):
            limit = np.sqrt(6.0 / sum(w.shape))
            assert np.all(np.abs(w) <= limit)
            assert np.all(b == 0.0)

    def test_output_scale_only_touches_last_layer(self):
        plain = Mlp([4, 6, 3], seed=5)
        scaled = Mlp([4, 6, 3], seed=5, output_scale=0.1)
        np.testing.assert_array_equal(plain.weights[0], scaled.weights[0])
        np.testing.assert_allclose(scaled.weights[1], 0.1 * plain.weights[1])

    @pytest.mark.parametrize("sizes", [[3], [3, 0], []])
    def test_bad_layer_sizes(self, sizes):
        with pytest.raises(ShapeError):
            Mlp(sizes)

    def test_flat_round_trip_and_size_check(self):
        net = Mlp([3, 4, 2], seed=0)
        other = Mlp([3, 4, 2], seed=1)
        other.set_flat(net.get_flat())
        np.testing.assert_array_equal(other.get_flat(), net.get_flat())
        with pytest.raises(ShapeError):
            other.set_flat(np.zeros(3))

    def test_copy_is_independent(self):
        net = Mlp([3, 4, 2], seed=0)
        clone = net.copy()
        clone.weights[0] += 1.0
        assert not np.allclose(clone.weights[0], net.weights[0])
        assert clone.id != net.id


class TestBackward:
    def test_zero_output_gradient(self, rng):
        net = Mlp([4, 6, 3], seed=0)
        _, cache = net.forward(rng.normal(size=(5, 4)))
        for grad in net.backward(cache, np.zeros((5, 3))):
            assert np.all(grad == 0.0)

    def test_softmax_cross_entropy_identity(self, rng):
        net = Mlp([4, 6, 5], head=Head.SOFTMAX, seed=0)
        probs, cache = net.forward(rng.normal(size=(3, 4)))
        targets = np.eye(5)[[0, 2, 4]]
        through_head = net.backward(cache, -targets / probs)
        on_logits = net.backward_logits(cache, probs - targets)
        for a, b in zip(through_head, on_logits):
            np.testing.assert_allclose(a, b, atol=1e-12)

    @pytest.mark.parametrize("head", [Head.IDENTITY, Head.SOFTMAX])
    def test_gradient_check_4_8_3(self, head):
        net = Mlp([4, 8, 3], head=head, seed=0)
        assert gradient_check(net) < 1e-4

    @pytest.mark.parametrize("head", [Head.IDENTITY, Head.SOFTMAX])
    def test_gradient_check_agent_shape(self, head):
        net = Mlp([31, 64, 64, 15], head=head, seed=0)
        assert gradient_check(net) < 1e-4

    def test_gradient_check_random_nets(self):
        results = run_gradient_checks(count=20, seed=0)
        assert len(results) == 20
        assert {r.head for r in results} == {"identity", "softmax"}
        assert max(r.max_relative_error for r in results) < 1e-4

    def test_sign_flip_is_caught(self):
        net = Mlp([4, 8, 3], seed=0)

        def flipped(net, cache, gradient):
            return [-g for g in mlp_backward(net, cache, gradient)]

        assert gradient_check(net, backward=flipped) > 0.1

    def test_gradient_check_restores_parameters(self):
        net = Mlp([3, 4, 2], head=Head.SOFTMAX, seed=0)
        before = net.get_flat()
        gradient_check(net)
        np.testing.assert_array_equal(net.get_flat(), before)

    def test_stale_cache(self, rng):
        net = Mlp([3, 2], seed=0)
        _, cache = net.forward(rng.normal(size=3))
        net.mark_updated()
        with pytest.raises(ShapeError):
            net.backward(cache, np.ones(2))

    def test_foreign_cache(self, rng):
        net = Mlp([3, 2], seed=0)
        _, cache = net.copy().forward(rng.normal(size=3))
        with pytest.raises(ShapeError):
            net.backward(cache, np.ones(2))

    def test_gradient_shape_mismatch(self, rng):
        net = Mlp([3, 2], seed=0)
        _, cache = net.forward(rng.normal(size=(4, 3)))
        with pytest.raises(ShapeError):
            net.backward(cache, np.ones((4, 3)))


class TestAdam:
    def test_zero_gradient_is_a_no_op(self):
        net = Mlp([3, 4, 2], seed=0)
        before = net.get_flat()
        state = AdamState.for_net(net)
        adam_step(net, [np.zeros_like(p) for p in net.parameters()], state)
        np.testing.assert_array_equal(net.get_flat(), before)
        assert state.step == 1

    def test_first_step(self):
        w = np.array([0.0])
        state = AdamState.for_parameters([w], lr=1e-3)
        adam_step([w], [np.array([1.0])], state)
        assert w[0] == pytest.approx(-1e-3, rel=1e-6)

    def test_converges_on_quadratic(self):
        w = np.array([5.0])
        state = AdamState.for_parameters([w], lr=0.05)
        for _ in range(2000):
            adam_step([w], [2.0 * w], state)
        assert abs(w[0]) < 0.1

    def test_step_invalidates_cache(self, rng):
        net = Mlp([3, 2], seed=0)
        _, cache = net.forward(rng.normal(size=3))
        adam_step(net, [np.ones_like(p) for p in net.parameters()], AdamState.for_net(net))
        with pytest.raises(ShapeError):
            net.backward(cache, np.ones(2))

    def test_count_mismatch(self):
        net = Mlp([3, 2], seed=0)
        with pytest.raises(ShapeError):
            adam_step(net, [np.zeros((3, 2))], AdamState.for_net(net))


class TestHelpers:
    def test_argmax_tie_breaks_low(self):
        assert greedy_argmax(np.zeros(15)) == 0
        assert greedy_argmax(np.array([1.0, 3.0, 3.0])) == 1

    def test_uniform_entropy(self):
        logits = np.zeros(15)
        log_probs = log_probabilities(logits)
        assert entropy(np.exp(log_probs), log_probs) == pytest.approx(np.log(15))
