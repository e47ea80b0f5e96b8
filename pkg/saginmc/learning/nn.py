"""
Multilayer perceptron with hand-written backpropagation, Adam, and a
finite-difference gradient check. Double precision throughout.

Parameters are stored as weight matrices of shape (fan_in, fan_out) and bias
vectors; `parameters()` lists them as [W0, b0, W1, b1, ...] and every gradient
list follows the same order.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from saginmc.constants import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPSILON,
    GRADCHECK_STEP,
    GRADCHECK_TOLERANCE,
    LEARNING_RATE,
)
from saginmc.errors import ShapeError

logger = logging.getLogger(__name__)

_net_ids = itertools.count()


class Head(str, Enum):
    IDENTITY = "identity"
    SOFTMAX = "softmax"


@dataclass
class ForwardCache:
    """Activations kept by `forward` for the matching `backward` call."""
    net_id: int
    version: int
    activations: List[np.ndarray]
    logits: np.ndarray
    output: np.ndarray
    squeeze: bool


class Mlp:
    """Affine-tanh chain with an identity or softmax output head."""

    def __init__(
        self,
        layer_sizes: Sequence[int],
        head: str = Head.IDENTITY,
        seed: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
        output_scale: float = 1.0,
    ):
        sizes = [int(s) for s in layer_sizes]
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ShapeError(f"Need at least input and output sizes >= 1, got {list(layer_sizes)}")
        self.layer_sizes = tuple(sizes)
        self.head = Head(head)
        self.id = next(_net_ids)
        self.version = 0

        rng = rng if rng is not None else np.random.default_rng(seed)
        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        # policy heads start near uniform when output_scale < 1
        self.weights[-1] *= output_scale

    def __repr__(self):
        return f"<Mlp {'-'.join(map(str, self.layer_sizes))} head={self.head.value}>"

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    def parameters(self) -> List[np.ndarray]:
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params

    @property
    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.parameters()])

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self.num_parameters:
            raise ShapeError(f"Expected {self.num_parameters} parameters, got {flat.size}")
        offset = 0
        for p in self.parameters():
            p[...] = flat[offset:offset + p.size].reshape(p.shape)
            offset += p.size
        self.mark_updated()

    def mark_updated(self) -> None:
        """Invalidate outstanding forward caches after a parameter change."""
        self.version += 1

    def copy(self) -> "Mlp":
        clone = Mlp.__new__(Mlp)
        clone.layer_sizes = self.layer_sizes
        clone.head = self.head
        clone.id = next(_net_ids)
        clone.version = 0
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    def same_shape(self, other: "Mlp") -> bool:
        return self.layer_sizes == other.layer_sizes

    def forward(self, inputs: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
        x = np.asarray(inputs, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.input_size:
            raise ShapeError(f"{self!r} expects inputs of width {self.input_size}, got shape {np.shape(inputs)}")

        activations = [x]
        hidden = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = hidden @ w + b
            if i < last:
                hidden = np.tanh(z)
                activations.append(hidden)
            else:
                logits = z
        output = softmax(logits, axis=1) if self.head is Head.SOFTMAX else logits

        cache = ForwardCache(self.id, self.version, activations, logits, output, squeeze)
        return (output[0] if squeeze else output), cache

    def _check_cache(self, cache: ForwardCache) -> None:
        if cache.net_id != self.id or cache.version != self.version:
            raise ShapeError("Forward cache is stale or belongs to another network")

    def _as_batch(self, cache: ForwardCache, gradient: np.ndarray) -> np.ndarray:
        g = np.asarray(gradient, dtype=np.float64)
        if cache.squeeze and g.ndim == 1:
            g = g[None, :]
        if g.shape != cache.logits.shape:
            raise ShapeError(f"Output gradient shape {g.shape} does not match output {cache.logits.shape}")
        return g

    def backward(self, cache: ForwardCache, output_gradient: np.ndarray) -> List[np.ndarray]:
        """Gradients of a loss w.r.t. every parameter, given dLoss/dOutput."""
        self._check_cache(cache)
        g = self._as_batch(cache, output_gradient)
        if self.head is Head.SOFTMAX:
            p = cache.output
            g = p * (g - np.sum(p * g, axis=1, keepdims=True))
        return self._backpropagate(cache, g)

    def backward_logits(self, cache: ForwardCache, logit_gradient: np.ndarray) -> List[np.ndarray]:
        """Same as `backward` but starting from dLoss/dLogits (skips the head)."""
        self._check_cache(cache)
        return self._backpropagate(cache, self._as_batch(cache, logit_gradient))

    def _backpropagate(self, cache: ForwardCache, delta: np.ndarray) -> List[np.ndarray]:
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        for i in range(len(self.weights) - 1, -1, -1):
            a_prev = cache.activations[i]
            grads_w[i] = a_prev.T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (1.0 - a_prev ** 2)
        grads = []
        for gw, gb in zip(grads_w, grads_b):
            grads.extend((gw, gb))
        return grads


def mlp_forward(net: Mlp, inputs: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    return net.forward(inputs)


def mlp_backward(net: Mlp, cache: ForwardCache, output_gradient: np.ndarray) -> List[np.ndarray]:
    return net.backward(cache, output_gradient)


def log_probabilities(logits: np.ndarray) -> np.ndarray:
    return log_softmax(logits, axis=-1)


def entropy(probabilities: np.ndarray, log_probs: np.ndarray) -> np.ndarray:
    return -np.sum(probabilities * log_probs, axis=-1)


def greedy_argmax(values: np.ndarray) -> int:
    """Index of the largest value; np.argmax already returns the lowest index on ties."""
    return int(np.argmax(values))


@dataclass
class AdamState:
    first_moment: List[np.ndarray]
    second_moment: List[np.ndarray]
    step: int = 0
    lr: float = LEARNING_RATE
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPSILON

    @classmethod
    def for_parameters(cls, params: Sequence[np.ndarray], lr: float = LEARNING_RATE, **kwargs) -> "AdamState":
        return cls(
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
            lr=lr,
            **kwargs,
        )

    @classmethod
    def for_net(cls, net: Mlp, lr: float = LEARNING_RATE, **kwargs) -> "AdamState":
        return cls.for_parameters(net.parameters(), lr=lr, **kwargs)


def adam_step(target, grads: Sequence[np.ndarray], state: AdamState):
    """Apply one bias-corrected Adam update in place to an Mlp or a parameter list."""
    params = target.parameters() if isinstance(target, Mlp) else list(target)
    if len(params) != len(grads) or len(params) != len(state.first_moment):
        raise ShapeError("Parameter, gradient and optimizer state counts differ")

    state.step += 1
    correction1 = 1.0 - state.beta1 ** state.step
    correction2 = 1.0 - state.beta2 ** state.step
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        if p.shape != g.shape:
            raise ShapeError(f"Gradient shape {g.shape} does not match parameter {p.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.epsilon)

    if isinstance(target, Mlp):
        target.mark_updated()
    return target, state


BackwardFn = Callable[[Mlp, ForwardCache, np.ndarray], List[np.ndarray]]


def gradient_check(
    net: Mlp,
    tolerance: float = GRADCHECK_TOLERANCE,
    batch_size: int = 3,
    h: float = GRADCHECK_STEP,
    seed: int = 0,
    backward: Optional[BackwardFn] = None,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    The loss is a fixed random linear functional of the network output, so
    every output coordinate (and the softmax Jacobian) is exercised.
    """
    backward = backward or mlp_backward
    rng = np.random.default_rng(seed)
    inputs = rng.normal(size=(batch_size, net.input_size))
    weights = rng.normal(size=(batch_size, net.output_size))

    def loss() -> float:
        output, _ = net.forward(inputs)
        return float(np.sum(output * weights))

    _, cache = net.forward(inputs)
    analytic = backward(net, cache, weights)

    max_error = 0.0
    for param, grad in zip(net.parameters(), analytic):
        for idx in np.ndindex(param.shape):
            original = param[idx]
            param[idx] = original + h
            loss_plus = loss()
            param[idx] = original - h
            loss_minus = loss()
            param[idx] = original
            numeric = (loss_plus - loss_minus) / (2.0 * h)
            denom = max(abs(numeric) + abs(grad[idx]), 1e-6)
            max_error = max(max_error, abs(numeric - grad[idx]) / denom)

    if max_error >= tolerance:
        logger.warning(f"Gradient check on {net!r} exceeded tolerance: {max_error:.3e} >= {tolerance:.1e}")
    return max_error
