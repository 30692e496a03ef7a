"""Small dense network with manual backprop and Adam updates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

HIDDEN_SIZES = (100, 100, 100)


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0 < self.beta1 < 1 or not 0 < self.beta2 < 1:
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


@dataclass
class Tape:
    """Activations cached by `MlpNetwork.forward` for the backward pass."""

    inputs: list[np.ndarray]  # input to each layer
    pre_activations: list[np.ndarray]  # W x + b of each layer
    step: int  # optimizer step counter at forward time


@dataclass
class MlpNetwork:
    """Fully connected ReLU network with a linear output layer.

    Weights are stored as (out, in) matrices, so a batch `x` of shape
    (n, in) maps to ``x @ W.T + b``. The Adam moment buffers live next to
    the parameters they track.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    m_weights: list[np.ndarray] = field(default_factory=list)
    v_weights: list[np.ndarray] = field(default_factory=list)
    m_biases: list[np.ndarray] = field(default_factory=list)
    v_biases: list[np.ndarray] = field(default_factory=list)
    t: int = 0

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias per weight matrix and at least one layer")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"layer {k}: weight {w.shape} incompatible with bias {b.shape}")
            if k and w.shape[1] != self.weights[k - 1].shape[0]:
                raise ValueError(f"layer {k} input width {w.shape[1]} does not chain")
        if not self.m_weights:
            self.m_weights = [np.zeros_like(w) for w in self.weights]
            self.v_weights = [np.zeros_like(w) for w in self.weights]
            self.m_biases = [np.zeros_like(b) for b in self.biases]
            self.v_biases = [np.zeros_like(b) for b in self.biases]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim] + [w.shape[0] for w in self.weights]

    def parameters(self) -> list[np.ndarray]:
        return [p for pair in zip(self.weights, self.biases) for p in pair]

    def copy(self) -> MlpNetwork:
        dup = lambda xs: [x.copy() for x in xs]
        return MlpNetwork(
            dup(self.weights), dup(self.biases),
            dup(self.m_weights), dup(self.v_weights),
            dup(self.m_biases), dup(self.v_biases), self.t,
        )

    def forward(self, batch: np.ndarray) -> tuple[np.ndarray, Tape]:
        x = np.asarray(batch, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ValueError(f"expected batch of shape (n, {self.input_dim}), got {x.shape}")
        inputs, pre = [], []
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(x)
            z = x @ w.T + b
            pre.append(z)
            x = z if k == last else np.maximum(z, 0.0)
        return x, Tape(inputs, pre, self.t)

    def predict(self, batch: np.ndarray) -> np.ndarray:
        return self.forward(batch)[0]

    def gradients(self, tape: Tape, grad_output: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Parameter gradients of a loss whose output-gradient is `grad_output`."""
        if tape.step != self.t:
            raise RuntimeError("stale tape: the network was updated after this forward pass")
        delta = np.asarray(grad_output, dtype=np.float64)
        if delta.shape != tape.pre_activations[-1].shape:
            raise ValueError(
                f"grad_output shape {delta.shape} does not match output {tape.pre_activations[-1].shape}"
            )
        n_layers = len(self.weights)
        grad_w: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
        grad_b: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
        for k in range(n_layers - 1, -1, -1):
            if k != n_layers - 1:
                # ReLU subgradient at 0 is taken as 0
                delta = delta * (tape.pre_activations[k] > 0)
            grad_w[k] = delta.T @ tape.inputs[k]
            grad_b[k] = delta.sum(axis=0)
            if k:
                delta = delta @ self.weights[k]
        return grad_w, grad_b

    def adam_step(self, grad_w: Sequence[np.ndarray], grad_b: Sequence[np.ndarray], cfg: AdamConfig) -> None:
        self.t += 1
        c1 = 1.0 - cfg.beta1**self.t
        c2 = 1.0 - cfg.beta2**self.t
        groups = (
            (self.weights, self.m_weights, self.v_weights, grad_w),
            (self.biases, self.m_biases, self.v_biases, grad_b),
        )
        for params, ms, vs, grads in groups:
            for p, m, v, g in zip(params, ms, vs, grads):
                m *= cfg.beta1
                m += (1.0 - cfg.beta1) * g
                v *= cfg.beta2
                v += (1.0 - cfg.beta2) * g * g
                p -= cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + cfg.eps)

    def backward_and_step(self, tape: Tape, grad_output: np.ndarray, cfg: AdamConfig) -> list[float]:
        """Backpropagate `grad_output`, apply one Adam update, return per-layer weight-gradient norms."""
        grad_w, grad_b = self.gradients(tape, grad_output)
        self.adam_step(grad_w, grad_b, cfg)
        return [float(np.linalg.norm(g)) for g in grad_w]


def build_network(sizes: Sequence[int], seed) -> MlpNetwork:
    """Network with the given layer widths, Glorot-uniform weights and zero biases."""
    if len(sizes) < 2:
        raise ValueError("need at least an input and an output width")
    if any(int(s) < 1 for s in sizes):
        raise ValueError(f"layer widths must be positive, got {list(sizes)}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpNetwork(weights, biases)


def init_network(input_dim: int, output_dim: int, seed) -> MlpNetwork:
    """Generator network: input_dim -> 100 -> 100 -> 100 -> output_dim."""
    if input_dim < 1 or output_dim < 1:
        raise ValueError(f"dimensions must be positive, got input={input_dim}, output={output_dim}")
    return build_network([input_dim, *HIDDEN_SIZES, output_dim], seed)
