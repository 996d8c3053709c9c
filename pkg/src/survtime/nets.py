"""Minimal dense feed-forward network with exact reverse-mode gradients.

Layers are affine maps with ReLU activations between them and no output
activation. Dropout (inverted scaling) applies to hidden activations in
training mode only; inference is deterministic. Parameters live in one
flat float64 vector so the optimizer and the finite-difference checker can
treat the network as a plain function R^P -> loss.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["MLPSpec", "DenseNet", "AdamState", "adam_update", "grad_check", "GradCheckReport"]


@dataclass(frozen=True)
class MLPSpec:
    input_dim: int
    hidden_layers: int = 0
    nodes_per_layer: int = 0
    dropout_rate: float = 0.0
    output_dim: int = 1

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")
        if self.hidden_layers < 0:
            raise ValueError("hidden_layers must be >= 0")
        if self.hidden_layers > 0 and self.nodes_per_layer < 1:
            raise ValueError("nodes_per_layer must be positive with hidden layers")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")

    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.input_dim] + [self.nodes_per_layer] * self.hidden_layers
        dims.append(self.output_dim)
        return list(zip(dims[:-1], dims[1:]))

    def parameter_count(self) -> int:
        return sum((fan_in + 1) * fan_out for fan_in, fan_out in self.layer_dims())


class DenseNet:
    """Fully connected network over a flat parameter vector.

    Weights initialize uniform in +-sqrt(6 / (fan_in + fan_out)), biases to
    zero. ``forward`` caches activations; ``backward`` consumes that cache
    and returns the exact gradient of sum(upstream * outputs) with respect
    to the parameters.
    """

    def __init__(self, spec: MLPSpec, parameters: np.ndarray | None = None,
                 seed: int | None = None):
        self.spec = spec
        if parameters is not None:
            parameters = np.asarray(parameters, dtype=np.float64).copy()
            if parameters.shape != (spec.parameter_count(),):
                raise ValueError(
                    f"expected {spec.parameter_count()} parameters, "
                    f"got {parameters.shape}"
                )
            self.parameters = parameters
        else:
            self.parameters = self._init_parameters(seed)
        self._cache = None

    def _init_parameters(self, seed) -> np.ndarray:
        rng = np.random.default_rng(seed)
        chunks = []
        for fan_in, fan_out in self.spec.layer_dims():
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            chunks.append(rng.uniform(-bound, bound, size=fan_in * fan_out))
            chunks.append(np.zeros(fan_out))
        return np.concatenate(chunks)

    def _unpack(self, flat: np.ndarray):
        layers = []
        offset = 0
        for fan_in, fan_out in self.spec.layer_dims():
            w = flat[offset : offset + fan_in * fan_out].reshape(fan_in, fan_out)
            offset += fan_in * fan_out
            b = flat[offset : offset + fan_out]
            offset += fan_out
            layers.append((w, b))
        return layers

    def forward(self, batch: np.ndarray, training: bool = False,
                rng: np.random.Generator | None = None) -> np.ndarray:
        x = np.atleast_2d(np.asarray(batch, dtype=np.float64))
        if x.shape[1] != self.spec.input_dim:
            raise ValueError(
                f"batch has {x.shape[1]} columns, network expects "
                f"{self.spec.input_dim}"
            )
        layers = self._unpack(self.parameters)
        rate = self.spec.dropout_rate
        if training and rate > 0.0 and rng is None:
            raise ValueError("training-mode forward with dropout needs an rng")
        inputs, masks = [], []
        a = x
        for li, (w, b) in enumerate(layers):
            inputs.append(a)
            z = a @ w + b
            if li < len(layers) - 1:
                a = np.maximum(z, 0.0)
                if training and rate > 0.0:
                    keep = rng.random(a.shape) >= rate
                    mask = keep / (1.0 - rate)
                    a = a * mask
                else:
                    mask = None
                masks.append(mask)
            else:
                a = z
        self._cache = (inputs, masks)
        return a

    def backward(self, grad_output: np.ndarray) -> np.ndarray:
        """Gradient over parameters for the batch last passed to forward."""
        if self._cache is None:
            raise RuntimeError("backward called without a matching forward pass")
        inputs, masks = self._cache
        grad = np.atleast_2d(np.asarray(grad_output, dtype=np.float64))
        if grad.shape != (inputs[0].shape[0], self.spec.output_dim):
            raise ValueError(
                f"upstream gradient shape {grad.shape} does not match outputs "
                f"({inputs[0].shape[0]}, {self.spec.output_dim})"
            )
        layers = self._unpack(self.parameters)
        grads = [None] * len(layers)
        delta = grad
        for li in range(len(layers) - 1, -1, -1):
            w, _ = layers[li]
            a_in = inputs[li]
            grads[li] = (a_in.T @ delta, delta.sum(axis=0))
            if li > 0:
                delta = delta @ w.T
                mask = masks[li - 1]
                if mask is not None:
                    delta = delta * mask
                # ReLU subgradient: 0 at the kink. The cached input of this
                # layer is the post-ReLU (and post-dropout) activation, which
                # is > 0 exactly where the pre-activation was positive and
                # the unit was kept.
                delta = delta * (inputs[li] > 0.0)
        flat = np.empty_like(self.parameters)
        offset = 0
        for (w_g, b_g), (fan_in, fan_out) in zip(grads, self.spec.layer_dims()):
            flat[offset : offset + fan_in * fan_out] = w_g.ravel()
            offset += fan_in * fan_out
            flat[offset : offset + fan_out] = b_g
            offset += fan_out
        return flat

    def copy(self) -> "DenseNet":
        return DenseNet(self.spec, parameters=self.parameters)

    # JSON persistence: spec plus the flat parameter vector, floats encoded
    # with 17 significant digits so the round trip is bit exact.
    def to_json(self) -> str:
        doc = {
            "spec": {
                "input_dim": self.spec.input_dim,
                "hidden_layers": self.spec.hidden_layers,
                "nodes_per_layer": self.spec.nodes_per_layer,
                "dropout_rate": self.spec.dropout_rate,
                "output_dim": self.spec.output_dim,
            },
            "parameters": [float(f"{v:.17g}") for v in self.parameters],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "DenseNet":
        doc = json.loads(text)
        spec = MLPSpec(**doc["spec"])
        return cls(spec, parameters=np.asarray(doc["parameters"]))


@dataclass
class AdamState:
    """First/second moment accumulators for bias-corrected Adam."""

    n_parameters: int
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray = field(default=None)
    v: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.m is None:
            self.m = np.zeros(self.n_parameters)
        if self.v is None:
            self.v = np.zeros(self.n_parameters)


def adam_update(state: AdamState, parameters: np.ndarray,
                gradient: np.ndarray) -> np.ndarray:
    """One bias-corrected Adam step; returns the updated parameter vector."""
    g = np.asarray(gradient, dtype=np.float64)
    if g.shape != parameters.shape:
        raise ValueError("parameters and gradient must have equal length")
    bad = np.flatnonzero(~np.isfinite(g))
    if bad.size:
        raise ValueError(f"non-finite gradient entry at index {bad[0]}")
    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = state.m / (1.0 - state.beta1 ** state.step)
    v_hat = state.v / (1.0 - state.beta2 ** state.step)
    return parameters - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)


@dataclass(frozen=True)
class GradCheckReport:
    max_rel_error: float
    worst_index: int
    n_parameters: int


def grad_check(net: DenseNet, loss, batch: np.ndarray, h: float = 1e-5,
               rel_floor: float = 1e-8) -> GradCheckReport:
    """Compare backward() against central finite differences.

    ``loss`` maps network outputs to ``(value, grad_wrt_outputs)``. Runs in
    inference mode so the comparison is deterministic. Reports; never
    raises.
    """
    out = net.forward(batch, training=False)
    _, grad_out = loss(out)
    analytic = net.backward(np.asarray(grad_out, dtype=np.float64))

    theta = net.parameters
    numeric = np.empty_like(theta)
    for k in range(theta.size):
        orig = theta[k]
        theta[k] = orig + h
        up, _ = loss(net.forward(batch, training=False))
        theta[k] = orig - h
        down, _ = loss(net.forward(batch, training=False))
        theta[k] = orig
        numeric[k] = (up - down) / (2.0 * h)

    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), rel_floor)
    rel = np.abs(analytic - numeric) / scale
    worst = int(np.argmax(rel))
    return GradCheckReport(float(rel[worst]), worst, theta.size)
