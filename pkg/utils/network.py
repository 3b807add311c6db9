# network.py
"""
Multi-layer perceptron: forward pass, MSE loss and reverse-mode gradients.

Each layer computes z = a . W + b and a' = phi(z). Hidden layers use ReLU;
the output layer is linear by default (standardized targets are signed) or
ReLU when configured.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from utils.errors import ConfigError, EmptyDataError, ShapeError
from utils.numerics import (
    Matrix,
    RngState,
    add_row_broadcast,
    mat_mul,
    mat_transpose,
    rng_standard_normal,
)

RELU = "relu"
LINEAR = "linear"
OUTPUT_ACTIVATIONS = {LINEAR, RELU}


def relu(x):
    """x if x > 0 else 0"""
    return np.where(np.asarray(x) > 0, x, 0.0)


def relu_grad(x):
    """Subgradient of relu; the kink at 0 maps to 0"""
    return np.where(np.asarray(x) > 0, 1.0, 0.0)


def _activate(z: Matrix, kind: str) -> Matrix:
    return relu(z) if kind == RELU else z


def _activation_grad(z: Matrix, kind: str) -> Matrix:
    return relu_grad(z) if kind == RELU else np.ones_like(z)


@dataclass
class MlpModel:
    layer_sizes: List[int]
    weights: List[Matrix]
    biases: List[Matrix]
    hidden_activation: str = RELU
    output_activation: str = LINEAR

    def __post_init__(self):
        n_layers = len(self.layer_sizes) - 1
        if len(self.weights) != n_layers or len(self.biases) != n_layers:
            raise ShapeError(
                f"{len(self.layer_sizes)} layer sizes need {n_layers} weight/bias pairs, "
                f"got {len(self.weights)}/{len(self.biases)}"
            )
        for l in range(n_layers):
            expected = (self.layer_sizes[l], self.layer_sizes[l + 1])
            if self.weights[l].shape != expected:
                raise ShapeError(f"W{l} has shape {self.weights[l].shape}, expected {expected}")
            if self.biases[l].shape != (1, expected[1]):
                raise ShapeError(f"b{l} has shape {self.biases[l].shape}, expected {(1, expected[1])}")
        if self.hidden_activation != RELU:
            raise ConfigError(f"hidden layers must use relu, got '{self.hidden_activation}'")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ConfigError(f"unknown output activation '{self.output_activation}'")

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def activation_of(self, layer: int) -> str:
        return self.output_activation if layer == self.n_layers - 1 else self.hidden_activation

    def param_shapes(self):
        return [p.shape for p in flatten_params(self)]


@dataclass
class ForwardTrace:
    pre_activations: List[Matrix] = field(default_factory=list)
    activations: List[Matrix] = field(default_factory=list)

    @property
    def output(self) -> Matrix:
        return self.activations[-1]


@dataclass
class Gradients:
    d_weights: List[Matrix]
    d_biases: List[Matrix]

    def flat(self) -> List[Matrix]:
        """Gradients in [dW0, db0, dW1, db1, ...] order"""
        out = []
        for d_w, d_b in zip(self.d_weights, self.d_biases):
            out.extend([d_w, d_b])
        return out


def flatten_params(model: MlpModel) -> List[Matrix]:
    """Parameters in [W0, b0, W1, b1, ...] order"""
    out = []
    for w, b in zip(model.weights, model.biases):
        out.extend([w, b])
    return out


def unflatten_params(model: MlpModel, params: List[Matrix]) -> MlpModel:
    """New model with the same architecture and the given parameters"""
    if len(params) != 2 * model.n_layers:
        raise ShapeError(f"expected {2 * model.n_layers} parameter tensors, got {len(params)}")
    return MlpModel(
        layer_sizes=list(model.layer_sizes),
        weights=list(params[0::2]),
        biases=list(params[1::2]),
        hidden_activation=model.hidden_activation,
        output_activation=model.output_activation,
    )


def init_mlp(layer_sizes: List[int], output_activation: str, rng: RngState) -> MlpModel:
    """He-initialized weights N(0, 2/fan_in), zero biases"""
    sizes = [int(n) for n in layer_sizes]
    if len(sizes) < 2 or any(n < 1 for n in sizes):
        raise ConfigError(f"layer sizes must be at least two positive integers, got {layer_sizes}")
    if sizes[-1] != 1:
        raise ConfigError(f"the output layer must have a single neuron, got {sizes[-1]}")
    if output_activation not in OUTPUT_ACTIVATIONS:
        raise ConfigError(f"unknown output activation '{output_activation}'")

    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng_standard_normal(rng, fan_in, fan_out) * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros((1, fan_out)))
    return MlpModel(sizes, weights, biases, RELU, output_activation)


def layer_forward(a: Matrix, w: Matrix, b: Matrix, kind: str) -> Tuple[Matrix, Matrix]:
    """One dense layer: (z, phi(z)) with z = a . W + b"""
    z = add_row_broadcast(mat_mul(a, w), b)
    return z, _activate(z, kind)


def mlp_forward(model: MlpModel, x_batch: Matrix) -> ForwardTrace:
    if x_batch.ndim != 2 or x_batch.shape[1] != model.layer_sizes[0]:
        raise ShapeError(
            f"input batch has shape {x_batch.shape}, model expects {model.layer_sizes[0]} features"
        )
    trace = ForwardTrace(activations=[x_batch])
    a = x_batch
    for l in range(model.n_layers):
        z, a = layer_forward(a, model.weights[l], model.biases[l], model.activation_of(l))
        trace.pre_activations.append(z)
        trace.activations.append(a)
    return trace


def mlp_predict(model: MlpModel, x_batch: Matrix) -> Matrix:
    return mlp_forward(model, x_batch).output


def mse_loss(pred: Matrix, target: Matrix) -> float:
    """(1/B) * sum((pred - target)^2)"""
    if pred.shape != target.shape:
        raise ShapeError(f"prediction shape {pred.shape} does not match target shape {target.shape}")
    if pred.size == 0:
        raise EmptyDataError("cannot compute a loss over an empty batch")
    residual = pred - target
    return float(np.sum(residual * residual) / pred.shape[0])


def mlp_backward(model: MlpModel, trace: ForwardTrace, target: Matrix) -> Gradients:
    """Exact gradient of mse_loss with respect to every weight and bias"""
    if len(trace.pre_activations) != model.n_layers or len(trace.activations) != model.n_layers + 1:
        raise ShapeError("trace does not belong to this model")
    pred = trace.output
    if target.shape != pred.shape:
        raise ShapeError(f"target shape {target.shape} does not match prediction shape {pred.shape}")
    batch = pred.shape[0]
    ones_row = np.ones((1, batch))

    d_weights = [None] * model.n_layers
    d_biases = [None] * model.n_layers
    # delta holds dLoss/dz scaled by B; divided out when forming parameter grads
    delta = 2.0 * (pred - target) * _activation_grad(trace.pre_activations[-1], model.output_activation)
    for l in reversed(range(model.n_layers)):
        d_weights[l] = mat_mul(mat_transpose(trace.activations[l]), delta) / batch
        d_biases[l] = mat_mul(ones_row, delta) / batch
        if l > 0:
            back = mat_mul(delta, mat_transpose(model.weights[l]))
            delta = back * _activation_grad(trace.pre_activations[l - 1], model.hidden_activation)
    return Gradients(d_weights, d_biases)
