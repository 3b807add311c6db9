# optim.py
"""
Parameter updates: Adam with bias-corrected moments, and plain gradient descent.

Step functions are pure: they return fresh state and parameter lists and
never mutate their inputs.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from utils.errors import ConfigError, NumericError, ShapeError
from utils.numerics import Matrix


@dataclass(frozen=True)
class AdamHyper:
    eta: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigError(f"eta must be > 0, got {self.eta}")
        if not 0 <= self.beta1 < 1:
            raise ConfigError(f"beta1 must be in [0, 1), got {self.beta1}")
        if not 0 <= self.beta2 < 1:
            raise ConfigError(f"beta2 must be in [0, 1), got {self.beta2}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass
class AdamState:
    m: List[Matrix]
    v: List[Matrix]
    t: int = 0


def _check_congruent(params: Sequence[Matrix], grads: Sequence[Matrix]):
    if len(params) != len(grads):
        raise ShapeError(f"{len(params)} parameter tensors but {len(grads)} gradient tensors")
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ShapeError(f"tensor {i}: parameter shape {p.shape} != gradient shape {g.shape}")


def adam_init(hyper: AdamHyper, param_shapes: Sequence[Tuple[int, int]]) -> AdamState:
    """Zero first and second moments, t = 0"""
    if not param_shapes:
        raise ConfigError("Adam needs at least one parameter tensor")
    shapes = [tuple(int(n) for n in s) for s in param_shapes]
    if any(len(s) != 2 or min(s) < 1 for s in shapes):
        raise ConfigError(f"invalid parameter shapes {param_shapes}")
    return AdamState(
        m=[np.zeros(s) for s in shapes],
        v=[np.zeros(s) for s in shapes],
        t=0,
    )


def adam_step(
    state: AdamState, params: List[Matrix], grads: List[Matrix], hyper: AdamHyper
) -> Tuple[AdamState, List[Matrix]]:
    _check_congruent(params, grads)
    _check_congruent(params, state.m)
    for i, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient in parameter tensor {i}")

    t = state.t + 1
    correction1 = 1.0 - hyper.beta1 ** t
    correction2 = 1.0 - hyper.beta2 ** t

    new_m, new_v, new_params = [], [], []
    for theta, g, m, v in zip(params, grads, state.m, state.v):
        m = hyper.beta1 * m + (1.0 - hyper.beta1) * g
        v = hyper.beta2 * v + (1.0 - hyper.beta2) * (g * g)
        m_hat = m / correction1
        v_hat = v / correction2
        # epsilon sits outside the square root
        new_params.append(theta - hyper.eta * m_hat / (np.sqrt(v_hat) + hyper.epsilon))
        new_m.append(m)
        new_v.append(v)
    return AdamState(new_m, new_v, t), new_params


def sgd_step(params: List[Matrix], grads: List[Matrix], eta: float) -> List[Matrix]:
    """theta - eta * g"""
    _check_congruent(params, grads)
    return [theta - eta * g for theta, g in zip(params, grads)]
