"""Bias-corrected Adam over the per-layer tensor structure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AdamParams:
    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.alpha <= 0 or self.epsilon <= 0:
            raise ValueError("alpha and epsilon must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta coefficients must lie in (0, 1)")


@dataclass
class AdamState:
    m: list[dict[str, np.ndarray]]
    v: list[dict[str, np.ndarray]]


def adam_init(params: list[dict[str, np.ndarray]]) -> AdamState:
    zeros = lambda layers: [
        {k: np.zeros_like(t) for k, t in layer.items()} for layer in layers
    ]
    return AdamState(m=zeros(params), v=zeros(params))


def adam_step(
    params: list[dict[str, np.ndarray]],
    grads: list[dict[str, np.ndarray]],
    state: AdamState,
    t: int,
    cfg: AdamParams,
) -> tuple[list[dict[str, np.ndarray]], AdamState]:
    """One update, t >= 1.  Returns fresh tensors; inputs are untouched."""
    if t < 1:
        raise ValueError(f"step index must be >= 1, got {t}")
    bc1 = 1.0 - cfg.beta1**t
    bc2 = 1.0 - cfg.beta2**t
    new_params = []
    new_m = []
    new_v = []
    for layer, glayer, mlayer, vlayer in zip(params, grads, state.m, state.v):
        np_layer, nm_layer, nv_layer = {}, {}, {}
        for key, theta in layer.items():
            g = glayer[key]
            m = cfg.beta1 * mlayer[key] + (1.0 - cfg.beta1) * g
            v = cfg.beta2 * vlayer[key] + (1.0 - cfg.beta2) * (g * g)
            np_layer[key] = theta - cfg.alpha * (m / bc1) / (np.sqrt(v / bc2) + cfg.epsilon)
            nm_layer[key] = m
            nv_layer[key] = v
        new_params.append(np_layer)
        new_m.append(nm_layer)
        new_v.append(nv_layer)
    return new_params, AdamState(m=new_m, v=new_v)
