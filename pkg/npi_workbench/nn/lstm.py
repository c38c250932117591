from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from npi_workbench.errors import ConfigurationError
from npi_workbench.nn.losses import sigmoid
from npi_workbench.nn.params import ParamStore, check_width

"""Stacked LSTM with backpropagation through time.

Gate rows of each layer's weight matrix are ordered input, forget, output,
candidate. The weight of layer l acts on the concatenation [x; h_prev].
"""


@dataclass(frozen=True)
class LstmState:
    """Per-layer hidden and cell vectors."""
    h: tuple[np.ndarray, ...]
    c: tuple[np.ndarray, ...]

    @staticmethod
    def zeros(layers: int, size: int) -> LstmState:
        return LstmState(
            tuple(np.zeros(size) for _ in range(layers)),
            tuple(np.zeros(size) for _ in range(layers)),
        )

    @property
    def layers(self) -> int:
        return len(self.h)


@dataclass
class LstmLayerCache:
    xh: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    tanh_c: np.ndarray


@dataclass
class LstmStepCache:
    layers: list[LstmLayerCache]


def init_lstm_stack(params: ParamStore, prefix: str, n_in: int, size: int, layers: int,
                    rng: np.random.Generator, forget_bias: float) -> None:
    for layer in range(layers):
        width = (n_in if layer == 0 else size) + size
        params.init_uniform(f"{prefix}.{layer}.w", (4 * size, width), rng)
        bias = np.zeros(4 * size)
        bias[size:2 * size] = forget_bias
        params[f"{prefix}.{layer}.b"] = bias


def lstm_layer_count(params: ParamStore, prefix: str) -> int:
    return sum(1 for name in params.with_prefix(f"{prefix}.") if name.endswith(".w"))


def lstm_stack_forward(x: np.ndarray, state: LstmState, params: ParamStore,
                       prefix: str) -> tuple[np.ndarray, LstmState, LstmStepCache]:
    """One time step through every layer. Returns the top hidden vector."""
    layers = lstm_layer_count(params, prefix)
    if state.layers != layers:
        raise ConfigurationError(f"{prefix}: state has {state.layers} layers, parameters have {layers}")

    new_h: list[np.ndarray] = []
    new_c: list[np.ndarray] = []
    caches: list[LstmLayerCache] = []
    layer_input = x
    for layer in range(layers):
        w = params[f"{prefix}.{layer}.w"]
        size = w.shape[0] // 4
        check_width(f"{prefix}.{layer}.w", w.shape[1], layer_input.shape[0] + size)
        check_width(f"{prefix}.{layer} state", size, state.h[layer].shape[0])

        xh = np.concatenate([layer_input, state.h[layer]])
        z = w @ xh + params[f"{prefix}.{layer}.b"]
        i = sigmoid(z[:size])
        f = sigmoid(z[size:2 * size])
        o = sigmoid(z[2 * size:3 * size])
        g = np.tanh(z[3 * size:])
        c = f * state.c[layer] + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c

        caches.append(LstmLayerCache(xh, state.c[layer], i, f, o, g, tanh_c))
        new_h.append(h)
        new_c.append(c)
        layer_input = h

    return layer_input, LstmState(tuple(new_h), tuple(new_c)), LstmStepCache(caches)


def lstm_stack_backward(dh_top: np.ndarray, dh_next: list[np.ndarray], dc_next: list[np.ndarray],
                        cache: LstmStepCache, params: ParamStore, grads: ParamStore,
                        prefix: str) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
    """Backward through one time step.

    Args:
      dh_top: gradient arriving at the top hidden vector from this step's outputs.
      dh_next: per-layer hidden gradients flowing back from the following step.
      dc_next: per-layer cell gradients flowing back from the following step.

    Return:
      (dx, dh_prev, dc_prev) where dx is the gradient of the step input and the
      lists are the per-layer gradients for the previous step's state.
    """
    layers = len(cache.layers)
    dh_prev: list[np.ndarray] = [np.zeros(0)] * layers
    dc_prev: list[np.ndarray] = [np.zeros(0)] * layers
    dh_from_above = dh_top
    for layer in reversed(range(layers)):
        lc = cache.layers[layer]
        w = params[f"{prefix}.{layer}.w"]
        size = w.shape[0] // 4

        dh = dh_next[layer] + dh_from_above
        dc = dc_next[layer] + dh * lc.o * (1.0 - lc.tanh_c * lc.tanh_c)

        dz = np.concatenate([
            dc * lc.g * lc.i * (1.0 - lc.i),
            dc * lc.c_prev * lc.f * (1.0 - lc.f),
            dh * lc.tanh_c * lc.o * (1.0 - lc.o),
            dc * lc.i * (1.0 - lc.g * lc.g),
        ])
        grads[f"{prefix}.{layer}.w"] += np.outer(dz, lc.xh)
        grads[f"{prefix}.{layer}.b"] += dz
        dxh = w.T @ dz

        n_in = dxh.shape[0] - size
        dh_prev[layer] = dxh[n_in:]
        dc_prev[layer] = dc * lc.f
        dh_from_above = dxh[:n_in]

    return dh_from_above, dh_prev, dc_prev


def zero_state_grads(state: LstmState) -> tuple[list[np.ndarray], list[np.ndarray]]:
    return [np.zeros_like(h) for h in state.h], [np.zeros_like(c) for c in state.c]
