from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from npi_workbench.nn.params import ParamStore, check_width

"""Dense layers with hand-derived backward passes.

Every forward function returns whatever its backward counterpart needs;
gradients are accumulated into a ParamStore shaped like the parameters.
"""


def init_affine(params: ParamStore, prefix: str, n_in: int, n_out: int, rng: np.random.Generator) -> None:
    params.init_uniform(f"{prefix}.w", (n_out, n_in), rng)
    params.init_zeros(f"{prefix}.b", (n_out,))


def affine_forward(x: np.ndarray, params: ParamStore, prefix: str) -> np.ndarray:
    w = params[f"{prefix}.w"]
    check_width(f"{prefix}.w", w.shape[1], x.shape[0])
    return w @ x + params[f"{prefix}.b"]


def affine_backward(dy: np.ndarray, x: np.ndarray, params: ParamStore, grads: ParamStore, prefix: str) -> np.ndarray:
    """Accumulate weight gradients for y = Wx + b and return dL/dx."""
    grads[f"{prefix}.w"] += np.outer(dy, x)
    grads[f"{prefix}.b"] += dy
    return params[f"{prefix}.w"].T @ dy


@dataclass
class Mlp2Cache:
    x: np.ndarray
    hidden: np.ndarray


def init_mlp2(params: ParamStore, prefix: str, n_in: int, n_hidden: int, n_out: int,
              rng: np.random.Generator) -> None:
    init_affine(params, f"{prefix}.l1", n_in, n_hidden, rng)
    init_affine(params, f"{prefix}.l2", n_hidden, n_out, rng)


def mlp2_forward(x: np.ndarray, params: ParamStore, prefix: str) -> tuple[np.ndarray, Mlp2Cache]:
    """ReLU hidden layer followed by a linear decoder."""
    hidden = np.maximum(affine_forward(x, params, f"{prefix}.l1"), 0.0)
    return affine_forward(hidden, params, f"{prefix}.l2"), Mlp2Cache(x, hidden)


def mlp2_backward(dy: np.ndarray, cache: Mlp2Cache, params: ParamStore, grads: ParamStore, prefix: str) -> np.ndarray:
    dhidden = affine_backward(dy, cache.hidden, params, grads, f"{prefix}.l2")
    dhidden = dhidden * (cache.hidden > 0.0)
    return affine_backward(dhidden, cache.x, params, grads, f"{prefix}.l1")
