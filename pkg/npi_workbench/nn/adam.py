from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
import logging
import numpy as np

from npi_workbench import constants
from npi_workbench.errors import TrainingError
from npi_workbench.nn.params import ParamStore

"""ADAM with step-wise learning-rate decay."""

logger = logging.getLogger(__name__)

# Block name -> rows allowed to change (None for the whole block).
Trainable = Mapping[str, "np.ndarray | None"]


@dataclass
class AdamState:
    """Moment accumulators mirroring the parameter blocks, plus the schedule."""
    m: ParamStore
    v: ParamStore
    step: int = 0
    learning_rate: float = constants.LEARNING_RATE
    decay: float = constants.LR_DECAY
    decay_interval: int = constants.LR_DECAY_INTERVAL
    beta1: float = constants.ADAM_BETA1
    beta2: float = constants.ADAM_BETA2
    epsilon: float = constants.ADAM_EPSILON
    skipped: list[str] = field(default_factory=list)

    @staticmethod
    def create(params: ParamStore, learning_rate: float = constants.LEARNING_RATE,
               decay: float = constants.LR_DECAY,
               decay_interval: int = constants.LR_DECAY_INTERVAL) -> AdamState:
        return AdamState(params.zeros_like(), params.zeros_like(), 0, learning_rate, decay, decay_interval)

    def effective_learning_rate(self) -> float:
        """Base rate times decay^floor(step / interval) for the current step counter."""
        return self.learning_rate * self.decay ** (self.step // self.decay_interval)

    def match_shapes(self, params: ParamStore) -> None:
        """Grow moments with zero rows when parameter blocks gained rows (new programs)."""
        for name, value in params.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(value)
                self.v[name] = np.zeros_like(value)
                continue
            old = self.m[name]
            if old.shape != value.shape:
                extra = value.shape[0] - old.shape[0]
                pad = np.zeros((extra,) + value.shape[1:])
                self.m[name] = np.concatenate([old, pad])
                self.v[name] = np.concatenate([self.v[name], pad])


def clip_global_norm(grads: ParamStore, max_norm: float) -> float:
    """Scale gradients in place so their global norm is at most max_norm.

    Return:
      The norm before clipping.
    """
    norm = grads.global_norm()
    if norm > max_norm:
        grads.scale(max_norm / norm)
    return norm


def adam_step(params: ParamStore, grads: ParamStore, state: AdamState,
              trainable: Trainable | None = None) -> AdamState:
    """Apply one bias-corrected ADAM update in place.

    Blocks whose gradient is exactly zero are left untouched, moments included,
    so a zero gradient never moves a parameter. With `trainable`, only the named
    blocks (and within them only the listed rows) are updated.
    """
    bad = grads.first_non_finite()
    if bad is not None:
        logger.error("Non-finite gradient in block %s at step %d", bad, state.step)
        raise TrainingError(f"non-finite gradient in parameter block {bad}")

    state.match_shapes(params)
    lr = state.effective_learning_rate()
    t = state.step + 1
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    state.skipped = []

    names = params.names() if trainable is None else [name for name in params.names() if name in trainable]
    for name in names:
        rows = None if trainable is None else trainable[name]
        g = grads[name] if rows is None else grads[name][rows]
        if not np.any(g):
            state.skipped.append(name)
            continue
        index = slice(None) if rows is None else rows
        m = state.m[name]
        v = state.v[name]
        m[index] = state.beta1 * m[index] + (1.0 - state.beta1) * g
        v[index] = state.beta2 * v[index] + (1.0 - state.beta2) * g * g
        m_hat = m[index] / correction1
        v_hat = v[index] / correction2
        params[name][index] -= lr * m_hat / (np.sqrt(v_hat) + state.epsilon)

    state.step = t
    return state
