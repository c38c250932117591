from __future__ import annotations

from collections.abc import Callable
import logging
import numpy as np

from npi_workbench.nn.params import ParamStore

"""Finite-difference verification of analytic gradients."""

logger = logging.getLogger(__name__)

LossAndGrads = Callable[[ParamStore], tuple[float, ParamStore]]


def relative_error(analytic: float, numeric: float, floor: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), floor)


def grad_check(loss_fn: LossAndGrads, params: ParamStore, eps: float = 1e-5,
               samples_per_block: int = 8, rng: np.random.Generator | None = None,
               floor: float = 1e-4, blocks: list[str] | None = None) -> float:
    """Compare analytic gradients against central differences.

    Args:
      loss_fn: evaluates (loss, gradients) at the current contents of `params`.
      params: parameters, perturbed in place and restored bit-exactly.
      eps: finite-difference step.
      samples_per_block: coordinates sampled at random from each block.
      floor: lower bound of the error denominator, so coordinates whose true
        gradient is ~0 are judged on absolute error.
      blocks: restrict the check to these blocks.

    Return:
      The worst relative error over all sampled coordinates.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    _, analytic = loss_fn(params)
    worst = 0.0
    for name in blocks or params.names():
        flat = params[name].reshape(-1)
        grad = analytic[name].reshape(-1)
        count = min(samples_per_block, flat.size)
        block_worst = 0.0
        for index in rng.choice(flat.size, size=count, replace=False):
            original = flat[index]
            flat[index] = original + eps
            plus, _ = loss_fn(params)
            flat[index] = original - eps
            minus, _ = loss_fn(params)
            flat[index] = original
            numeric = (plus - minus) / (2.0 * eps)
            block_worst = max(block_worst, relative_error(float(grad[index]), numeric, floor))
        logger.debug("grad_check %s: worst relative error %.3e", name, block_worst)
        worst = max(worst, block_worst)
    return worst
