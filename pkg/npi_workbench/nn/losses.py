import numpy as np

from npi_workbench.errors import ConfigurationError

"""Numerically stable activations and losses."""


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    return shifted - np.log(np.sum(np.exp(shifted)))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def softmax_xent(logits: np.ndarray, target: int) -> tuple[float, np.ndarray]:
    """Cross-entropy of a categorical distribution given as logits.

    Return:
      (loss, dloss/dlogits) with loss = -log softmax(logits)[target].
    """
    if logits.size == 0:
        raise ConfigurationError("softmax over empty logits")
    if not 0 <= target < logits.size:
        raise ConfigurationError(f"target {target} outside {logits.size} classes")
    log_probs = log_softmax(logits)
    grad = np.exp(log_probs)
    grad[target] -= 1.0
    return float(-log_probs[target]), grad


def sigmoid_bce(logit: float, target: int) -> tuple[float, float]:
    """Binary cross-entropy on a single logit, in the log1p(exp(-|z|)) form."""
    z = float(logit)
    loss = max(z, 0.0) - z * target + float(np.log1p(np.exp(-abs(z))))
    return loss, float(sigmoid(np.float64(z))) - target
