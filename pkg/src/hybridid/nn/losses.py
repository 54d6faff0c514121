"""Mean squared and mean absolute error over whole sequences."""
import numpy as np

from ..exceptions import DomainError, ShapeError

LOSS_KINDS = ("squared", "l1")


def _pair(predicted, target):
    predicted = np.asarray(predicted, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if predicted.shape != target.shape:
        raise ShapeError(f"predicted {predicted.shape} and target {target.shape} differ")
    if predicted.size == 0:
        raise DomainError("loss of an empty sequence is undefined")
    return predicted, target


def loss(kind, predicted, target):
    predicted, target = _pair(predicted, target)
    diff = predicted - target
    if kind == "squared":
        return float(np.mean(diff * diff))
    if kind == "l1":
        return float(np.mean(np.abs(diff)))
    raise DomainError(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")


def loss_and_grad(kind, predicted, target):
    """Loss value and its gradient w.r.t. ``predicted``."""
    predicted, target = _pair(predicted, target)
    diff = predicted - target
    n = diff.size
    if kind == "squared":
        return float(np.mean(diff * diff)), 2.0 * diff / n
    if kind == "l1":
        return float(np.mean(np.abs(diff))), np.sign(diff) / n
    raise DomainError(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")
