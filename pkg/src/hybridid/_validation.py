"""Small input-validation helpers in the spirit of ``sklearn.utils.validation``."""
import numbers

import numpy as np

from .exceptions import DomainError, NumericError, ShapeError


def as_float_array(a, ndim=None, name="array"):
    arr = np.asarray(a, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ShapeError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    return arr


def check_last_dim(arr, size, name="array"):
    if arr.shape[-1] != size:
        raise ShapeError(f"{name} has last dimension {arr.shape[-1]}, expected {size}")
    return arr


def check_finite(arr, name="array", step=None):
    if not np.all(np.isfinite(arr)):
        where = f" at step {step}" if step is not None else ""
        raise NumericError(f"non-finite values in {name}{where}")
    return arr


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not value > 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")
    return value


def check_random_state(seed):
    """Turn ``seed`` into a ``np.random.Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
