"""Adam, global-norm gradient clipping and learning-rate schedules.

Parameters and gradients are plain ``dict[str, ndarray]`` with matching keys.
Updates happen in place so that views handed out by model containers stay
valid.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import DomainError, ShapeError


def global_norm(grads):
    return math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))


def clip_grad_norm(grads, max_norm):
    """Rescale ``grads`` so their global L2 norm is at most ``max_norm``."""
    if not max_norm > 0:
        raise DomainError(f"max_norm must be > 0, got {max_norm}")
    norm = global_norm(grads)
    if norm <= max_norm:
        return dict(grads)
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def for_params(cls, params, lr=1e-3, **kw):
        return cls(lr=lr, m={k: np.zeros_like(p) for k, p in params.items()},
                   v={k: np.zeros_like(p) for k, p in params.items()}, **kw)


def adam_update(state, params, grads, lr=None):
    """One bias-corrected Adam step applied in place; returns ``(state, params)``.

    Only keys present in ``grads`` are touched, which lets callers freeze
    parameter subsets by omitting them.
    """
    lr = state.lr if lr is None else lr
    if not lr > 0:
        raise DomainError(f"learning rate must be > 0, got {lr}")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for k, g in grads.items():
        p = params[k]
        if g.shape != p.shape:
            raise ShapeError(f"gradient {k} has shape {g.shape}, parameter {p.shape}")
        if k not in state.m:
            state.m[k] = np.zeros_like(p)
            state.v[k] = np.zeros_like(p)
        m, v = state.m[k], state.v[k]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return state, params


def sgd_update(params, grads, lr):
    for k, g in grads.items():
        params[k] -= lr * g
    return params


@dataclass(frozen=True)
class LrSchedule:
    """Constant or slanted-triangular learning rate.

    The triangular variant rises linearly from ``eta_max / ratio`` to
    ``eta_max`` over ``cut = floor(T * cut_frac)`` steps, then falls
    linearly back to ``eta_max / ratio`` at step ``T``.
    """
    variant: str = "slanted-triangular"
    eta_max: float = 0.1
    cut_frac: float = 0.1
    ratio: float = 40.0
    T: int = 1000

    def __post_init__(self):
        if self.variant not in ("constant", "slanted-triangular"):
            raise DomainError(f"unknown schedule variant {self.variant!r}")
        if not self.eta_max > 0:
            raise DomainError("eta_max must be > 0")
        if self.variant == "slanted-triangular":
            if not 0 < self.cut_frac < 1:
                raise DomainError("cut_frac must lie in (0, 1)")
            if not self.ratio > 1:
                raise DomainError("ratio must be > 1")
            if self.T < 1:
                raise DomainError("T must be >= 1")

    @property
    def cut(self):
        return int(math.floor(self.T * self.cut_frac))


def lr_at(schedule, n):
    if n < 0 or (schedule.variant != "constant" and n > schedule.T):
        raise DomainError(f"step {n} outside [0, {schedule.T}]")
    if schedule.variant == "constant":
        return schedule.eta_max
    cut, T = schedule.cut, schedule.T
    if n < cut:
        frac = n / cut
    elif T == cut:
        frac = 1.0
    else:
        frac = 1.0 - (n - cut) / (T - cut)
    return schedule.eta_max * (1.0 + frac * (schedule.ratio - 1.0)) / schedule.ratio
