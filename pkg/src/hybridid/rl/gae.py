"""Generalized advantage estimation."""
import numpy as np

from ..exceptions import ShapeError


def compute_gae(rewards, values, dones, last_value, gamma, lam):
    """Advantages and returns for one rollout segment.

    ``dones[t]`` marks that the episode ended after step ``t``: nothing is
    bootstrapped across it. ``last_value`` bootstraps the step after the
    segment. Leading axes beyond time (e.g. one column per agent) are
    handled elementwise.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    if rewards.shape != values.shape or dones.shape[0] != rewards.shape[0]:
        raise ShapeError("rewards, values and dones must be aligned")
    if dones.ndim < rewards.ndim:
        dones = dones.reshape(dones.shape + (1,) * (rewards.ndim - dones.ndim))
    T = len(rewards)
    adv = np.empty_like(rewards)
    next_value = np.asarray(last_value, dtype=np.float64)
    running = np.zeros_like(rewards[0]) if T else 0.0
    for t in range(T - 1, -1, -1):
        keep = ~dones[t]
        delta = rewards[t] + gamma * next_value * keep - values[t]
        running = delta + gamma * lam * keep * running
        adv[t] = running
        next_value = values[t]
    return adv, adv + values
