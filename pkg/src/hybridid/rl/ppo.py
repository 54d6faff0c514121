"""Clipped-surrogate PPO update on gathered rollouts."""
from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError, NumericError
from ..nn.optim import AdamState, adam_update, clip_grad_norm


@dataclass(frozen=True)
class PpoConfig:
    clip: float = 0.1
    gamma: float = 0.99
    lam: float = 0.95
    c1: float = 0.5
    c2: float = 0.0
    lr: float = 3e-4
    rollout_length: int = 1440
    minibatch_size: int = 720
    n_updates: int = 80
    n_workers: int = 4
    n_iterations: int = 250
    max_grad_norm: float = 0.5
    normalize_advantages: bool = True

    def __post_init__(self):
        if self.clip <= 0:
            raise DomainError("clip range must be > 0")
        if not (0 < self.gamma < 1 and 0 < self.lam < 1):
            raise DomainError("gamma and lambda must lie in (0, 1)")
        if min(self.rollout_length, self.minibatch_size, self.n_updates, self.n_workers) < 1:
            raise DomainError("sizes and counts must be >= 1")
        if self.minibatch_size > self.n_workers * self.rollout_length:
            raise DomainError("minibatch size cannot exceed workers x rollout length")
        if self.n_iterations < 0:
            raise DomainError("n_iterations must be >= 0")


@dataclass
class Rollout:
    """Gathered transitions of one agent: ``obs`` (N, d), ``actions`` as stored by
    the policy, behavior ``logp``, ``advantages`` and ``returns``."""
    obs: np.ndarray
    actions: np.ndarray
    logp: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray

    def __len__(self):
        return len(self.obs)


class Learner:
    """Central actor/critic pair with their Adam states."""

    def __init__(self, actor, critic, lr):
        self.actor = actor
        self.critic = critic
        self.actor_opt = AdamState.for_params(actor.params(), lr=lr)
        self.critic_opt = AdamState.for_params(critic.params(), lr=lr)


def normalize(adv, eps=1e-8):
    std = adv.std()
    if len(adv) < 2 or std < eps:
        # zero-variance minibatch: centering alone would erase the signal
        return adv
    return (adv - adv.mean()) / (std + eps)


def ppo_update(learner, rollout, cfg, rng):
    """``cfg.n_updates`` minibatch steps on ``rollout``; returns mean stats."""
    actor, critic = learner.actor, learner.critic
    a_params, c_params = actor.params(), critic.params()
    M = min(cfg.minibatch_size, len(rollout))
    rows = []
    for u in range(cfg.n_updates):
        idx = rng.choice(len(rollout), size=M, replace=False)
        adv = rollout.advantages[idx]
        if cfg.normalize_advantages:
            adv = normalize(adv)
        surr, stats, a_grads = actor.surrogate_grads(rollout.obs[idx], rollout.actions[idx],
                                                     rollout.logp[idx], adv, cfg.clip, cfg.c2)
        v_loss, c_grads = critic.loss_grads(rollout.obs[idx], rollout.returns[idx], cfg.c1)
        total = surr + cfg.c1 * v_loss
        if not np.isfinite(total):
            raise NumericError(f"non-finite PPO loss at update {u}: surrogate={surr}, "
                               f"value={v_loss}, mean ratio={stats['ratio']}")
        adam_update(learner.actor_opt, a_params, clip_grad_norm(a_grads, cfg.max_grad_norm), cfg.lr)
        adam_update(learner.critic_opt, c_params, clip_grad_norm(c_grads, cfg.max_grad_norm), cfg.lr)
        stats.update(surrogate_loss=surr, value_loss=v_loss)
        rows.append(stats)
    if not rows:
        return {}
    first = rows[0]["ratio"]
    out = {k: float(np.mean([r[k] for r in rows])) for k in rows[0]}
    out["first_ratio"] = first
    return out
