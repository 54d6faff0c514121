"""Stochastic policies and value networks for PPO.

Both policy kinds expose the same surface used by the trainer:

* ``act(obs, rng, explore)`` -> ``(env_action, stored_action, log_prob)``
* ``deterministic(obs)``
* ``surrogate_grads(obs, stored, logp_old, adv, clip, c2)`` -> ``(loss, stats, grads)``

``explore`` is per-worker exploration state created by ``new_explore``.
"""
import numpy as np

from ..exceptions import DomainError, ShapeError
from ..nn.mlp import MlpParams, mlp_backward, mlp_forward, mlp_forward_cached

LOG_2PI = np.log(2 * np.pi)
MIN_STD = 1e-3


def _clipped_surrogate(logp, logp_old, adv, clip):
    """Loss, d loss / d logp and ratio statistics of the clipped objective."""
    ratio = np.exp(logp - logp_old)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip, 1.0 + clip) * adv
    loss = -np.mean(np.minimum(unclipped, clipped))
    # gradient flows only where the unclipped term is the active minimum
    active = unclipped <= clipped
    dlogp = np.where(active, -unclipped, 0.0) / len(adv)
    stats = {"ratio": float(ratio.mean()),
             "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > clip)),
             "approx_kl": float(np.mean(logp_old - logp))}
    return loss, dlogp, stats


class GaussianTanhPolicy:
    """Diagonal Gaussian on a pre-squash variable ``z``; ``a = mid + half * tanh(z)``.

    The network emits ``(mu, log_sigma)`` for every action dimension and
    ``sigma = max(exp(log_sigma), 1e-3)``. Log-probabilities are those of
    ``z``; the tanh Jacobian cancels in PPO ratios.
    """
    kind = "continuous"

    def __init__(self, net, low, high, min_std=MIN_STD):
        self.net = net
        self.low = np.atleast_1d(np.asarray(low, dtype=float))
        self.high = np.atleast_1d(np.asarray(high, dtype=float))
        if self.low.shape != self.high.shape or np.any(self.low >= self.high):
            raise DomainError("bounds must satisfy low < high per dimension")
        if net.layer_sizes[-1] != 2 * len(self.low):
            raise ShapeError(f"network must output 2 x {len(self.low)} values")
        self.min_std = min_std

    @classmethod
    def init(cls, obs_dim, low, high, hidden=(64, 64), rng=None, log_std_init=-0.5):
        rng = np.random.default_rng(rng)
        k = len(np.atleast_1d(low))
        net = MlpParams.init((obs_dim, *hidden, 2 * k), rng, output_scale=0.01,
                             hidden_activation="tanh")
        net.biases[-1][k:] = log_std_init
        return cls(net, low, high)

    @property
    def action_dim(self):
        return len(self.low)

    @property
    def obs_dim(self):
        return self.net.layer_sizes[0]

    def params(self):
        return self.net.named("")

    def copy(self):
        return GaussianTanhPolicy(self.net.copy(), self.low.copy(), self.high.copy(), self.min_std)

    def squash(self, z):
        half = 0.5 * (self.high - self.low)
        mid = 0.5 * (self.high + self.low)
        return mid + half * np.tanh(z)

    def distribution(self, obs):
        out = mlp_forward(self.net, obs)
        k = self.action_dim
        mu, raw = out[..., :k], out[..., k:]
        return mu, np.maximum(raw, np.log(self.min_std))

    def log_prob(self, obs, z):
        mu, log_std = self.distribution(obs)
        return np.sum(-0.5 * ((z - mu) / np.exp(log_std)) ** 2 - log_std - 0.5 * LOG_2PI, axis=-1)

    def new_explore(self, rng):
        return None

    def act(self, obs, rng, explore=None):
        mu, log_std = self.distribution(obs)
        z = mu + np.exp(log_std) * rng.standard_normal(mu.shape)
        logp = np.sum(-0.5 * ((z - mu) / np.exp(log_std)) ** 2 - log_std - 0.5 * LOG_2PI, axis=-1)
        a = self.squash(z)
        # tanh saturates to +-1 in floating point for |z| > ~19; keep actions strictly inside
        a = np.clip(a, np.nextafter(self.low, self.high), np.nextafter(self.high, self.low))
        return a, z, logp

    def deterministic(self, obs):
        mu, _ = self.distribution(obs)
        return self.squash(mu)

    def surrogate_grads(self, obs, z, logp_old, adv, clip, c2=0.0):
        out, inputs = mlp_forward_cached(self.net, obs)
        k = self.action_dim
        mu, raw = out[:, :k], out[:, k:]
        floor = np.log(self.min_std)
        log_std = np.maximum(raw, floor)
        std = np.exp(log_std)
        eps = (z - mu) / std
        logp = np.sum(-0.5 * eps ** 2 - log_std - 0.5 * LOG_2PI, axis=-1)
        loss, dlogp, stats = _clipped_surrogate(logp, logp_old, adv, clip)
        entropy = float(np.mean(np.sum(log_std + 0.5 * (LOG_2PI + 1.0), axis=-1)))
        dmu = dlogp[:, None] * eps / std
        dls = dlogp[:, None] * (eps ** 2 - 1.0) - c2 / len(adv)
        dls = np.where(raw > floor, dls, 0.0)
        grads, _ = mlp_backward(self.net, inputs, np.concatenate([dmu, dls], axis=1))
        stats["entropy"] = entropy
        return loss - c2 * entropy, stats, grads


class DiscretePolicy:
    """Categorical policy over ``k`` actions with persistent exploration noise.

    While exploring, the action is ``argmax(log(-log n) + logits)`` where
    ``n`` is a :class:`PersistentNoise` renewed with probability
    ``p_switch``; ``gumbel=True`` uses the ``-log(-log n)`` form instead.
    The stored log-probability is the softmax one.
    """
    kind = "discrete"

    def __init__(self, net, p_switch=0.25, gumbel=False):
        self.net = net
        self.k = net.layer_sizes[-1]
        if self.k < 2:
            raise DomainError("need k >= 2 actions")
        if not 0 < p_switch <= 1:
            raise DomainError("p_switch must lie in (0, 1]")
        self.p_switch = p_switch
        self.gumbel = gumbel

    @classmethod
    def init(cls, obs_dim, k, hidden=(64, 64), rng=None, p_switch=0.25, gumbel=False):
        rng = np.random.default_rng(rng)
        net = MlpParams.init((obs_dim, *hidden, k), rng, output_scale=0.01,
                             hidden_activation="tanh")
        return cls(net, p_switch, gumbel)

    @property
    def obs_dim(self):
        return self.net.layer_sizes[0]

    def params(self):
        return self.net.named("")

    def copy(self):
        return DiscretePolicy(self.net.copy(), self.p_switch, self.gumbel)

    def logits(self, obs):
        return mlp_forward(self.net, obs)

    def log_probs(self, obs):
        z = self.logits(obs)
        z = z - z.max(axis=-1, keepdims=True)
        return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))

    def new_explore(self, rng):
        from .noise import PersistentNoise
        noise = PersistentNoise(self.k, self.p_switch)
        noise.reset(rng)
        return noise

    def act(self, obs, rng, explore):
        explore.step(rng)
        lp = self.log_probs(obs)
        a = int(np.argmax(explore.perturbation(self.gumbel) + lp))
        return a, a, float(lp[a])

    def deterministic(self, obs):
        return int(np.argmax(self.logits(obs)))

    def surrogate_grads(self, obs, actions, logp_old, adv, clip, c2=0.0):
        out, inputs = mlp_forward_cached(self.net, obs)
        z = out - out.max(axis=1, keepdims=True)
        lp_all = z - np.log(np.sum(np.exp(z), axis=1, keepdims=True))
        p = np.exp(lp_all)
        actions = np.asarray(actions, dtype=int)
        rows = np.arange(len(actions))
        logp = lp_all[rows, actions]
        loss, dlogp, stats = _clipped_surrogate(logp, logp_old, adv, clip)
        ent_each = -np.sum(p * lp_all, axis=1)
        entropy = float(ent_each.mean())
        onehot = np.zeros_like(p)
        onehot[rows, actions] = 1.0
        dz = dlogp[:, None] * (onehot - p)
        # d(-c2 H)/dz = c2 p (log p + H) / B
        dz += c2 * p * (lp_all + ent_each[:, None]) / len(actions)
        grads, _ = mlp_backward(self.net, inputs, dz)
        stats["entropy"] = entropy
        return loss - c2 * entropy, stats, grads


class ValueNet:
    def __init__(self, net):
        if net.layer_sizes[-1] != 1:
            raise ShapeError("value network must output one value")
        self.net = net

    @classmethod
    def init(cls, obs_dim, hidden=(64, 64), rng=None):
        rng = np.random.default_rng(rng)
        return cls(MlpParams.init((obs_dim, *hidden, 1), rng, hidden_activation="tanh"))

    def params(self):
        return self.net.named("")

    def copy(self):
        return ValueNet(self.net.copy())

    def __call__(self, obs):
        return mlp_forward(self.net, obs)[..., 0]

    def loss_grads(self, obs, returns, c1):
        out, inputs = mlp_forward_cached(self.net, obs)
        err = out[:, 0] - returns
        loss = float(np.mean(err ** 2))
        grads, _ = mlp_backward(self.net, inputs, (2.0 * c1 * err / len(err))[:, None])
        return loss, grads


def sample_continuous(policy, s, rng):
    a, _, logp = policy.act(s, rng)
    return a, logp


def deterministic_continuous(policy, s):
    return policy.deterministic(s)


def sample_discrete(policy, s, t, rng, noise, evaluate=False):
    """Exploring (or greedy) discrete action; returns ``(action, noise)``."""
    if evaluate:
        return policy.deterministic(s), noise
    a, _, _ = policy.act(s, rng, noise)
    return a, noise
