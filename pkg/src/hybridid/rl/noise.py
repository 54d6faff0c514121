"""Exploration and observation noise processes."""
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import DomainError


@dataclass
class ObsNoise:
    """Ornstein-Uhlenbeck perturbation, one independent channel per output.

    ``x <- x + rate * (drift - x) * dt + volatility * sqrt(dt) * xi``
    """
    dim: int
    rate: float = 0.15
    volatility: float = 0.2
    drift: float = 0.0
    state: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.rate <= 0:
            raise DomainError("mean-reversion rate must be > 0")
        if self.volatility < 0:
            raise DomainError("volatility must be >= 0")
        if self.state is None:
            self.state = np.full(self.dim, float(self.drift))

    @property
    def stationary_variance(self):
        return self.volatility ** 2 / (2 * self.rate)

    def reset(self, rng=None):
        """Back to the drift, or a stationary draw when ``rng`` is given."""
        if rng is None:
            self.state = np.full(self.dim, float(self.drift))
        else:
            self.state = self.drift + np.sqrt(self.stationary_variance) * rng.standard_normal(self.dim)


def obs_noise_step(noise, dt, rng, training=True):
    """Advance the process and return the perturbation (zeros outside training)."""
    if dt <= 0:
        raise DomainError("dt must be > 0")
    if not training:
        return np.zeros(noise.dim)
    xi = rng.standard_normal(noise.dim)
    noise.state = (noise.state + noise.rate * (noise.drift - noise.state) * dt
                   + noise.volatility * np.sqrt(dt) * xi)
    return noise.state.copy()


@dataclass
class PersistentNoise:
    """Per-head uniform noise that is renewed with probability ``p_switch``.

    ``n(t) = n(t-1) * (1 - Y) + Y * U`` with ``Y ~ Bernoulli(p_switch)`` and
    ``U ~ Uniform(0, 1)^k``. Exact zeros and ones are redrawn so the
    log-log transform stays finite.
    """
    k: int
    p_switch: float = 0.25
    n: np.ndarray = None
    renewals: int = 0
    steps: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise DomainError("need at least two discrete actions")
        if not 0 < self.p_switch <= 1:
            raise DomainError("p_switch must lie in (0, 1]")

    @staticmethod
    def _uniform(rng, k):
        u = rng.random(k)
        while np.any((u <= 0) | (u >= 1)):
            bad = (u <= 0) | (u >= 1)
            u[bad] = rng.random(int(bad.sum()))
        return u

    def reset(self, rng):
        self.n = self._uniform(rng, self.k)
        self.renewals = 0
        self.steps = 0

    def step(self, rng):
        """One update; returns True when the noise was renewed."""
        if self.n is None:
            self.reset(rng)
        renew = rng.random() < self.p_switch
        u = self._uniform(rng, self.k)
        if renew:
            self.n = u
            self.renewals += 1
        self.steps += 1
        return renew

    def perturbation(self, gumbel=False):
        """``log(-log n)`` as written, or the Gumbel form ``-log(-log n)``."""
        g = np.log(-np.log(self.n))
        return -g if gumbel else g
