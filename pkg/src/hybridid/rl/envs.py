"""Control environments.

Every environment serves one or more agents. ``reset(rng)`` returns a list
of per-agent observation vectors; ``step(actions)`` takes one action per
agent and returns ``(observations, rewards, done, info)`` where ``rewards``
has one entry per agent.
"""
import numpy as np

from ..sim.pendulum import PendulumConfig, PendulumState, pendulum_step
from .rewards import reward_pendulum


class PendulumEnv:
    """Torque control of the true pendulum towards ``theta = 0`` at rest.

    Observations are ``(sin theta, cos theta, omega / 4)``; the single action is
    the torque. Episodes start from ``theta, omega ~ U(-init, init)`` and last
    ``episode_length`` steps.
    """
    n_agents = 1

    def __init__(self, cfg=None, torque_limit=2.0, episode_length=200, init_range=1.0):
        self.cfg = cfg or PendulumConfig(dt=0.05)
        self.torque_limit = float(torque_limit)
        self.episode_length = episode_length
        self.init_range = init_range
        self.state = PendulumState()
        self.t = 0

    @property
    def obs_dims(self):
        return [3]

    @property
    def action_bounds(self):
        return -self.torque_limit, self.torque_limit

    def _obs(self):
        s = self.state
        return [np.array([np.sin(s.theta), np.cos(s.theta), s.omega / 4.0])]

    def reset(self, rng, state=None):
        if state is None:
            th, om = rng.uniform(-self.init_range, self.init_range, size=2)
            state = PendulumState(float(th), float(om))
        self.state = state
        self.t = 0
        return self._obs()

    def step(self, actions):
        torque = float(np.clip(np.ravel(actions[0])[0], -self.torque_limit, self.torque_limit))
        r = reward_pendulum(self.state, torque)
        self.state = pendulum_step(self.cfg, self.state, torque)
        self.t += 1
        return self._obs(), np.array([r]), self.t >= self.episode_length, {}
