"""Pendulum driven by an external torque.

    theta'' = -(g / l) * sin(theta) - T / (m l^2)      (nonlinear)
    theta'' = -(g / l) * theta      - T / (m l^2)      (linearized)

integrated with classical 4th-order Runge-Kutta.
"""
from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError


@dataclass(frozen=True)
class PendulumConfig:
    length: float = 1.0
    mass: float = 1.0
    gravity: float = 10.0
    dt: float = 0.05
    variant: str = "nonlinear"
    # viscous friction coefficient (1/s); 0 reproduces the frictionless equation
    damping: float = 0.0

    def __post_init__(self):
        for name in ("length", "mass", "gravity", "dt"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        if self.variant not in ("nonlinear", "linearized"):
            raise DomainError(f"unknown pendulum variant {self.variant!r}")
        if self.damping < 0:
            raise DomainError("damping must be >= 0")


@dataclass(frozen=True)
class PendulumState:
    theta: float = 0.0
    omega: float = 0.0


def _accel(cfg, theta, omega, torque):
    restoring = np.sin(theta) if cfg.variant == "nonlinear" else theta
    return (-(cfg.gravity / cfg.length) * restoring
            - torque / (cfg.mass * cfg.length ** 2)
            - cfg.damping * omega)


def pendulum_step(cfg, s, torque):
    """Advance one ``cfg.dt`` with RK4, torque held constant over the step."""
    h = cfg.dt
    th, om = s.theta, s.omega
    k1t, k1w = om, _accel(cfg, th, om, torque)
    k2t, k2w = om + 0.5 * h * k1w, _accel(cfg, th + 0.5 * h * k1t, om + 0.5 * h * k1w, torque)
    k3t, k3w = om + 0.5 * h * k2w, _accel(cfg, th + 0.5 * h * k2t, om + 0.5 * h * k2w, torque)
    k4t, k4w = om + h * k3w, _accel(cfg, th + h * k3t, om + h * k3w, torque)
    return PendulumState(float(th + h / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t)),
                         float(om + h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)))


def observe_pendulum(s):
    return np.sin(s.theta), np.cos(s.theta)


def energy(cfg, s):
    """Mechanical energy per unit m l^2 for the unforced nonlinear pendulum."""
    return 0.5 * s.omega ** 2 - (cfg.gravity / cfg.length) * np.cos(s.theta)


def simulate_pendulum(cfg, torques, s0=None):
    """Roll the pendulum over a torque series; returns (thetas, omegas) after each step."""
    s = s0 or PendulumState()
    out = np.empty((len(torques), 2))
    for t, T in enumerate(torques):
        s = pendulum_step(cfg, s, float(T))
        out[t] = s.theta, s.omega
    return out[:, 0], out[:, 1]


def pendulum_rollout(cfg, torques, s0=None, seed=None, description=""):
    """Episode with command ``torque`` and observations ``(x, y) = (sin, cos)``."""
    from .dataset import EpisodeDataset

    torques = np.asarray(torques, dtype=np.float64).reshape(-1)
    thetas, _ = simulate_pendulum(cfg, torques, s0)
    obs = np.column_stack([np.sin(thetas), np.cos(thetas)])
    return EpisodeDataset(torques[:, None], np.zeros((len(torques), 0)), obs, dt=cfg.dt,
                          command_names=["torque"], exogenous_names=[],
                          observation_names=["x", "y"], seed=seed,
                          description=description or f"pendulum {cfg.variant}")
