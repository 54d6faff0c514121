"""Reward functions with soft-constraint penalty terms."""
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import DomainError

T_IDEAL = 23.0
T_HIGH = 26.0
T_LOW = 19.5


@dataclass(frozen=True)
class RewardSpec:
    variant: str = "room"
    alpha_T: float = 0.1
    alpha_c: float = 0.01
    alpha_max: float = 1.0
    alpha_min: float = 1.0
    beta_f: tuple = (0.5, 0.5)
    beta_v: tuple = (0.5, 0.5)
    beta_max: float = 1.0
    beta_min: float = 1.0
    beta_E: float = 0.0
    upsilon: float = 1.0

    def __post_init__(self):
        if self.variant not in ("pendulum", "room", "global"):
            raise DomainError(f"unknown reward variant {self.variant!r}")
        scalars = (self.alpha_T, self.alpha_c, self.alpha_max, self.alpha_min, self.beta_max,
                   self.beta_min, self.beta_E, self.upsilon)
        if min(scalars) < 0 or min(self.beta_f, default=0) < 0 or min(self.beta_v, default=0) < 0:
            raise DomainError("reward coefficients must be >= 0")

    def replace(self, **kw):
        from dataclasses import replace
        return replace(self, **kw)


def reward_room(t_room, t_closing, spec=RewardSpec()):
    """``1 - aT (T-23)^2 - ac t^2 - amax max(T-26,0)^2 - amin max(19.5-T,0)^2``."""
    t_room = np.asarray(t_room, dtype=float)
    return (1.0 - spec.alpha_T * (t_room - T_IDEAL) ** 2
            - spec.alpha_c * np.asarray(t_closing, dtype=float) ** 2
            - spec.alpha_max * np.maximum(t_room - T_HIGH, 0.0) ** 2
            - spec.alpha_min * np.maximum(T_LOW - t_room, 0.0) ** 2)


def reward_global(t_floor, t_zone, t_rooms, e_cooling, e_heating, spec=RewardSpec("global")):
    """Floor- and zone-mean comfort, per-room bounds and an energy penalty.

    ``1 - sum_f bf (T_f-23)^2 - sum_v bv (T_v-23)^2
       - bmax sum_i max(T_i-26,0)^2 - bmin sum_i max(19.5-T_i,0)^2 - bE (E_c + E_h)``
    """
    t_floor = np.asarray(t_floor, dtype=float)
    t_zone = np.asarray(t_zone, dtype=float)
    t_rooms = np.asarray(t_rooms, dtype=float)
    if len(t_floor) != len(spec.beta_f) or len(t_zone) != len(spec.beta_v):
        raise DomainError("one beta_f per floor and one beta_v per zone are required")
    vals = np.concatenate([t_floor, t_zone, t_rooms, [e_cooling, e_heating]])
    if not np.all(np.isfinite(vals)):
        raise DomainError("reward_global inputs must be finite")
    return float(1.0 - np.dot(spec.beta_f, (t_floor - T_IDEAL) ** 2)
                 - np.dot(spec.beta_v, (t_zone - T_IDEAL) ** 2)
                 - spec.beta_max * np.sum(np.maximum(t_rooms - T_HIGH, 0.0) ** 2)
                 - spec.beta_min * np.sum(np.maximum(T_LOW - t_rooms, 0.0) ** 2)
                 - spec.beta_E * (e_cooling + e_heating))


def wrap_angle(theta):
    return (theta + np.pi) % (2 * np.pi) - np.pi


def reward_pendulum(state, torque):
    """``1 - theta^2 - 0.1 omega^2 - 0.001 T^2`` with theta wrapped to (-pi, pi]."""
    th = wrap_angle(state.theta)
    return float(1.0 - th ** 2 - 0.1 * state.omega ** 2 - 0.001 * float(torque) ** 2)
