"""Building control over a reduced model of the mini-building.

The reduced model plays the building: its decoder is stepped with the
commands chosen each 10-minute step plus the recorded weather. Two roles
exist, matching the sequential training scheme:

* ``local``: one discrete blind agent per room, the global commands coming
  from a rule (or a frozen global policy);
* ``global``: one continuous agent choosing heating-supply, cooling-supply
  and per-zone ventilation temperatures, the blinds coming from frozen
  local policies (or a baseline rule).

A third role, ``eval``, takes no agent actions: blinds and global commands
both come from the frozen policies or the baseline. Valves and the
heating/cooling changeover always follow the plant logic.
"""
import numpy as np

from ..evaluation.baselines import BaselineController
from ..evaluation.energy import energy_features
from ..sim.building import COOLING, HEATING, changeover, thermostat_valves
from ..sim.weather import STEPS_PER_DAY
from .noise import ObsNoise, obs_noise_step
from .rewards import RewardSpec, reward_global, reward_room

# action bounds of the global agent: heat supply, cold supply, vent zone 0, vent zone 1
GLOBAL_LOW = np.array([22.0, 10.0, 16.0, 16.0])
GLOBAL_HIGH = np.array([50.0, 22.0, 26.0, 26.0])
LOCAL_OBS_DIM = 7
STEP_HOURS = 24.0 / STEPS_PER_DAY


def _clock(step):
    h = (step % STEPS_PER_DAY) * STEP_HOURS
    return h, np.sin(2 * np.pi * h / 24.0), np.cos(2 * np.pi * h / 24.0)


class BuildingModelEnv:
    """Environment over one reduced model (or a pool) and a recorded exogenous series.

    ``hist`` supplies warm-up windows (encoded to initialize the decoder)
    and the weather; its step ``k`` is at ``k mod 144`` ten-minute slots
    after midnight. Episodes start at midnight.
    """

    def __init__(self, model, hist, rooms, role="local", reward=None, energy_model=None,
                 local_policies=None, global_policy=None, baseline=None, episode_length=288,
                 obs_noise=True, training=True, energy_scale=1.0):
        if role not in ("local", "global", "eval"):
            raise ValueError(f"unknown role {role!r}")
        # a list of models randomizes the domain: each episode draws one
        self.models = list(model) if isinstance(model, (list, tuple)) else [model]
        self.model = self.models[0]
        self.hist = hist
        self.rooms = rooms
        self.n_rooms = len(rooms)
        self.role = role
        self.reward = reward or RewardSpec("room" if role == "local" else "global")
        self.global_reward = self.reward if role != "local" else RewardSpec("global")
        self.energy_model = energy_model
        self.local_policies = local_policies
        self.global_policy = global_policy
        self.baseline = baseline or BaselineController("blinds-1")
        self.episode_length = episode_length
        self.training = training
        self.energy_scale = energy_scale
        self.orientations = tuple(r.orientation for r in rooms)
        self.zones = np.array([r.zone for r in rooms])
        self.floors = np.array([r.floor for r in rooms])
        self.noise = ObsNoise(self.n_rooms) if obs_noise is True else (obs_noise or None)
        n = max(m.encode_length for m in self.models)
        first_day = -(-n // STEPS_PER_DAY)
        # the observation after the last step reads one more exogenous row
        last_day = (len(hist) - episode_length - 1) // STEPS_PER_DAY
        self.day_starts = np.arange(first_day, last_day + 1) * STEPS_PER_DAY
        if len(self.day_starts) == 0:
            raise ValueError("historical data too short for one episode")
        self.exo = hist.exogenous

    @property
    def n_agents(self):
        return {"local": self.n_rooms, "global": 1, "eval": 0}[self.role]

    @property
    def obs_dims(self):
        return {"local": [LOCAL_OBS_DIM] * self.n_rooms, "global": [self.n_rooms + 5],
                "eval": []}[self.role]

    # -- observations ---------------------------------------------------------
    def _temps_seen(self):
        if self.noise is None or not self.training:
            return self.t_room
        return self.t_room + 3.0 * self.noise.state

    def _local_obs(self, temps):
        h, s, c = _clock(self.k)
        t_out, irr = self.exo[self.k]
        base = np.array([(t_out - 15.0) / 10.0, irr / 500.0, s, c])
        return [np.concatenate([[(temps[i] - 23.0) / 3.0], base,
                                [self.blind[i] / 4.0, self.closing[i] / 4.0]])
                for i in range(self.n_rooms)]

    def _global_obs(self, temps):
        h, s, c = _clock(self.k)
        t_out, irr = self.exo[self.k]
        return [np.concatenate([(temps - 23.0) / 3.0,
                                [(t_out - 15.0) / 10.0, irr / 500.0, s, c, float(self.mode)]])]

    def _obs(self):
        temps = self._temps_seen()
        if self.role == "local":
            return self._local_obs(temps)
        if self.role == "global":
            return self._global_obs(temps)
        return []

    # -- episode --------------------------------------------------------------
    def reset(self, rng, state=None):
        """``state`` optionally fixes the starting step (a multiple of 144)."""
        start = int(state) if state is not None else int(rng.choice(self.day_starts))
        if len(self.models) > 1:
            self.model = self.models[int(rng.integers(len(self.models)))]
        n = self.model.encode_length
        self.c, self.h = self.model.encode(self.hist.x[start - n:start])
        self.k = start
        self.t = 0
        self.t_room = self.hist.observations[start - 1].copy()
        t_out = self.exo[start, 0]
        self.mode = HEATING if t_out < 15.0 else COOLING
        self.blind = np.zeros(self.n_rooms, dtype=np.int64)
        self.closing = np.zeros(self.n_rooms)
        if self.noise is not None:
            self.noise.reset(rng if self.training else None)
        self._rng = rng
        self.log = {"t_room": [], "e_heating": [], "e_cooling": [], "blind": [], "t_flow": []}
        return self._obs()

    def _blinds(self, actions):
        if self.role == "local":
            return np.array([int(a) for a in actions], dtype=np.int64)
        if self.local_policies is not None:
            obs = self._local_obs(self.t_room)
            return np.array([p.deterministic(o) for p, o in zip(self.local_policies, obs)],
                            dtype=np.int64)
        h, _, _ = _clock(self.k)
        t_out, irr = self.exo[self.k]
        return self.baseline.blinds(self.t_room, irr, h, self.orientations)

    def _global(self, actions):
        t_out, irr = self.exo[self.k]
        if self.role == "global":
            a = np.asarray(actions[0], dtype=float)
        elif self.global_policy is not None:
            a = self.global_policy.deterministic(self._global_obs(self.t_room)[0])
        else:
            mode, t_flow, t_air, valve = self.baseline.global_commands(
                self.t_room, t_out, self.mode, self.zones)
            return mode, t_flow, t_air, valve
        mode, _ = changeover(self.t_room, self.mode, self.baseline.upper, self.baseline.lower)
        t_flow = a[0] if mode == HEATING else a[1]
        return mode, t_flow, a[2:4], thermostat_valves(self.t_room, mode)

    def step(self, actions):
        blind = self._blinds(actions)
        mode, t_flow, t_air, valve = self._global(actions)
        t_out, irr = self.exo[self.k]
        x_sharp = np.concatenate([blind, valve, [t_flow], t_air, [t_out, irr]])
        (self.c, self.h), o_hat = self.model.decoder_step((self.c, self.h), x_sharp)
        self.t_room = o_hat
        self.mode = mode
        self.blind = blind
        hour, _, _ = _clock(self.k)
        if hour == 0.0:
            self.closing[:] = 0.0
        self.closing += blind / 4.0 * STEP_HOURS
        e_h = e_c = 0.0
        if self.energy_model is not None:
            feats = energy_features(valve[None], [t_flow], t_air[None], [t_out], [irr])
            rh, rc = self.energy_model.rates(feats)
            e_h, e_c = float(rh[0]) * self.energy_scale, float(rc[0]) * self.energy_scale
        if self.role == "local":
            rewards = reward_room(self.t_room, self.closing, self.reward)
        else:
            t_floor = np.array([self.t_room[self.floors == f].mean() for f in np.unique(self.floors)])
            t_zone = np.array([self.t_room[self.zones == z].mean() for z in np.unique(self.zones)])
            rewards = np.array([reward_global(t_floor, t_zone, self.t_room, e_c, e_h,
                                              self.global_reward)])
        self.log["t_room"].append(self.t_room.copy())
        self.log["e_heating"].append(e_h)
        self.log["e_cooling"].append(e_c)
        self.log["blind"].append(blind)
        self.log["t_flow"].append(t_flow)
        if self.noise is not None and self.training:
            obs_noise_step(self.noise, 1.0, self._rng)
        self.k += 1
        self.t += 1
        return self._obs(), np.asarray(rewards, dtype=float), self.t >= self.episode_length, {}
