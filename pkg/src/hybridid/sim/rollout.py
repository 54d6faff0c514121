"""Turn simulators plus input series into EpisodeDatasets."""
import numpy as np

from ..exceptions import ShapeError
from .building import (BuildingState, RoomArrays, WeatherSample, building_step, command_names,
                       unpack_commands)
from .dataset import EpisodeDataset
from .pendulum import PendulumConfig, PendulumState, pendulum_rollout


def building_rollout(rooms, commands, weather, state=None, dt=600.0, seed=None,
                     description="", return_flows=False):
    """Drive the RC building open loop with a command matrix (N, 2 * rooms + 1 + zones)."""
    arr = RoomArrays.from_rooms(rooms)
    n_rooms = len(rooms)
    n_zones = int(arr.zone.max()) + 1
    commands = np.asarray(commands, dtype=np.float64)
    if commands.ndim != 2 or commands.shape[1] != 2 * n_rooms + 1 + n_zones:
        raise ShapeError(f"commands must have {2 * n_rooms + 1 + n_zones} columns")
    if len(commands) != len(weather):
        raise ShapeError("commands and weather are misaligned")
    state = state or BuildingState.uniform(n_rooms, 21.0, n_zones)
    obs = np.empty((len(commands), n_rooms))
    flows = []
    for t, u in enumerate(commands):
        blind, valve, t_flow, t_air = unpack_commands(u, n_rooms)
        state = state.with_commands(valve=valve, blind=blind, t_flow=t_flow, t_air=t_air)
        sample = WeatherSample(weather.temperature[t], weather.irradiance[t], weather.hour(t))
        if return_flows:
            state, f = building_step(arr, state, sample, dt, return_flows=True)
            flows.append(f)
        else:
            state = building_step(arr, state, sample, dt)
        obs[t] = state.t_room
    ds = EpisodeDataset(commands, weather.as_array(), obs, dt=dt,
                        command_names=command_names(n_rooms, n_zones),
                        exogenous_names=["t_out", "irradiance"],
                        observation_names=[f"t_room_{i}" for i in range(n_rooms)],
                        seed=seed, description=description or "rc building")
    if return_flows:
        return ds, state, flows
    return ds, state


def rollout_dataset(system, commands, weather=None, n_steps=None, initial_state=None, seed=None):
    """Simulate ``system`` (a PendulumConfig or a list of RoomSpec) into a dataset."""
    commands = np.asarray(commands, dtype=np.float64)
    if n_steps is not None:
        if len(commands) < n_steps or (weather is not None and len(weather) < n_steps):
            raise ShapeError("inputs shorter than n_steps")
        commands = commands[:n_steps]
        weather = weather.slice(0, n_steps) if weather is not None else None
    if isinstance(system, PendulumConfig):
        if weather is not None and len(weather) != len(commands):
            raise ShapeError("commands and weather are misaligned")
        return pendulum_rollout(system, commands.reshape(-1), initial_state or PendulumState(),
                                seed=seed)
    ds, _ = building_rollout(system, commands, weather, initial_state, seed=seed)
    return ds
