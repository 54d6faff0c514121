"""Ground-truth and semi-physical simulators plus signal/weather generators."""
from .building import (BLIND_LEVELS, COOLING, HEATING, BuildingState, RoomSpec, WeatherSample,
                       building_step, changeover, effective_temperature, mini_building,
                       thermostat_valves)
from .dataset import EpisodeDataset
from .pendulum import (PendulumConfig, PendulumState, observe_pendulum, pendulum_rollout,
                       pendulum_step)
from .rollout import building_rollout, rollout_dataset
from .signals import SignalSpec, gen_signal
from .weather import WeatherSeries, gen_weather

__all__ = [
    "BLIND_LEVELS", "COOLING", "HEATING", "BuildingState", "EpisodeDataset", "PendulumConfig",
    "PendulumState", "RoomSpec", "SignalSpec", "WeatherSample", "WeatherSeries",
    "building_rollout", "building_step", "changeover", "effective_temperature", "gen_signal",
    "gen_weather", "mini_building", "observe_pendulum", "pendulum_rollout", "pendulum_step",
    "rollout_dataset", "thermostat_valves",
]
