"""Two-node RC rooms with ventilation / hydronic mixing.

Each room has an air node and a wall node. Supply air (rate ``C_r``, 1/h,
temperature ``T_air`` of its ventilation zone) and the hydronic emitter
(valve opening ``O``, fluid temperature ``T_flow``) are mixed into one
effective temperature

    T_eff = (T_air * C_r + alpha * T_flow * O) / (C_r + alpha * O)

which exchanges heat with the room air through a conductance proportional
to ``C_r + alpha * O``. Solar gain through the windows is attenuated
linearly by the blind position (0 open, 4 fully closed) and split evenly
between air and wall. Integration is explicit Euler.
"""
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from ..exceptions import DegenerateMixingError, DomainError, ShapeError
from .weather import solar_arc

ORIENTATIONS = ("north", "east", "south", "west")
_ORIENTATION_PEAK = {"east": 9.0, "south": 12.5, "west": 16.0}
BLIND_LEVELS = 5
TARGET_TEMPERATURE = 23.0


@dataclass(frozen=True)
class RoomSpec:
    name: str
    floor: int
    orientation: str
    size: str = "medium"
    zone: int = 0
    inputs: tuple = ("valve", "blind")
    # air <-> wall resistance (K/W) and air-node capacitance (J/K)
    resistance: float = 1 / 150.0
    capacitance: float = 1.5e6
    wall_resistance: float = 1 / 30.0
    wall_capacitance: float = 2.0e7
    window_resistance: float = 1 / 40.0
    window_gain: float = 3.0
    mix_conductance: float = 150.0
    alpha: float = 0.6

    def __post_init__(self):
        if self.floor not in (0, 1, 2):
            raise DomainError("floor must be 0, 1 or 2")
        if self.orientation not in ORIENTATIONS:
            raise DomainError(f"unknown orientation {self.orientation!r}")
        for name in ("resistance", "capacitance", "wall_resistance", "wall_capacitance",
                     "window_resistance", "mix_conductance"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        if not 0 < self.alpha <= 1:
            raise DomainError("alpha must lie in (0, 1]")
        if self.window_gain < 0:
            raise DomainError("window_gain must be >= 0")

    @property
    def class_tuple(self):
        return (self.inputs, self.floor, self.orientation, self.size)


class WeatherSample(NamedTuple):
    temperature: float
    irradiance: float
    hour: float = 12.0


@dataclass
class BuildingState:
    t_room: np.ndarray
    t_wall: np.ndarray
    valve: np.ndarray
    blind: np.ndarray
    t_flow: float = 20.0
    t_air: np.ndarray = field(default_factory=lambda: np.array([20.0, 20.0]))
    c_r: np.ndarray = None

    def __post_init__(self):
        self.t_room = np.asarray(self.t_room, dtype=np.float64)
        self.t_wall = np.asarray(self.t_wall, dtype=np.float64)
        self.valve = np.asarray(self.valve, dtype=np.float64)
        self.blind = np.asarray(self.blind, dtype=np.int64)
        self.t_air = np.atleast_1d(np.asarray(self.t_air, dtype=np.float64))
        n = len(self.t_room)
        if self.c_r is None:
            self.c_r = np.ones(n)
        self.c_r = np.broadcast_to(np.asarray(self.c_r, dtype=np.float64), (n,)).copy()
        if not (len(self.t_wall) == len(self.valve) == len(self.blind) == n):
            raise ShapeError("per-room state arrays must share one length")
        if np.any((self.valve < 0) | (self.valve > 1)):
            raise DomainError("valve opening must lie in [0, 1]")
        if np.any((self.blind < 0) | (self.blind > BLIND_LEVELS - 1)):
            raise DomainError("blind position must lie in {0, ..., 4}")

    @classmethod
    def uniform(cls, n_rooms, temperature, n_zones=2):
        return cls(np.full(n_rooms, float(temperature)), np.full(n_rooms, float(temperature)),
                   np.zeros(n_rooms), np.zeros(n_rooms, dtype=np.int64),
                   float(temperature), np.full(n_zones, float(temperature)))

    def with_commands(self, valve=None, blind=None, t_flow=None, t_air=None, c_r=None):
        kw = {}
        if valve is not None:
            kw["valve"] = np.clip(np.asarray(valve, dtype=np.float64), 0.0, 1.0)
        if blind is not None:
            kw["blind"] = np.asarray(blind, dtype=np.int64)
        if t_flow is not None:
            kw["t_flow"] = float(t_flow)
        if t_air is not None:
            kw["t_air"] = np.atleast_1d(np.asarray(t_air, dtype=np.float64))
        if c_r is not None:
            kw["c_r"] = c_r
        return replace(self, **kw)


def effective_temperature(t_air, c_r, t_flow, valve, alpha):
    """Mixed supply temperature; convex combination of ``t_air`` and ``t_flow``."""
    t_air, c_r, t_flow, valve = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.float64) for v in (t_air, c_r, t_flow, valve)))
    weight = c_r + alpha * valve
    if np.any(weight <= 0):
        raise DegenerateMixingError("C_r + alpha * O must be > 0")
    out = (t_air * c_r + alpha * t_flow * valve) / weight
    return out if out.ndim else float(out)


def orientation_factor(orientation, hour):
    """Share of global irradiance reaching a facade at a given hour."""
    if orientation == "north":
        return 0.25 * (solar_arc(hour) > 0)
    peak = _ORIENTATION_PEAK[orientation]
    return 0.25 + 0.75 * np.clip(np.cos(np.pi * (hour - peak) / 9.0), 0.0, None) * (solar_arc(hour) > 0)


@dataclass(frozen=True)
class RoomArrays:
    """Vectorized view of a room list."""
    g_aw: np.ndarray
    g_win: np.ndarray
    g_wo: np.ndarray
    c_air: np.ndarray
    c_wall: np.ndarray
    gain: np.ndarray
    h_mix: np.ndarray
    alpha: np.ndarray
    zone: np.ndarray
    floor: np.ndarray
    orientations: tuple

    @classmethod
    def from_rooms(cls, rooms):
        f = lambda name: np.array([getattr(r, name) for r in rooms], dtype=np.float64)  # noqa: E731
        return cls(1 / f("resistance"), 1 / f("window_resistance"), 1 / f("wall_resistance"),
                   f("capacitance"), f("wall_capacitance"), f("window_gain"),
                   f("mix_conductance"), f("alpha"),
                   np.array([r.zone for r in rooms]), np.array([r.floor for r in rooms]),
                   tuple(r.orientation for r in rooms))


def solar_gains(rooms, irradiance, hour, blind):
    arr = rooms if isinstance(rooms, RoomArrays) else RoomArrays.from_rooms(rooms)
    factors = np.array([orientation_factor(o, hour) for o in arr.orientations], dtype=np.float64)
    shade = 1.0 - np.asarray(blind, dtype=np.float64) / (BLIND_LEVELS - 1)
    return arr.gain * irradiance * factors * shade


def building_step(rooms, state, weather, dt=600.0, return_flows=False):
    """Advance every room by ``dt`` seconds under the commands held in ``state``."""
    arr = rooms if isinstance(rooms, RoomArrays) else RoomArrays.from_rooms(rooms)
    if len(arr.g_aw) != len(state.t_room):
        raise ShapeError("room list and state have different room counts")
    t_out, irr, hour = weather
    t_air_room = state.t_air[arr.zone]
    t_eff = effective_temperature(t_air_room, state.c_r, state.t_flow, state.valve, arr.alpha)
    weight = state.c_r + arr.alpha * state.valve
    q_vent = arr.h_mix * state.c_r * (t_air_room - state.t_room)
    q_hydro = arr.h_mix * arr.alpha * state.valve * (state.t_flow - state.t_room)
    q_mix = arr.h_mix * weight * (t_eff - state.t_room)
    q_sol = solar_gains(arr, irr, hour, state.blind)
    q_aw = arr.g_aw * (state.t_wall - state.t_room)
    d_room = q_aw + arr.g_win * (t_out - state.t_room) + q_mix + 0.5 * q_sol
    d_wall = -q_aw + arr.g_wo * (t_out - state.t_wall) + 0.5 * q_sol
    new = replace(state, t_room=state.t_room + dt * d_room / arr.c_air,
                  t_wall=state.t_wall + dt * d_wall / arr.c_wall)
    if return_flows:
        return new, {"q_vent": q_vent, "q_hydro": q_hydro, "q_solar": q_sol}
    return new


def mini_building(variant="simulation"):
    """Eight rooms on two floors, two ventilation zones, four orientations.

    ``variant="real"`` returns the ground-truth building whose parameters
    differ from the coarse simulation: larger south glazing, leakier
    envelope, heavier walls and weaker mixing.
    """
    sizes = {"north": "small", "east": "medium", "south": "big", "west": "medium"}
    size_scale = {"small": 0.8, "medium": 1.0, "big": 1.3}
    gains = {"north": 1.5, "east": 3.0, "south": 4.0, "west": 3.0}
    rooms = []
    for floor in (0, 1):
        for orientation in ORIENTATIONS:
            size = sizes[orientation]
            s = size_scale[size]
            zone = 0 if orientation in ("north", "east") else 1
            kw = dict(capacitance=1.5e6 * s, resistance=1 / (150.0 * s),
                      wall_capacitance=2.0e7 * s, wall_resistance=1 / (30.0 * s + 5.0 * floor),
                      window_resistance=1 / (40.0 * s), window_gain=gains[orientation] * s,
                      mix_conductance=150.0 * s, alpha=0.6)
            if variant == "real":
                kw.update(capacitance=kw["capacitance"] * 1.25,
                          wall_capacitance=kw["wall_capacitance"] * 1.4,
                          window_resistance=kw["window_resistance"] / 1.3,
                          window_gain=kw["window_gain"] * (1.35 if orientation == "south" else 1.15)
                          * (1.1 if floor == 1 else 1.0),
                          mix_conductance=kw["mix_conductance"] * 0.85, alpha=0.5)
            elif variant != "simulation":
                raise DomainError(f"unknown building variant {variant!r}")
            rooms.append(RoomSpec(name=f"F{floor}-{orientation}", floor=floor,
                                  orientation=orientation, size=size, zone=zone, **kw))
    return rooms


# -- plant-side logic shared by baselines and learned controllers ------------------

HEATING, COOLING = 1, -1


def changeover(t_room, mode, upper=0.5, lower=-0.2, target=TARGET_TEMPERATURE):
    """Heating/cooling switch driven by the summed room demand.

    A room contributes ``T_room - target`` when that difference exceeds
    ``upper`` or falls below ``lower``. A positive total (rooms too warm)
    selects cooling, a negative one heating; zero keeps ``mode``.
    """
    diff = np.asarray(t_room, dtype=np.float64) - target
    demand = float(np.sum(np.where((diff > upper) | (diff < lower), diff, 0.0)))
    if demand > 0:
        return COOLING, demand
    if demand < 0:
        return HEATING, demand
    return mode, demand


def thermostat_valves(t_room, mode, target=TARGET_TEMPERATURE, band=1.5):
    """Proportional valve opening; opens on the side that moves rooms to target."""
    err = (target - np.asarray(t_room, dtype=np.float64)) * (1 if mode == HEATING else -1)
    return np.clip(err / band + 0.25, 0.0, 1.0) * (err > -0.25 * band)


def command_names(n_rooms, n_zones=2):
    return ([f"blind_{i}" for i in range(n_rooms)] + [f"valve_{i}" for i in range(n_rooms)]
            + ["t_flow"] + [f"t_air_{z}" for z in range(n_zones)])


def pack_commands(blind, valve, t_flow, t_air):
    return np.concatenate([np.asarray(blind, dtype=np.float64), np.asarray(valve, dtype=np.float64),
                           [float(t_flow)], np.atleast_1d(np.asarray(t_air, dtype=np.float64))])


def unpack_commands(u, n_rooms):
    u = np.asarray(u, dtype=np.float64)
    return (np.rint(u[:n_rooms]).astype(np.int64), u[n_rooms:2 * n_rooms], float(u[2 * n_rooms]),
            u[2 * n_rooms + 1:])
