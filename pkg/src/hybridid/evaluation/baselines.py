"""Rule-based controllers used as benchmarks.

Blind strategies (positions 0 open .. 4 fully closed):

* ``blinds-1``: fixed four-hour closing windows per orientation
  (north/east 8-12 h, south 10-14 h, west 14-18 h).
* ``blinds-2``: closed above 25.5 C room temperature with irradiance
  > 400 W/m2, half closed above 24 C with irradiance > 400 W/m2.
* ``blinds-3``: closed above 24.5 C with irradiance > 300 W/m2, half closed
  above 24 C with irradiance > 400 W/m2.

Every variant uses the same plant-side rule for the global commands: a
heating curve for the supply water in heating mode, a fixed cold supply in
cooling mode, a demand-sign changeover and a linear ventilation-air law.
"""
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import DomainError
from ..sim.building import (BLIND_LEVELS, COOLING, HEATING, TARGET_TEMPERATURE, changeover,
                            thermostat_valves)

VARIANTS = ("blinds-1", "blinds-2", "blinds-3", "global-rule")
CLOSED = BLIND_LEVELS - 1
HALF = CLOSED // 2
SCHEDULE = {"north": (8, 12), "east": (8, 12), "south": (10, 14), "west": (14, 18)}


@dataclass(frozen=True)
class BlindRule:
    closed_temp: float
    closed_irr: float
    half_temp: float
    half_irr: float


BLIND_RULES = {"blinds-2": BlindRule(25.5, 400.0, 24.0, 400.0),
               "blinds-3": BlindRule(24.5, 300.0, 24.0, 400.0)}


@dataclass(frozen=True)
class BaselineController:
    variant: str = "blinds-1"
    # heating curve: supply water temperature against outdoor temperature
    curve_t_out: tuple = (-10.0, 20.0)
    curve_t_flow: tuple = (45.0, 25.0)
    cooling_t_flow: float = 16.0
    upper: float = 0.5
    lower: float = -0.2
    # ventilation air: a0 + a1 (t_out - 15) + a2 mode - a3 zone demand, clipped
    vent_coef: tuple = (21.0, -0.1, 1.0, 0.5)
    vent_range: tuple = (16.0, 26.0)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown baseline variant {self.variant!r}")
        xs, ys = np.asarray(self.curve_t_out), np.asarray(self.curve_t_flow)
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise DomainError("heating curve must be finite")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) > 0):
            raise DomainError("heating curve must be nonincreasing in outdoor temperature")

    def heating_curve(self, t_out):
        return float(np.interp(t_out, self.curve_t_out, self.curve_t_flow))

    def blinds(self, t_room, irradiance, hour, orientations):
        t_room = np.asarray(t_room, dtype=float)
        if self.variant in ("blinds-1", "global-rule"):
            out = np.zeros(len(t_room), dtype=np.int64)
            if self.variant == "blinds-1":
                for i, o in enumerate(orientations):
                    start, stop = SCHEDULE[o]
                    if start <= hour < stop:
                        out[i] = CLOSED
            return out
        rule = BLIND_RULES[self.variant]
        closed = (t_room > rule.closed_temp) & (irradiance > rule.closed_irr)
        half = (t_room > rule.half_temp) & (irradiance > rule.half_irr)
        return np.where(closed, CLOSED, np.where(half, HALF, 0)).astype(np.int64)

    def global_commands(self, t_room, t_out, mode, zones):
        """``(mode, t_flow, t_air per zone, valves)`` from room temperatures."""
        t_room = np.asarray(t_room, dtype=float)
        mode, _ = changeover(t_room, mode, self.upper, self.lower)
        t_flow = self.heating_curve(t_out) if mode == HEATING else self.cooling_t_flow
        a0, a1, a2, a3 = self.vent_coef
        zones = np.asarray(zones)
        n_zones = int(zones.max()) + 1
        t_air = np.empty(n_zones)
        for z in range(n_zones):
            diff = t_room[zones == z] - TARGET_TEMPERATURE
            demand = float(np.sum(np.where((diff > self.upper) | (diff < self.lower), diff, 0.0)))
            t_air[z] = a0 + a1 * (t_out - 15.0) + a2 * mode - a3 * demand
        t_air = np.clip(t_air, *self.vent_range)
        return mode, t_flow, t_air, thermostat_valves(t_room, mode)


@dataclass
class BuildingObservation:
    t_room: np.ndarray
    t_out: float
    irradiance: float
    hour: float
    mode: int = HEATING
    orientations: tuple = field(default=())
    zones: np.ndarray = None


def baseline_step(controller, obs):
    """Full command set ``(blind, valve, t_flow, t_air, mode)`` for one step."""
    blind = controller.blinds(obs.t_room, obs.irradiance, obs.hour, obs.orientations)
    mode, t_flow, t_air, valve = controller.global_commands(obs.t_room, obs.t_out, obs.mode,
                                                            obs.zones)
    return blind, valve, t_flow, t_air, mode


__all__ = ["BaselineController", "BuildingObservation", "baseline_step", "BLIND_RULES",
           "SCHEDULE", "CLOSED", "HALF", "COOLING", "HEATING"]
