"""Synthetic outdoor temperature and global irradiance."""
from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError

PROFILES = ("cold-day", "hot-day", "cloudy-day", "seasonal-year")
STEPS_PER_DAY = 144

# mean temperature, diurnal half-swing, irradiance peak, noise scale
_DAY_PROFILES = {
    "cold-day": (-4.0, 4.0, 350.0, 0.6),
    "hot-day": (29.0, 6.0, 880.0, 0.6),
    "cloudy-day": (17.5, 1.5, 900.0, 0.3),
}


@dataclass
class WeatherSeries:
    temperature: np.ndarray
    irradiance: np.ndarray
    steps_per_day: int = STEPS_PER_DAY
    start_step: int = 0

    def __post_init__(self):
        self.temperature = np.asarray(self.temperature, dtype=np.float64)
        self.irradiance = np.asarray(self.irradiance, dtype=np.float64)
        if self.temperature.shape != self.irradiance.shape:
            raise DomainError("temperature and irradiance must be aligned")
        if np.any(self.irradiance < 0):
            raise DomainError("irradiance must be >= 0")

    def __len__(self):
        return len(self.temperature)

    def hour(self, t):
        return 24.0 * ((self.start_step + t) % self.steps_per_day) / self.steps_per_day

    def slice(self, start, stop):
        return WeatherSeries(self.temperature[start:stop], self.irradiance[start:stop],
                             self.steps_per_day, self.start_step + start)

    def as_array(self):
        return np.column_stack([self.temperature, self.irradiance])


def solar_arc(hours, sunrise=6.0, sunset=18.0):
    """Clipped half-sine between sunrise and sunset, zero at night."""
    hours = np.asarray(hours, dtype=np.float64)
    frac = (hours - sunrise) / (sunset - sunrise)
    return np.where((frac > 0) & (frac < 1), np.sin(np.pi * np.clip(frac, 0, 1)), 0.0)


def _ar1(rng, n, scale, rho=0.97):
    e = rng.normal(0.0, scale * np.sqrt(1 - rho ** 2), size=n)
    out = np.empty(n)
    acc = 0.0
    for t in range(n):
        acc = rho * acc + e[t]
        out[t] = acc
    return out


def gen_weather(profile, seed, n_steps, steps_per_day=STEPS_PER_DAY, start_day=0):
    """Seeded synthetic weather.

    Day profiles repeat the same kind of day; ``seasonal-year`` starts on
    day-of-year ``start_day`` and adds a seasonal envelope plus random
    day-to-day cloudiness.
    """
    if profile not in PROFILES:
        raise DomainError(f"unknown weather profile {profile!r}")
    if n_steps <= 0:
        raise DomainError("n_steps must be > 0")
    rng = np.random.default_rng(seed)
    t = np.arange(n_steps)
    hours = 24.0 * (t % steps_per_day) / steps_per_day
    # coldest around 4 am, warmest around 4 pm
    diurnal = -np.cos(2 * np.pi * (hours - 4.0) / 24.0)
    if profile in _DAY_PROFILES:
        mean, swing, peak, noise = _DAY_PROFILES[profile]
        temp = mean + swing * diurnal + _ar1(rng, n_steps, noise)
        irr = peak * solar_arc(hours)
        if profile == "cloudy-day":
            irr *= 0.25 * (1.0 + 0.3 * _ar1(rng, n_steps, 1.0))
            temp = np.clip(temp, 15.0, 20.0)
    else:
        day = start_day + t / steps_per_day
        season = -np.cos(2 * np.pi * (day - 15.0) / 365.0)  # -1 mid January, +1 mid July
        n_days = int(np.ceil(n_steps / steps_per_day)) + 1
        cloud = np.clip(rng.beta(2.0, 2.0, size=n_days), 0.05, 1.0)
        cloud_t = cloud[(t // steps_per_day)]
        mean = 11.0 + 12.0 * season
        swing = 4.0 + 2.0 * season + 2.0 * (1 - cloud_t)
        temp = mean + swing * diurnal + _ar1(rng, n_steps, 2.0, rho=0.995)
        daylen = 12.0 + 3.5 * season
        peak = 600.0 + 300.0 * season
        irr = peak * (0.2 + 0.8 * (1.0 - cloud_t)) * solar_arc(hours, 12 - daylen / 2, 12 + daylen / 2)
    irr = np.clip(irr, 0.0, None)
    return WeatherSeries(temp, irr, steps_per_day, start_day * steps_per_day)
