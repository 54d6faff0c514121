"""Mini-building pipeline: data, reduced-model ensemble, energy model, PPO, comparison.

The coarse ``simulation`` building generates the pre-training data under a
randomized closed-loop excitation; the ``real`` building, run under the
rule-based controllers, provides the historical record. Controllers are
trained on the retrained ensemble members and evaluated on the members
held out of training.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .._seeding import stage_seed
from ..evaluation.baselines import BaselineController
from ..evaluation.compare import ControllerSpec, compare
from ..evaluation.energy import energy_features, fit_energy_model
from ..rl.building_env import GLOBAL_HIGH, GLOBAL_LOW, LOCAL_OBS_DIM, BuildingModelEnv
from ..rl.distributed import distributed_train
from ..rl.policies import DiscretePolicy, GaussianTanhPolicy, ValueNet
from ..rl.ppo import PpoConfig
from ..rl.rewards import RewardSpec
from ..sim.building import (BLIND_LEVELS, HEATING, BuildingState, RoomArrays, WeatherSample,
                            building_step, changeover, command_names, mini_building,
                            thermostat_valves)
from ..sim.dataset import EpisodeDataset
from ..sim.weather import STEPS_PER_DAY, gen_weather
from ..sysid.ensemble import EnsembleSpec, build_ensemble
from ..sysid.reduced_model import ReducedModel
from ..sysid.retrain import RetrainConfig, StoppingSet
from ..sysid.training import fit_normalizer, train_stage1

log = logging.getLogger(__name__)

DT = 600.0
J_PER_KWH = 3.6e6


def _default_members():
    full = dict(algorithm="full", batch_size=32, lr=3e-4, lr_final=3e-5)
    fine = dict(algorithm="fine", batch_size=32)
    return (RetrainConfig(delta_max=0.6, n_max=400, p_eval=40, **full),
            RetrainConfig(delta_max=0.4, n_max=300, p_eval=30, **full),
            RetrainConfig(delta_max=0.8, n_max=500, p_eval=50, **full),
            RetrainConfig(delta_max=0.3, n_max=300, p_eval=30, **fine),
            RetrainConfig(delta_max=0.5, n_max=400, p_eval=40, **fine),
            RetrainConfig(delta_max=0.5, n_max=200, p_eval=20, **full),
            RetrainConfig(delta_max=0.6, n_max=400, p_eval=40, **fine),
            RetrainConfig(delta_max=0.7, n_max=300, p_eval=30, **full))


@dataclass
class BuildingExperiment:
    seed: int = 0
    sim_episodes: int = 10
    sim_days: int = 35
    hist_days: int = 120
    hist_start_day: int = 90
    eval_days: int = 40
    eval_start_day: int = 140
    hidden_dim: int = 48
    mlp_sizes: tuple = (64, 32)
    encode_length: int = 24
    decode_length: int = 144
    stage1_iterations: int = 3000
    batch_size: int = 32
    lr: float = 1e-3
    members: tuple = field(default_factory=_default_members)
    n_held_out: int = 2
    ppo: PpoConfig = field(default_factory=lambda: PpoConfig(
        rollout_length=576, minibatch_size=288, n_updates=16, n_workers=4, n_iterations=60))
    global_iterations: int = 60
    discrete_k: int = BLIND_LEVELS
    p_switch: float = 0.25
    beta_e: float = 0.1
    beta_e_factor: float = 3.0
    episode_length: int = STEPS_PER_DAY
    eval_starts: int = 20
    # linear SSM baselines are cheap on the pendulum but not on 21 inputs x 8 outputs
    ssm_orders: tuple = ()


# -- data generation -------------------------------------------------------------

class Excitation:
    """Randomized closed-loop commands for pre-training data.

    Valves follow the thermostat plus a held random offset, supply and air
    temperatures and blinds are random levels held for 1 to 6 hours.
    """

    def __init__(self, n_rooms, n_zones, rng, hold=(6, 36)):
        self.n_rooms, self.n_zones, self.rng, self.hold = n_rooms, n_zones, rng, hold
        self.mode = HEATING
        self._next = np.zeros(2 * n_rooms + 2, dtype=np.int64)
        self.blind = np.zeros(n_rooms, dtype=np.int64)
        self.offset = np.zeros(n_rooms)
        self.t_heat = self.t_cool = 0.0
        self.t_air = np.full(n_zones, 20.0)

    def _due(self, k, t):
        if t >= self._next[k]:
            self._next[k] = t + self.rng.integers(self.hold[0], self.hold[1] + 1)
            return True
        return False

    def __call__(self, t, t_room, sample):
        n, rng = self.n_rooms, self.rng
        for i in range(n):
            if self._due(i, t):
                self.blind[i] = rng.integers(0, BLIND_LEVELS)
            if self._due(n + i, t):
                self.offset[i] = rng.uniform(-0.5, 0.5)
        if self._due(2 * n, t):
            self.t_heat = rng.uniform(25.0, 50.0)
            self.t_cool = rng.uniform(10.0, 20.0)
        if self._due(2 * n + 1, t):
            self.t_air = rng.uniform(12.0, 28.0, size=self.n_zones)
        self.mode, _ = changeover(t_room, self.mode)
        valve = np.clip(thermostat_valves(t_room, self.mode) + self.offset, 0.0, 1.0)
        t_flow = self.t_heat if self.mode == HEATING else self.t_cool
        return self.blind.copy(), valve, t_flow, self.t_air.copy()


class RuleOperation:
    """The real building's record: a rule-based controller, blind rule drawn per day."""

    def __init__(self, rooms, rng, variants=("blinds-1", "blinds-2", "blinds-3")):
        self.orientations = tuple(r.orientation for r in rooms)
        self.zones = np.array([r.zone for r in rooms])
        self.rng = rng
        self.variants = variants
        self.mode = HEATING
        self.ctrl = BaselineController(variants[0])

    def __call__(self, t, t_room, sample):
        if t % STEPS_PER_DAY == 0:
            self.ctrl = BaselineController(self.variants[int(self.rng.integers(len(self.variants)))])
        blind = self.ctrl.blinds(t_room, sample.irradiance, sample.hour, self.orientations)
        self.mode, t_flow, t_air, valve = self.ctrl.global_commands(t_room, sample.temperature,
                                                                    self.mode, self.zones)
        return blind, valve, t_flow, t_air


def true_energy(arr, state, t_out, q_hydro, dt=DT):
    """``(heating, cooling)`` in kWh: emitter flows plus air conditioning of supply air."""
    ahu = arr.h_mix * state.c_r * (state.t_air[arr.zone] - t_out)
    e_h = (np.maximum(q_hydro, 0).sum() + np.maximum(ahu, 0).sum()) * dt / J_PER_KWH
    e_c = (np.maximum(-q_hydro, 0).sum() + np.maximum(-ahu, 0).sum()) * dt / J_PER_KWH
    return e_h, e_c


def closed_loop(rooms, weather, controller, state=None, description=""):
    """Run ``controller(t, t_room, sample) -> (blind, valve, t_flow, t_air)`` on the RC model.

    Returns the dataset and the per-step true ``(heating, cooling)`` energy.
    """
    arr = RoomArrays.from_rooms(rooms)
    n_zones = int(arr.zone.max()) + 1
    state = state or BuildingState.uniform(len(rooms), 21.0, n_zones)
    steps = len(weather)
    commands = np.empty((steps, 2 * len(rooms) + 1 + n_zones))
    obs = np.empty((steps, len(rooms)))
    energy = np.empty((steps, 2))
    for t in range(steps):
        sample = WeatherSample(weather.temperature[t], weather.irradiance[t], weather.hour(t))
        blind, valve, t_flow, t_air = controller(t, state.t_room, sample)
        state = state.with_commands(valve=valve, blind=blind, t_flow=t_flow, t_air=t_air)
        commands[t] = np.concatenate([state.blind, state.valve, [state.t_flow], state.t_air])
        state, flows = building_step(arr, state, sample, DT, return_flows=True)
        energy[t] = true_energy(arr, state, sample.temperature, flows["q_hydro"])
        obs[t] = state.t_room
    ds = EpisodeDataset(commands, weather.as_array(), obs, dt=DT,
                        command_names=command_names(len(rooms), n_zones),
                        exogenous_names=["t_out", "irradiance"],
                        observation_names=[f"t_room_{i}" for i in range(len(rooms))],
                        description=description)
    return ds, energy


def make_sim_data(cfg):
    rooms = mini_building("simulation")
    seed = stage_seed(cfg.seed, "simulate") % 2**31
    parts = []
    n = cfg.sim_days * STEPS_PER_DAY
    for k in range(cfg.sim_episodes):
        start = int(k * 365 / cfg.sim_episodes)
        weather = gen_weather("seasonal-year", seed + k, n, start_day=start)
        rng = np.random.default_rng(seed + 1000 + k)
        ds, _ = closed_loop(rooms, weather, Excitation(len(rooms), 2, rng),
                            description="simulation building, randomized excitation")
        parts.append(ds)
    return EpisodeDataset.concatenate(parts, "simulation building, randomized excitation")


def make_real_data(cfg, days, start_day, stage):
    """Rule-operated real building from midnight; returns ``(dataset, energy)``."""
    rooms = mini_building("real")
    seed = stage_seed(cfg.seed, stage) % 2**31
    weather = gen_weather("seasonal-year", seed, days * STEPS_PER_DAY, start_day=start_day)
    return closed_loop(rooms, weather, RuleOperation(rooms, np.random.default_rng(seed + 1)),
                       description=f"real building under rule-based control ({stage})")


SCENARIOS = {
    # (air supply, blinds, valves, water supply)
    "S1": (20.0, 0, 0.0, 20.0),
    "S2": (20.0, 4, 0.0, 20.0),
    "S3": (20.0, 2, 1.0, 20.0),
    "S4": (26.0, 4, 1.0, 50.0),
    "S5": (12.0, 4, 1.0, 10.0),
}


def make_stopping_set(cfg):
    """Cold, hot and cloudy days crossed with five constant command scenarios."""
    rooms = mini_building("simulation")
    n_rooms, n = len(rooms), cfg.encode_length
    seed = stage_seed(cfg.seed, "stopping-set") % 2**31
    envs, prefixes = [], []
    for k, profile in enumerate(("cold-day", "hot-day", "cloudy-day")):
        weather = gen_weather(profile, seed + k, 2 * STEPS_PER_DAY)
        ops = RuleOperation(rooms, np.random.default_rng(seed + 10 + k), ("blinds-1",))
        ds, _ = closed_loop(rooms, weather, ops)
        prefixes.append(ds.x[STEPS_PER_DAY - n:STEPS_PER_DAY])
        envs.append(ds.exogenous[STEPS_PER_DAY:])
    commands = []
    for t_air, blind, valve, t_flow in SCENARIOS.values():
        u = np.concatenate([np.full(n_rooms, float(blind)), np.full(n_rooms, valve), [t_flow],
                            [t_air, t_air]])
        commands.append(np.tile(u, (STEPS_PER_DAY, 1)))
    return StoppingSet(envs, commands, prefixes)


# -- identification ----------------------------------------------------------------

def train_sim_model(cfg, sim):
    model = ReducedModel.init(sim.d_I, sim.d_E, sim.d_O, cfg.hidden_dim, cfg.mlp_sizes,
                              cfg.encode_length, cfg.decode_length,
                              rng=stage_seed(cfg.seed, "init-sim"), normalizer=fit_normalizer(sim))
    return train_stage1(model, sim, cfg.stage1_iterations, batch_size=cfg.batch_size, lr=cfg.lr,
                        seed=stage_seed(cfg.seed, "train-sim"))


def member_configs(cfg):
    return tuple(RetrainConfig(**{**c.__dict__, "seed": stage_seed(cfg.seed, f"retrain-{k}")})
                 for k, c in enumerate(cfg.members))


def build_models(cfg, stage1, hist, stopping):
    spec = EnsembleSpec(member_configs(cfg), n_held_out=cfg.n_held_out)
    return build_ensemble(stage1, hist, spec, stopping)


def fit_energy(hist, energy):
    n_rooms = hist.d_O
    u = hist.commands
    feats = energy_features(u[:, n_rooms:2 * n_rooms], u[:, 2 * n_rooms], u[:, 2 * n_rooms + 1:],
                            hist.exogenous[:, 0], hist.exogenous[:, 1])
    return fit_energy_model(feats, energy[:, 0], energy[:, 1])


# -- control -------------------------------------------------------------------------

def _local_agents(cfg, n_rooms, rng):
    actors = [DiscretePolicy.init(LOCAL_OBS_DIM, cfg.discrete_k, rng=rng, p_switch=cfg.p_switch)
              for _ in range(n_rooms)]
    critics = [ValueNet.init(LOCAL_OBS_DIM, rng=rng) for _ in range(n_rooms)]
    return actors, critics


def train_local(cfg, models, hist, rooms, callback=None):
    rng = np.random.default_rng(stage_seed(cfg.seed, "init-local"))
    actors, critics = _local_agents(cfg, len(rooms), rng)
    envs = [BuildingModelEnv(models, hist, rooms, role="local",
                             episode_length=cfg.episode_length) for _ in range(cfg.ppo.n_workers)]
    return distributed_train(envs, actors, critics, cfg.ppo, seed=stage_seed(cfg.seed, "ppo-local"),
                             callback=callback)


def energy_scale(energy_model, hist):
    """Inverse of the mean per-step energy estimate on the historical record."""
    n_rooms = hist.d_O
    u = hist.commands
    feats = energy_features(u[:, n_rooms:2 * n_rooms], u[:, 2 * n_rooms], u[:, 2 * n_rooms + 1:],
                            hist.exogenous[:, 0], hist.exogenous[:, 1])
    h, c = energy_model.rates(feats)
    return 1.0 / max(float(np.mean(h + c)), 1e-9)


def train_global(cfg, models, hist, rooms, local_policies, energy_model, beta_e, tag,
                 callback=None):
    rng = np.random.default_rng(stage_seed(cfg.seed, f"init-global-{tag}"))
    obs_dim = len(rooms) + 5
    actor = GaussianTanhPolicy.init(obs_dim, GLOBAL_LOW, GLOBAL_HIGH, rng=rng)
    critic = ValueNet.init(obs_dim, rng=rng)
    reward = RewardSpec("global", beta_E=beta_e)
    scale = energy_scale(energy_model, hist)
    envs = [BuildingModelEnv(models, hist, rooms, role="global", reward=reward,
                             energy_model=energy_model, local_policies=local_policies,
                             episode_length=cfg.episode_length, energy_scale=scale)
            for _ in range(cfg.ppo.n_workers)]
    ppo = PpoConfig(**{**cfg.ppo.__dict__, "n_iterations": cfg.global_iterations})
    return distributed_train(envs, [actor], [critic], ppo,
                             seed=stage_seed(cfg.seed, f"ppo-global-{tag}"), callback=callback)


def global_variants(cfg):
    return {"base": cfg.beta_e, "energy3x": cfg.beta_e * cfg.beta_e_factor, "no-energy": 0.0}


def evaluate_controllers(cfg, controllers, models, eval_data, rooms, energy_model):
    """Metric reports of every controller on every model over the evaluation days."""

    def factory(model, ctrl):
        return BuildingModelEnv(model, eval_data, rooms, role="eval", energy_model=energy_model,
                                local_policies=ctrl.local_policies, global_policy=ctrl.global_policy,
                                baseline=ctrl.baseline, episode_length=cfg.episode_length,
                                obs_noise=False, training=False)

    probe = factory(next(iter(models.values())), controllers[0])
    starts = probe.day_starts[:cfg.eval_starts]
    return compare(controllers, models, factory, [int(s) for s in starts], 1)


def baseline_controllers():
    return [ControllerSpec(v, baseline=BaselineController(v))
            for v in ("blinds-1", "blinds-2", "blinds-3")]


def check_ordering(reports, learned="learned-base", energy_low="learned-energy3x",
                   energy_high="learned-no-energy", reference="blinds-1"):
    """Comfort and energy orderings over the held-out models."""
    by = {(r.controller, r.model): r for r in reports}
    models = sorted({r.model for r in reports})
    comfort = all(by[(learned, m)].m_dev < by[(reference, m)].m_dev for m in models)
    e_low = sum(by[(energy_low, m)].total_energy for m in models)
    e_high = sum(by[(energy_high, m)].total_energy for m in models)
    return {"mdev_below_blinds1": comfort, "energy_ordering": e_low < e_high}


def run(cfg, callback=None):
    """Every stage in memory; returns the artifacts and the held-out reports."""
    rooms = mini_building("real")
    sim = make_sim_data(cfg)
    hist, hist_energy = make_real_data(cfg, cfg.hist_days, cfg.hist_start_day, "history")
    eval_data, _ = make_real_data(cfg, cfg.eval_days, cfg.eval_start_day, "evaluation")
    stage1, _ = train_sim_model(cfg, sim)
    ensemble = build_models(cfg, stage1, hist, make_stopping_set(cfg))
    energy_model = fit_energy(hist, hist_energy)
    train_models = list(ensemble.train)
    local = train_local(cfg, train_models, hist, rooms, callback)
    controllers = baseline_controllers()
    bundles = {}
    for tag, beta in global_variants(cfg).items():
        bundles[tag] = train_global(cfg, train_models, hist, rooms, local.actors, energy_model,
                                    beta, tag, callback)
        controllers.append(ControllerSpec(f"learned-{tag}", local.actors, bundles[tag].actors[0]))
    held = {f"held-out-{k}": m for k, m in enumerate(ensemble.held_out)}
    reports = evaluate_controllers(cfg, controllers, held, eval_data, rooms, energy_model)
    return {"sim": sim, "hist": hist, "eval": eval_data, "stage1": stage1, "ensemble": ensemble,
            "energy_model": energy_model, "local": local, "global": bundles, "reports": reports,
            "checks": check_ordering(reports)}
