"""Pipeline stages working on a stage-per-directory artifact tree.

Layout under the output directory::

    data/        datasets (CSV + sidecar)
    stage1/      simulation-trained checkpoints and loss history
    retrain/     retrained models (pendulum) or the ensemble manifest
    baselines/   linear state-space models
    ppo/         policies, value networks, learning curves, energy model
    evaluate/    metric tables, scatter data, ordering checks

A stage only writes inside its own directory and refuses to touch one that
already holds files, unless ``overwrite`` is set.
"""
import csv
import json
import logging
from pathlib import Path

import numpy as np

from ..evaluation.compare import (ControllerSpec, write_prediction_scatter, write_report,
                                  write_scatter)
from ..evaluation.energy import EnergyModel
from ..exceptions import ConfigError, IdentificationError
from ..experiments import building as bexp
from ..experiments import pendulum as pexp
from ..rl.distributed import load_policy
from ..sim.building import mini_building
from ..sim.dataset import EpisodeDataset
from ..sysid.ensemble import load_ensemble, save_ensemble
from ..sysid.linear_ssm import fit_linear_ssm, load_linear_ssm, save_linear_ssm
from ..sysid.reduced_model import ReducedModel

log = logging.getLogger(__name__)


def stage_dir(out, name, overwrite=False):
    d = Path(out) / name
    if d.exists() and any(d.iterdir()) and not overwrite:
        raise ConfigError(f"stage directory {d} already holds outputs (use --overwrite)")
    d.mkdir(parents=True, exist_ok=True)
    return d


def require(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"missing input {path}; run the producing stage first")
    return path


def write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, default=float))


def write_history(path, history):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("iteration", "train_loss", "validation_loss"))
        for it, tr, va in history:
            w.writerow([it, repr(float(tr)), repr(float(va))])


def split_episodes(ds):
    return [ds.slice(a, b) for a, b in ds.episode_bounds()]


# -- simulate ----------------------------------------------------------------------

def simulate(exp, out, overwrite=False):
    d = stage_dir(out, "data", overwrite)
    if isinstance(exp, pexp.PendulumExperiment):
        sim, hist, episodes = pexp.make_datasets(exp)
        EpisodeDataset.concatenate(episodes, "pendulum, square torque").to_csv(d / "eval.csv")
    else:
        sim = bexp.make_sim_data(exp)
        hist, energy = bexp.make_real_data(exp, exp.hist_days, exp.hist_start_day, "history")
        ev, _ = bexp.make_real_data(exp, exp.eval_days, exp.eval_start_day, "evaluation")
        ev.to_csv(d / "eval.csv")
        with open(d / "hist_energy.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("heating", "cooling"))
            for h, c in energy:
                w.writerow([repr(float(h)), repr(float(c))])
    sim.to_csv(d / "sim.csv")
    hist.to_csv(d / "hist.csv")
    return d


def load_data(out, name):
    return EpisodeDataset.from_csv(require(Path(out) / "data" / f"{name}.csv"))


def load_hist_energy(out):
    rows = np.loadtxt(require(Path(out) / "data" / "hist_energy.csv"), delimiter=",", skiprows=1)
    return rows.reshape(-1, 2)


# -- identification ------------------------------------------------------------------

def train_sim(exp, out, overwrite=False):
    sim = load_data(out, "sim")
    d = stage_dir(out, "stage1", overwrite)
    if isinstance(exp, pexp.PendulumExperiment):
        model, history = pexp.train_sim_model(exp, sim)
        hist_model, h2 = pexp.train_hist_model(exp, load_data(out, "hist"))
        hist_model.save(d / "hist.ckpt")
        write_history(d / "hist_history.csv", h2)
    else:
        model, history = bexp.train_sim_model(exp, sim)
    model.save(d / "sim.ckpt")
    write_history(d / "history.csv", history)
    return d


def retrain(exp, out, overwrite=False):
    stage1 = ReducedModel.load(require(Path(out) / "stage1" / "sim.ckpt"))
    hist = load_data(out, "hist")
    if isinstance(exp, pexp.PendulumExperiment):
        sim = load_data(out, "sim")
        d = stage_dir(out, "retrain", overwrite)
        model, trace = pexp.retrain_model(exp, stage1, hist, sim)
        model.save(d / "retrained.ckpt")
        write_json(d / "trace.json", {"exit_reason": trace.exit_reason, "n_iter": trace.n_iter,
                                      "records": [list(r) for r in trace.records]})
        return d
    d = stage_dir(out, "retrain", overwrite)
    ensemble = bexp.build_models(exp, stage1, hist, bexp.make_stopping_set(exp))
    save_ensemble(ensemble, d)
    return d


def identify_baseline(exp, out, overwrite=False):
    hist = load_data(out, "hist")
    d = stage_dir(out, "baselines", overwrite)
    failed = {}
    for order in getattr(exp, "ssm_orders", ()):
        try:
            save_linear_ssm(d / f"ssm_{order:02d}.ckpt", fit_linear_ssm(hist, order))
        except IdentificationError as exc:
            log.warning("ssm order %d failed: %s", order, exc)
            failed[order] = str(exc)
    write_json(d / "baselines.json", {"orders": list(getattr(exp, "ssm_orders", ())),
                                      "failed": failed})
    return d


def load_baselines(out):
    d = Path(out) / "baselines"
    return {int(p.stem.split("_")[1]): load_linear_ssm(p) for p in sorted(d.glob("ssm_*.ckpt"))}


# -- control -----------------------------------------------------------------------------

def energy_to_dict(m):
    return {"heating_w": m.heating_w.tolist(), "heating_b": float(m.heating_b),
            "cooling_w": m.cooling_w.tolist(), "cooling_b": float(m.cooling_b)}


def train_ppo(exp, out, overwrite=False, pendulum_ppo=None, seed=0):
    if isinstance(exp, pexp.PendulumExperiment):
        from ..experiments.pendulum_control import ppo_pendulum
        d = stage_dir(out, "ppo", overwrite)
        before, after, bundle = ppo_pendulum(seed, pendulum_ppo)
        bundle.save(d, "policy")
        write_json(d / "returns.json", {"untrained": before, "trained": after})
        return d
    hist = load_data(out, "hist")
    ensemble = load_ensemble(require(Path(out) / "retrain" / "ensemble.json"))
    d = stage_dir(out, "ppo", overwrite)
    energy_model = bexp.fit_energy(hist, load_hist_energy(out))
    write_json(d / "energy_model.json", energy_to_dict(energy_model))
    rooms = mini_building("real")
    local = bexp.train_local(exp, list(ensemble.train), hist, rooms)
    local.save(d / "local", "room")
    for tag, beta in bexp.global_variants(exp).items():
        bundle = bexp.train_global(exp, list(ensemble.train), hist, rooms, local.actors,
                                   energy_model, beta, tag)
        bundle.save(d / f"global_{tag}", "global")
    return d


# -- evaluation ------------------------------------------------------------------------------

def evaluate(exp, out, overwrite=False):
    out = Path(out)
    if isinstance(exp, pexp.PendulumExperiment):
        models = {"sim-only": ReducedModel.load(require(out / "stage1" / "sim.ckpt")),
                  "hist-only": ReducedModel.load(require(out / "stage1" / "hist.ckpt")),
                  "retrained": ReducedModel.load(require(out / "retrain" / "retrained.ckpt"))}
        episodes = split_episodes(load_data(out, "eval"))
        ssms = load_baselines(out)
        d = stage_dir(out, "evaluate", overwrite)
        rows = pexp.evaluate(exp, models, ssms, episodes)
        write_prediction_scatter(d / "metrics.csv", rows)
        checks = pexp.check_ordering(rows)
        write_json(d / "checks.json", checks)
        return d, checks
    ensemble = load_ensemble(require(out / "retrain" / "ensemble.json"))
    eval_data = load_data(out, "eval")
    ppo = out / "ppo"
    energy_model = EnergyModel(**json.loads(require(ppo / "energy_model.json").read_text()))
    n_rooms = eval_data.d_O
    local = [load_policy(require(ppo / "local" / f"room_{j}.ckpt")) for j in range(n_rooms)]
    controllers = bexp.baseline_controllers()
    for tag in bexp.global_variants(exp):
        glob = load_policy(require(ppo / f"global_{tag}" / "global_0.ckpt"))
        controllers.append(ControllerSpec(f"learned-{tag}", local, glob))
    held = {f"held-out-{k}": m for k, m in enumerate(ensemble.held_out)}
    d = stage_dir(out, "evaluate", overwrite)
    reports = bexp.evaluate_controllers(exp, controllers, held, eval_data, mini_building("real"),
                                        energy_model)
    write_report(d / "report.csv", reports)
    write_scatter(d / "scatter.csv", reports)
    checks = bexp.check_ordering(reports)
    write_json(d / "checks.json", checks)
    return d, checks


__all__ = ["simulate", "train_sim", "retrain", "identify_baseline", "train_ppo", "evaluate"]
