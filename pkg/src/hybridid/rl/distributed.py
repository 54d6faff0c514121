"""Synchronous actor pool: workers roll out, a central learner updates, weights
are broadcast back before the next iteration.

Workers run in a fixed order inside one process, so a master seed fixes the
whole learning curve. Each worker owns one environment (a distinct reduced
model and/or weather seed), its own random stream and exploration state.
"""
import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exceptions import WorkerError
from ..nn import checkpoint
from ..nn.mlp import MlpParams
from .gae import compute_gae
from .policies import DiscretePolicy, GaussianTanhPolicy, ValueNet
from .ppo import Learner, Rollout, ppo_update

log = logging.getLogger(__name__)

CURVE_COLUMNS = ("iteration", "mean_episode_reward", "mean_step_reward", "surrogate_loss",
                 "value_loss", "clip_fraction", "entropy")


class Worker:
    def __init__(self, index, env, actors, critics, seed_seq):
        self.index = index
        self.env = env
        self.rng = np.random.default_rng(seed_seq)
        self.sync(actors, critics)
        self.explore = [a.new_explore(self.rng) for a in self.actors]
        self.obs = env.reset(self.rng)
        self.episode_return = 0.0
        self.finished = []

    def sync(self, actors, critics):
        self.actors = [a.copy() for a in actors]
        self.critics = [c.copy() for c in critics]

    def rollout(self, T):
        n = len(self.actors)
        obs = [[] for _ in range(n)]
        acts = [[] for _ in range(n)]
        logps = np.empty((T, n))
        values = np.empty((T, n))
        rewards = np.empty((T, n))
        dones = np.zeros(T, dtype=bool)
        self.finished = []
        for t in range(T):
            actions = []
            for j, (actor, critic) in enumerate(zip(self.actors, self.critics)):
                o = self.obs[j]
                a, stored, lp = actor.act(o, self.rng, self.explore[j])
                obs[j].append(o)
                acts[j].append(stored)
                logps[t, j] = lp
                values[t, j] = critic(o)
                actions.append(a)
            self.obs, r, done, _ = self.env.step(actions)
            rewards[t] = r
            self.episode_return += float(np.mean(r))
            if done:
                dones[t] = True
                self.finished.append(self.episode_return)
                self.episode_return = 0.0
                self.obs = self.env.reset(self.rng)
        last = np.array([c(self.obs[j]) for j, c in enumerate(self.critics)])
        return obs, acts, logps, values, rewards, dones, last


@dataclass
class PolicyBundle:
    actors: list
    critics: list
    curve: list = field(default_factory=list)
    config: object = None

    def save(self, directory, prefix="policy"):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for j, actor in enumerate(self.actors):
            p = directory / f"{prefix}_{j}.ckpt"
            save_policy(p, actor)
            save_value(directory / f"{prefix}_{j}_value.ckpt", self.critics[j])
            paths.append(p)
        write_curve(directory / f"{prefix}_curve.csv", self.curve)
        return paths


def write_curve(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CURVE_COLUMNS)
        for r in rows:
            w.writerow([r[c] if c == "iteration" else repr(float(r[c])) for c in CURVE_COLUMNS])


def _net_blocks(net):
    blocks = {k: v for k, v in net.named("net.").items()}
    meta = {"layer_sizes": list(net.layer_sizes), "hidden_activation": net.hidden_activation}
    return blocks, meta


def _net_from_blocks(blocks, meta):
    n = len(meta["layer_sizes"]) - 1
    return MlpParams([blocks[f"net.{k}.W"] for k in range(n)],
                     [blocks[f"net.{k}.b"] for k in range(n)], meta["hidden_activation"])


def save_policy(path, policy):
    blocks, meta = _net_blocks(policy.net)
    if policy.kind == "continuous":
        meta.update(kind="policy-continuous", low=policy.low.tolist(), high=policy.high.tolist(),
                    min_std=policy.min_std)
    else:
        meta.update(kind="policy-discrete", k=policy.k, p_switch=policy.p_switch,
                    gumbel=policy.gumbel)
    checkpoint.save(path, blocks, meta)


def load_policy(path):
    blocks, meta = checkpoint.load(path)
    net = _net_from_blocks(blocks, meta)
    if meta["kind"] == "policy-continuous":
        return GaussianTanhPolicy(net, meta["low"], meta["high"], meta["min_std"])
    return DiscretePolicy(net, meta["p_switch"], meta["gumbel"])


def save_value(path, value):
    blocks, meta = _net_blocks(value.net)
    meta["kind"] = "value"
    checkpoint.save(path, blocks, meta)


def load_value(path):
    return ValueNet(_net_from_blocks(*checkpoint.load(path)))


def distributed_train(envs, actors, critics, cfg, seed=0, callback=None):
    """Train one actor/critic pair per agent over the worker environments.

    ``envs`` holds one environment per worker (``len(envs)`` must equal
    ``cfg.n_workers``). Returns a :class:`PolicyBundle` holding the central
    networks and the learning curve.
    """
    if len(envs) != cfg.n_workers:
        raise ValueError(f"expected {cfg.n_workers} environments, got {len(envs)}")
    seeds = np.random.SeedSequence(seed).spawn(cfg.n_workers + 1)
    learners = [Learner(a, c, cfg.lr) for a, c in zip(actors, critics)]
    workers = [Worker(k, env, actors, critics, seeds[k]) for k, env in enumerate(envs)]
    central_rng = np.random.default_rng(seeds[-1])
    curve = []
    for it in range(1, cfg.n_iterations + 1):
        gathered = [[] for _ in actors]
        finished, step_rewards = [], []
        for w in workers:
            try:
                obs, acts, logps, values, rewards, dones, last = w.rollout(cfg.rollout_length)
            except Exception as exc:
                raise WorkerError(f"worker {w.index} failed in iteration {it}: {exc}") from exc
            adv, ret = compute_gae(rewards, values, dones, last, cfg.gamma, cfg.lam)
            for j in range(len(actors)):
                gathered[j].append((np.asarray(obs[j]), np.asarray(acts[j]), logps[:, j],
                                    adv[:, j], ret[:, j]))
            finished.extend(w.finished)
            step_rewards.append(rewards.mean())
        stats = []
        for j, learner in enumerate(learners):
            parts = list(zip(*gathered[j]))
            roll = Rollout(*(np.concatenate(p) for p in parts))
            stats.append(ppo_update(learner, roll, cfg, central_rng))
        for w in workers:
            w.sync([l.actor for l in learners], [l.critic for l in learners])
        row = {"iteration": it,
               "mean_episode_reward": float(np.mean(finished)) if finished else float("nan"),
               "mean_step_reward": float(np.mean(step_rewards))}
        for key in ("surrogate_loss", "value_loss", "clip_fraction", "entropy"):
            row[key] = float(np.mean([s[key] for s in stats]))
        curve.append(row)
        log.debug("iteration %d: %s", it, row)
        if callback is not None:
            callback(it, row, workers)
    return PolicyBundle([l.actor for l in learners], [l.critic for l in learners], curve, cfg)


def evaluate_policy(env, actors, n_episodes=None, initial_states=None, rng=None,
                    deterministic=True):
    """Mean episodic (agent-averaged) reward.

    Pass ``initial_states`` for fixed starting points (the environment's
    ``reset`` must accept ``state=``); otherwise ``n_episodes`` random starts.
    """
    rng = np.random.default_rng(rng)
    starts = initial_states if initial_states is not None else [None] * n_episodes
    explore = [a.new_explore(rng) for a in actors]
    totals = []
    for s0 in starts:
        obs = env.reset(rng, state=s0) if s0 is not None else env.reset(rng)
        total, done = 0.0, False
        while not done:
            if deterministic:
                actions = [a.deterministic(o) for a, o in zip(actors, obs)]
            else:
                actions = [a.act(o, rng, e)[0] for a, o, e in zip(actors, obs, explore)]
            obs, r, done, _ = env.step(actions)
            total += float(np.mean(r))
        totals.append(total)
    return float(np.mean(totals))


def bundle_metadata(bundle):
    return json.dumps({"n_agents": len(bundle.actors), "iterations": len(bundle.curve)})
