"""PPO sanity run: stabilize the true pendulum at rest."""
import numpy as np

from .._seeding import stage_seed
from ..rl.distributed import distributed_train, evaluate_policy
from ..rl.envs import PendulumEnv
from ..rl.policies import GaussianTanhPolicy, ValueNet
from ..rl.ppo import PpoConfig
from ..sim.pendulum import PendulumState


def eval_states(n=20, init_range=1.0, seed=12345):
    """Fixed starting states shared by every seed and by trained/untrained policies."""
    rng = np.random.default_rng(seed)
    return [PendulumState(float(a), float(b)) for a, b in
            rng.uniform(-init_range, init_range, size=(n, 2))]


def ppo_pendulum(seed, cfg=PpoConfig(n_workers=4, n_iterations=150), n_eval=20, callback=None):
    """Train one seed; returns ``(untrained_return, trained_return, bundle)``.

    Returns are mean episodic rewards of the deterministic policy from
    :func:`eval_states`.
    """
    rng = np.random.default_rng(stage_seed(seed, "init-ppo-pendulum"))
    env0 = PendulumEnv()
    low, high = env0.action_bounds
    actor = GaussianTanhPolicy.init(3, [low], [high], rng=rng)
    critic = ValueNet.init(3, rng=rng)
    states = eval_states(n_eval, env0.init_range)
    before = evaluate_policy(PendulumEnv(), [actor], initial_states=states)
    envs = [PendulumEnv() for _ in range(cfg.n_workers)]
    bundle = distributed_train(envs, [actor], [critic], cfg,
                               seed=stage_seed(seed, "ppo-pendulum"), callback=callback)
    after = evaluate_policy(PendulumEnv(), bundle.actors, initial_states=states)
    return before, after, bundle


def sanity_check(before, after, factor=5.0):
    """Trained mean exceeds untrained mean by ``factor`` across-seed standard deviations."""
    before, after = np.asarray(before, dtype=float), np.asarray(after, dtype=float)
    spread = float(np.std(after, ddof=1)) if len(after) > 1 else 0.0
    gain = float(after.mean() - before.mean())
    return gain >= factor * spread, gain, spread
