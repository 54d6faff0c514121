"""PPO with persistent-noise exploration and distributed rollouts."""
from .building_env import BuildingModelEnv
from .distributed import (PolicyBundle, distributed_train, evaluate_policy, load_policy,
                          load_value, save_policy, save_value, write_curve)
from .envs import PendulumEnv
from .gae import compute_gae
from .noise import ObsNoise, PersistentNoise, obs_noise_step
from .policies import (DiscretePolicy, GaussianTanhPolicy, ValueNet, deterministic_continuous,
                       sample_continuous, sample_discrete)
from .ppo import Learner, PpoConfig, Rollout, ppo_update
from .rewards import RewardSpec, reward_global, reward_pendulum, reward_room

__all__ = [
    "BuildingModelEnv", "PolicyBundle", "distributed_train", "evaluate_policy", "load_policy",
    "load_value", "save_policy", "save_value", "write_curve", "PendulumEnv", "compute_gae", "ObsNoise",
    "PersistentNoise", "obs_noise_step", "DiscretePolicy", "GaussianTanhPolicy", "ValueNet",
    "deterministic_continuous", "sample_continuous", "sample_discrete", "Learner", "PpoConfig",
    "Rollout", "ppo_update", "RewardSpec", "reward_global", "reward_pendulum", "reward_room",
]
