import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridid.exceptions import DomainError, ShapeError
from hybridid.rl import (DiscretePolicy, GaussianTanhPolicy, Learner, ObsNoise, PendulumEnv,
                         PersistentNoise, PpoConfig, RewardSpec, Rollout, ValueNet, compute_gae,
                         distributed_train, evaluate_policy, load_policy, obs_noise_step,
                         ppo_update, reward_global, reward_pendulum, reward_room, save_policy)
from hybridid.rl.distributed import load_value, save_value
from hybridid.sim.pendulum import PendulumState


# -- rewards -------------------------------------------------------------------------------

def test_room_reward_hand_values():
    assert reward_room(23.0, 0.0) == pytest.approx(1.0)
    # 1 - 0.1 * 16 - 0.01 * 4 - 1 * 1
    assert reward_room(27.0, 2.0) == pytest.approx(1 - 1.6 - 0.04 - 1.0)
    # 1 - 0.1 * 16 - 1 * 1.5^2
    assert reward_room(18.0, 0.0) == pytest.approx(1 - 2.5 - 2.25)


def test_global_reward_hand_value():
    spec = RewardSpec("global", beta_E=0.5)
    r = reward_global([24.0, 22.0], [23.0, 25.0], [23.0, 27.0], 1.0, 2.0, spec)
    # 1 - .5(1 + 1) - .5(0 + 4) - 1 - .5 * 3
    assert r == pytest.approx(1 - 1.0 - 2.0 - 1.0 - 1.5)


def test_global_reward_rejects_bad_inputs():
    with pytest.raises(DomainError):
        reward_global([23.0], [23.0, 23.0], [23.0], 0.0, 0.0)
    with pytest.raises(DomainError):
        reward_global([23.0, 23.0], [23.0, 23.0], [np.nan], 0.0, 0.0)
    with pytest.raises(DomainError):
        RewardSpec(alpha_T=-1.0)


def test_pendulum_reward_wraps_angle():
    assert reward_pendulum(PendulumState(0.0, 0.0), 0.0) == 1.0
    a = reward_pendulum(PendulumState(2 * np.pi + 0.5, 1.0), 2.0)
    assert a == pytest.approx(1 - 0.25 - 0.1 - 0.004)


# -- advantage estimation --------------------------------------------------------------------

def test_gae_single_step():
    adv, ret = compute_gae([1.0], [0.5], [False], 2.0, 0.9, 0.8)
    assert adv[0] == pytest.approx(1.0 + 0.9 * 2.0 - 0.5)
    assert ret[0] == pytest.approx(adv[0] + 0.5)


def test_gae_lambda_one_gives_discounted_return():
    rng = np.random.default_rng(0)
    r, v = rng.normal(size=6), rng.normal(size=6)
    adv, ret = compute_gae(r, v, np.zeros(6, bool), 0.7, 0.9, 1.0 - 1e-12)
    expected = sum(0.9 ** k * r[k] for k in range(6)) + 0.9 ** 6 * 0.7
    assert ret[0] == pytest.approx(expected, abs=1e-9)


def test_gae_no_bootstrap_across_done():
    adv, _ = compute_gae([1.0, 1.0], [0.0, 0.0], [True, False], 5.0, 0.9, 0.9)
    assert adv[0] == pytest.approx(1.0)
    assert adv[1] == pytest.approx(1.0 + 0.9 * 5.0)


def test_gae_per_agent_columns():
    rng = np.random.default_rng(1)
    r, v = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    dones = np.array([False, False, True, False, False])
    adv, _ = compute_gae(r, v, dones, np.ones(3), 0.95, 0.9)
    for j in range(3):
        a, _ = compute_gae(r[:, j], v[:, j], dones, 1.0, 0.95, 0.9)
        np.testing.assert_allclose(adv[:, j], a, atol=1e-14)


def test_gae_shape_mismatch():
    with pytest.raises(ShapeError):
        compute_gae([1.0, 2.0], [1.0], [False, False], 0.0, 0.9, 0.9)


# -- noise -------------------------------------------------------------------------------------

def test_persistent_noise_keeps_value_between_renewals():
    rng = np.random.default_rng(0)
    n = PersistentNoise(4, p_switch=0.3)
    n.reset(rng)
    for _ in range(200):
        before = n.n.copy()
        renewed = n.step(rng)
        if not renewed:
            assert np.array_equal(before, n.n)
    assert np.all((n.n > 0) & (n.n < 1))


def test_persistent_noise_validation():
    with pytest.raises(DomainError):
        PersistentNoise(1)
    with pytest.raises(DomainError):
        PersistentNoise(3, p_switch=0.0)


def test_gumbel_perturbation_is_negated():
    n = PersistentNoise(3)
    n.reset(np.random.default_rng(1))
    np.testing.assert_allclose(n.perturbation(True), -n.perturbation(False))


def test_obs_noise_off_outside_training():
    noise = ObsNoise(3)
    assert np.array_equal(obs_noise_step(noise, 1.0, np.random.default_rng(0), training=False),
                          np.zeros(3))
    with pytest.raises(DomainError):
        obs_noise_step(noise, 0.0, np.random.default_rng(0))
    with pytest.raises(DomainError):
        ObsNoise(2, rate=0.0)


# -- policies ------------------------------------------------------------------------------------

def test_gaussian_tanh_inverts_squash():
    pol = GaussianTanhPolicy.init(3, [-2.0], [2.0], rng=0)
    # a = 0 + 2 tanh(z) = 1 exactly when z = atanh(0.5)
    np.testing.assert_allclose(pol.squash(np.arctanh(0.5)), [1.0], atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(-30, 30), st.integers(0, 1000))
def test_gaussian_actions_inside_bounds(shift, seed):
    pol = GaussianTanhPolicy.init(2, [-1.0, 0.0], [1.0, 5.0], rng=0)
    pol.net.biases[-1][:2] = shift
    a, z, logp = pol.act(np.zeros(2), np.random.default_rng(seed))
    assert np.all(a > pol.low) and np.all(a < pol.high)
    assert np.isfinite(logp)
    assert logp == pytest.approx(pol.log_prob(np.zeros(2), z))


def test_gaussian_bounds_validation():
    with pytest.raises(DomainError):
        GaussianTanhPolicy.init(2, [1.0], [1.0])


def test_discrete_log_probs_normalized():
    pol = DiscretePolicy.init(4, 5, rng=0)
    lp = pol.log_probs(np.ones(4))
    assert np.exp(lp).sum() == pytest.approx(1.0)
    a, stored, logp = pol.act(np.ones(4), np.random.default_rng(0),
                              pol.new_explore(np.random.default_rng(1)))
    assert 0 <= a < 5 and logp == pytest.approx(lp[a])


@pytest.mark.parametrize("kind", ["discrete", "continuous"])
def test_surrogate_gradient_matches_finite_difference(kind):
    rng = np.random.default_rng(0)
    obs = rng.normal(size=(8, 3))
    if kind == "discrete":
        pol = DiscretePolicy.init(3, 4, hidden=(5,), rng=1)
        acts = rng.integers(0, 4, size=8)
        logp_old = pol.log_probs(obs)[np.arange(8), acts] + rng.normal(0, 0.05, 8)
    else:
        pol = GaussianTanhPolicy.init(3, [-1.0], [1.0], hidden=(5,), rng=1)
        acts = rng.normal(size=(8, 1))
        logp_old = pol.log_prob(obs, acts) + rng.normal(0, 0.05, 8)
    adv = rng.normal(size=8)
    _, _, grads = pol.surrogate_grads(obs, acts, logp_old, adv, 0.2, c2=0.01)
    params = pol.params()
    key = "0.W"
    W = params[key]
    eps = 1e-6
    for idx in [(0, 0), (1, 2), (2, 4)]:
        old = W[idx]
        W[idx] = old + eps
        lp, _, _ = pol.surrogate_grads(obs, acts, logp_old, adv, 0.2, c2=0.01)
        W[idx] = old - eps
        lm, _, _ = pol.surrogate_grads(obs, acts, logp_old, adv, 0.2, c2=0.01)
        W[idx] = old
        assert grads[key][idx] == pytest.approx((lp - lm) / (2 * eps), rel=1e-4, abs=1e-9)


def test_policy_checkpoint_round_trip(tmp_path):
    for pol in (DiscretePolicy.init(3, 4, rng=0), GaussianTanhPolicy.init(3, [-2.0], [2.0], rng=0)):
        save_policy(tmp_path / "p.ckpt", pol)
        back = load_policy(tmp_path / "p.ckpt")
        obs = np.linspace(-1, 1, 3)
        assert np.array_equal(np.asarray(back.deterministic(obs)),
                              np.asarray(pol.deterministic(obs)))
    v = ValueNet.init(3, rng=0)
    save_value(tmp_path / "v.ckpt", v)
    assert load_value(tmp_path / "v.ckpt")(np.ones(3)) == v(np.ones(3))


# -- PPO -----------------------------------------------------------------------------------------

def make_rollout(pol, n=64, seed=0, adv=None):
    rng = np.random.default_rng(seed)
    obs = rng.normal(size=(n, 3))
    a, z, logp = pol.act(obs, rng)
    adv = rng.normal(size=n) if adv is None else adv
    return Rollout(obs, z, logp, adv, rng.normal(size=n))


def test_first_ratio_is_one():
    pol = GaussianTanhPolicy.init(3, [-1.0], [1.0], rng=0)
    learner = Learner(pol, ValueNet.init(3, rng=0), 1e-3)
    stats = ppo_update(learner, make_rollout(pol), PpoConfig(n_updates=3, minibatch_size=64),
                       np.random.default_rng(0))
    assert stats["first_ratio"] == pytest.approx(1.0, abs=1e-12)


def test_zero_advantages_leave_actor_unchanged():
    pol = GaussianTanhPolicy.init(3, [-1.0], [1.0], rng=0)
    before = {k: v.copy() for k, v in pol.params().items()}
    learner = Learner(pol, ValueNet.init(3, rng=0), 1e-3)
    ppo_update(learner, make_rollout(pol, adv=np.zeros(64)),
               PpoConfig(n_updates=5, minibatch_size=32), np.random.default_rng(0))
    for k, v in pol.params().items():
        assert np.array_equal(v, before[k])


def test_clip_fraction_grows_with_learning_rate():
    fracs = []
    for lr in (1e-5, 1e-2):
        pol = GaussianTanhPolicy.init(3, [-1.0], [1.0], rng=0)
        learner = Learner(pol, ValueNet.init(3, rng=0), lr)
        stats = ppo_update(learner, make_rollout(pol, n=256),
                           PpoConfig(lr=lr, n_updates=20, minibatch_size=128, clip=0.1),
                           np.random.default_rng(0))
        fracs.append(stats["clip_fraction"])
    assert fracs[0] < fracs[1]


def test_ppo_config_validation():
    with pytest.raises(DomainError):
        PpoConfig(clip=0.0)
    with pytest.raises(DomainError):
        PpoConfig(minibatch_size=10, rollout_length=2, n_workers=1)


def small_train(n_workers, seed):
    cfg = PpoConfig(rollout_length=40, minibatch_size=20, n_updates=3, n_workers=n_workers,
                    n_iterations=2)
    envs = [PendulumEnv(episode_length=30) for _ in range(n_workers)]
    actor = GaussianTanhPolicy.init(3, [-2.0], [2.0], hidden=(8,), rng=0)
    critic = ValueNet.init(3, hidden=(8,), rng=0)
    return distributed_train(envs, [actor], [critic], cfg, seed=seed)


def test_distributed_training_is_deterministic():
    a, b = small_train(2, 5), small_train(2, 5)
    for k, v in a.actors[0].params().items():
        assert np.array_equal(v, b.actors[0].params()[k])
    assert len(a.curve) == 2


def test_single_worker_runs():
    bundle = small_train(1, 0)
    r = evaluate_policy(PendulumEnv(episode_length=10), bundle.actors,
                        initial_states=[PendulumState(0.1, 0.0)])
    assert np.isfinite(r)


def test_distributed_requires_matching_worker_count():
    cfg = PpoConfig(rollout_length=10, minibatch_size=5, n_workers=2)
    with pytest.raises(ValueError):
        distributed_train([PendulumEnv()], [], [], cfg)


def test_building_env_runs_from_last_day_start():
    from hybridid.experiments.building import BuildingExperiment, make_real_data
    from hybridid.rl import BuildingModelEnv
    from hybridid.sim.building import mini_building
    from hybridid.sysid import ReducedModel

    hist, _ = make_real_data(BuildingExperiment(), 3, 90, "history")
    model = ReducedModel.init(hist.d_I, hist.d_E, hist.d_O, 8, (8,), 6, 12, rng=0)
    env = BuildingModelEnv(model, hist, mini_building("real"), role="eval", obs_noise=False,
                           training=False, episode_length=144)
    assert env.day_starts[-1] + 144 < len(hist)
    env.reset(np.random.default_rng(0), state=env.day_starts[-1])
    done = False
    while not done:
        _, r, done, _ = env.step([])
    assert len(env.log["t_room"]) == 144
