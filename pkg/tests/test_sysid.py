import numpy as np
import pytest

from hybridid.exceptions import DomainError, IdentificationError, PartialResultError, ShapeError
from hybridid.nn.lstm import lstm_step
from hybridid.nn.mlp import mlp_forward
from hybridid.sim.dataset import EpisodeDataset
from hybridid.sysid.ensemble import (EnsembleSpec, build_ensemble, load_ensemble,
                                     save_ensemble)
from hybridid.sysid.linear_ssm import LinearSSM, load_linear_ssm, save_linear_ssm
from hybridid.sysid.reduced_model import ReducedModel, same_weights
from hybridid.sysid.retrain import (EXIT_BUDGET, EXIT_DRIFT, RetrainConfig, StoppingSet,
                                    discrepancy, retrain_fine, retrain_full)
from hybridid.sysid.training import LengthVariation, train_stage1


def tiny_model(seed=0, n=4, l=6):
    return ReducedModel.init(1, 1, 2, hidden_dim=6, mlp_sizes=(5,), encode_length=n,
                             decode_length=l, rng=seed)


def tiny_data(seed=0, n_rows=400):
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1, 1, (n_rows, 1))
    e = np.sin(np.arange(n_rows) / 10.0)[:, None]
    o = np.cumsum(0.1 * (u - 0.05 * np.arange(n_rows)[:, None] % 1), axis=0)
    o = np.concatenate([np.tanh(o), 0.5 * e + 0.1 * u], axis=1)
    return EpisodeDataset(u, e, o)


def tiny_stopping_set(model, seed=1):
    rng = np.random.default_rng(seed)
    L = 8
    envs = [rng.normal(size=(L, 1)) for _ in range(2)]
    cmds = [rng.uniform(-1, 1, (L, 1)) for _ in range(3)]
    return StoppingSet(envs, cmds, rng.normal(size=(model.encode_length, model.d)))


# -- reduced model ------------------------------------------------------------------------

def test_single_step_composition():
    m = tiny_model()
    rng = np.random.default_rng(3)
    window = rng.normal(size=(1, m.d))
    xs = rng.normal(size=(1, m.d_sharp))
    z = np.zeros(m.hidden_dim)
    c, h = lstm_step(m.encoder, window[0], z, z)
    c, h = lstm_step(m.decoder, xs[0], c, h)
    np.testing.assert_allclose(m.predict(window, xs)[0], mlp_forward(m.head, h), atol=1e-12)


def test_decode_ignores_future_observations():
    # the decoder sees only commands and exogenous inputs
    m = tiny_model()
    rng = np.random.default_rng(4)
    window = rng.normal(size=(m.encode_length, m.d))
    xs = rng.normal(size=(m.decode_length, m.d_sharp))
    a = m.predict(window, xs)
    b = m.predict(window, xs.copy())
    assert np.array_equal(a, b)
    with pytest.raises(ShapeError):
        m.decode(m.encode(window), rng.normal(size=(5, m.d)))


def test_batched_matches_single():
    m = tiny_model()
    rng = np.random.default_rng(5)
    win = rng.normal(size=(m.encode_length, 3, m.d))
    xs = rng.normal(size=(7, 3, m.d_sharp))
    out = m.predict(win, xs)
    for b in range(3):
        np.testing.assert_allclose(out[:, b], m.predict(win[:, b], xs[:, b]), atol=1e-12)


def test_shape_validation():
    m = tiny_model()
    with pytest.raises(ShapeError):
        m.encode(np.zeros((4, m.d + 1)))
    with pytest.raises(ShapeError):
        ReducedModel(m.encoder, m.encoder, m.head, 1, 1, 2)


def test_checkpoint_round_trip(tmp_path):
    m = tiny_model()
    m.set_normalizer(np.arange(4.0), np.ones(4) * 2, np.ones(2), np.ones(2) * 3)
    m.save(tmp_path / "m.ckpt")
    back = ReducedModel.load(tmp_path / "m.ckpt")
    assert same_weights(m, back)
    win, xs = np.ones((4, 4)), np.ones((6, 2))
    assert np.array_equal(m.predict(win, xs), back.predict(win, xs))


def test_stage1_deterministic_and_learns():
    data = tiny_data()
    var = LengthVariation(0.0, 1.0, 1.0)
    a, hist_a = train_stage1(tiny_model(), data, 60, batch_size=8, lr=1e-2, variation=var,
                             seed=7, eval_every=20)
    b, hist_b = train_stage1(tiny_model(), data, 60, batch_size=8, lr=1e-2, variation=var,
                             seed=7, eval_every=20)
    assert same_weights(a, b)
    assert hist_a == hist_b
    assert hist_a[-1][2] < hist_a[0][2]


def test_stage1_rejects_short_episodes():
    with pytest.raises(DomainError):
        train_stage1(tiny_model(n=50, l=400), tiny_data(), 1)


# -- discrepancy and retraining ---------------------------------------------------------------

def test_discrepancy_hand_value():
    a = tiny_model()
    b = a.copy()
    b.head.biases[-1][0] += 0.3
    ss = tiny_stopping_set(a)
    assert discrepancy(a, b, ss) == pytest.approx(0.15, abs=1e-12)
    assert discrepancy(b, a, ss) == pytest.approx(0.15, abs=1e-12)
    assert discrepancy(a, a, ss) == 0.0


def test_stopping_set_validation():
    with pytest.raises(DomainError):
        StoppingSet([], [np.zeros((3, 1))], np.zeros((2, 4)))
    with pytest.raises(ShapeError):
        StoppingSet([np.zeros((3, 1))], [np.zeros((4, 1))], np.zeros((2, 4)))


def test_retrain_config_validation():
    with pytest.raises(DomainError):
        RetrainConfig(algorithm="other")
    with pytest.raises(DomainError):
        RetrainConfig(n_max=100, p_eval=11)
    with pytest.raises(DomainError):
        RetrainConfig(delta_max=-1)


def test_zero_delta_max_stops_at_first_evaluation():
    m = tiny_model()
    cfg = RetrainConfig("full", delta_max=0.0, n_max=50, p_eval=5, batch_size=4, lr=1e-2)
    new, trace = retrain_full(m, tiny_data(), cfg, tiny_stopping_set(m))
    assert trace.exit_reason == EXIT_DRIFT
    assert trace.n_iter == 5 and len(trace.records) == 1
    assert trace.satisfies_stopping_rule()


def test_zero_budget_returns_unchanged_copy():
    m = tiny_model()
    for algo in ("full", "fine"):
        cfg = RetrainConfig(algo, n_max=0, p_eval=1)
        fn = retrain_full if algo == "full" else retrain_fine
        new, trace = fn(m, tiny_data(), cfg, tiny_stopping_set(m))
        assert same_weights(new, m) and new is not m
        assert trace.exit_reason == EXIT_BUDGET and trace.final_delta == 0.0


def test_fine_retraining_touches_only_the_head():
    m = tiny_model()
    cfg = RetrainConfig("fine", delta_max=10.0, n_max=20, p_eval=2, batch_size=4)
    new, trace = retrain_fine(m, tiny_data(), cfg, tiny_stopping_set(m))
    assert np.array_equal(new.encoder.W, m.encoder.W) and np.array_equal(new.encoder.b, m.encoder.b)
    assert np.array_equal(new.decoder.W, m.decoder.W) and np.array_equal(new.decoder.b, m.decoder.b)
    assert not np.array_equal(new.head.weights[-1], m.head.weights[-1])
    assert trace.layers_visited == [1, 0]
    assert trace.satisfies_stopping_rule()


def test_fine_single_layer_head():
    m = ReducedModel.init(1, 1, 2, hidden_dim=4, mlp_sizes=(), encode_length=3,
                          decode_length=4, rng=0)
    cfg = RetrainConfig("fine", delta_max=10.0, n_max=10, p_eval=1, batch_size=4)
    new, trace = retrain_fine(m, tiny_data(), cfg, tiny_stopping_set(m))
    assert trace.layers_visited == [0]
    assert trace.n_iter == 10


def test_retrain_rejects_empty_history():
    m = tiny_model()
    empty = EpisodeDataset(np.zeros((0, 1)), np.zeros((0, 1)), np.zeros((0, 2)))
    with pytest.raises(DomainError):
        retrain_full(m, empty, RetrainConfig(n_max=10, p_eval=1), tiny_stopping_set(m))


def test_retrain_full_deterministic():
    m = tiny_model()
    cfg = RetrainConfig("full", delta_max=10.0, n_max=10, p_eval=1, batch_size=4, lr=1e-2)
    a, ta = retrain_full(m, tiny_data(), cfg, tiny_stopping_set(m))
    b, tb = retrain_full(m, tiny_data(), cfg, tiny_stopping_set(m))
    assert same_weights(a, b) and ta.records == tb.records


# -- ensemble ---------------------------------------------------------------------------------

def test_ensemble_round_trip(tmp_path):
    m = tiny_model()
    cfgs = tuple(RetrainConfig(algo, delta_max=10.0, n_max=4, p_eval=1, batch_size=4, seed=k)
                 for k, algo in enumerate(("full", "fine", "full")))
    ens = build_ensemble(m, tiny_data(), EnsembleSpec(cfgs, n_held_out=1), tiny_stopping_set(m))
    assert len(ens.train) == 2 and len(ens.held_out) == 1
    path = save_ensemble(ens, tmp_path)
    back = load_ensemble(path)
    assert back.members == [dict(e, checkpoint=f"member_{e['index']:03d}.ckpt")
                            for e in ens.members]
    for x, y in zip(ens.train + ens.held_out, back.train + back.held_out):
        assert same_weights(x, y)


def test_ensemble_reports_all_failures():
    m = tiny_model()
    empty = EpisodeDataset(np.zeros((0, 1)), np.zeros((0, 1)), np.zeros((0, 2)))
    cfgs = (RetrainConfig(n_max=2, p_eval=1), RetrainConfig(n_max=2, p_eval=1))
    with pytest.raises(PartialResultError) as info:
        build_ensemble(m, empty, EnsembleSpec(cfgs, 1), tiny_stopping_set(m))
    assert "#0" in str(info.value) and "#1" in str(info.value)


def test_ensemble_spec_validation():
    with pytest.raises(DomainError):
        EnsembleSpec((RetrainConfig(),), n_held_out=1)


# -- linear state-space baseline -----------------------------------------------------------------

def known_system(N=600, seed=0):
    A = np.array([[0.8, 0.2], [-0.2, 0.7]])
    B = np.array([[1.0], [0.5]])
    C = np.array([[1.0, 0.0]])
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(N, 1))
    s = np.zeros(2)
    y = np.empty((N, 1))
    for t in range(N):
        y[t] = C @ s + 0.1 * u[t] + 0.3
        s = A @ s + B @ u[t]
    return u, y


def test_ssm_recovers_its_own_system():
    u, y = known_system()
    model = LinearSSM(order=2).fit(u[:500], y[:500])
    pred = model.predict(u[500:], warm_u=u[480:500], warm_y=y[480:500])
    assert np.max(np.abs(pred - y[500:])) < 1e-6
    assert model.spectral_radius_ < 1


def test_ssm_round_trip(tmp_path):
    u, y = known_system()
    model = LinearSSM(order=2).fit(u, y)
    save_linear_ssm(tmp_path / "s.ckpt", model)
    back = load_linear_ssm(tmp_path / "s.ckpt")
    a = model.predict(u[:50], warm_u=u[-20:], warm_y=y[-20:])
    for k in ("A", "B", "C", "D", "s_off", "y_off"):
        assert np.array_equal(getattr(model.matrices_, k), getattr(back.matrices_, k))
    # memory layout may change the BLAS summation order
    np.testing.assert_allclose(back.predict(u[:50], warm_u=u[-20:], warm_y=y[-20:]), a,
                               rtol=1e-12, atol=1e-12)


def test_ssm_too_little_data():
    with pytest.raises(IdentificationError):
        LinearSSM(order=2).fit(np.zeros((10, 1)), np.zeros((10, 1)))
    with pytest.raises(IdentificationError):
        LinearSSM(order=2).fit(np.zeros((0, 1)), np.zeros((0, 1)))


def test_ssm_constant_output():
    u = np.random.default_rng(0).normal(size=(300, 1))
    model = LinearSSM(order=3).fit(u, np.full((300, 1), 2.0))
    np.testing.assert_allclose(model.predict(u[:20]), 2.0)


def test_ssm_order_bounds():
    u, y = known_system()
    with pytest.raises(DomainError):
        LinearSSM(order=11).fit(u, y)
