import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridid.exceptions import DomainError, ShapeError
from hybridid.nn import checkpoint
from hybridid.nn.losses import loss, loss_and_grad
from hybridid.nn.lstm import LstmParams, lstm_forward, lstm_step
from hybridid.nn.mlp import MlpParams, mlp_forward
from hybridid.nn.optim import (AdamState, LrSchedule, adam_update, clip_grad_norm, global_norm,
                               lr_at)


# -- lstm ---------------------------------------------------------------------------

def test_zero_params_zero_state_stays_zero():
    p = LstmParams.zeros(3, 4)
    c, h = lstm_step(p, np.array([1.0, -2.0, 0.5]), np.zeros(4), np.zeros(4))
    assert np.all(c == 0) and np.all(h == 0)


def test_zero_params_halves_cell_state():
    p = LstmParams.zeros(2, 3)
    c, h = lstm_step(p, np.array([0.3, 0.7]), np.ones(3), np.zeros(3))
    np.testing.assert_allclose(c, 0.5)
    np.testing.assert_allclose(h, 0.5 * np.tanh(0.5), rtol=1e-12)
    assert abs(h[0] - 0.2311) < 1e-4


def test_lstm_step_is_pure(rng):
    p = LstmParams.init(3, 5, rng)
    x, c, h = rng.normal(size=3), rng.normal(size=5), rng.normal(size=5)
    a = lstm_step(p, x, c, h)
    b = lstm_step(p, x, c, h)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_forward_matches_step_composition(rng):
    p = LstmParams.init(2, 4, rng)
    xs = rng.normal(size=(3, 1, 2))
    hs, (cT, hT), _ = lstm_forward(p, xs, np.zeros((1, 4)), np.zeros((1, 4)))
    c, h = np.zeros(4), np.zeros(4)
    for t in range(3):
        c, h = lstm_step(p, xs[t, 0], c, h)
        np.testing.assert_allclose(hs[t, 0], h, atol=1e-14)
    np.testing.assert_allclose(cT[0], c, atol=1e-14)


def test_lstm_rejects_wrong_width(rng):
    p = LstmParams.init(3, 4, rng)
    with pytest.raises(ShapeError):
        lstm_step(p, np.zeros(2), np.zeros(4), np.zeros(4))


# -- mlp ----------------------------------------------------------------------------

def test_zero_weights_output_bias():
    net = MlpParams([np.zeros((3, 4)), np.zeros((4, 2))], [np.zeros(4), np.array([0.5, -1.0])])
    np.testing.assert_array_equal(mlp_forward(net, np.ones(3)), [0.5, -1.0])


def test_single_identity_layer():
    net = MlpParams([np.eye(3)], [np.zeros(3)])
    x = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(mlp_forward(net, x), x)


def test_two_layer_hand_value():
    # relu([1, -1] @ [[1, 2], [3, -1]] + [0, 0]) = relu([-2, 3]) = [0, 3]; [0, 3] @ [1, 2]^T + 1 = 7
    net = MlpParams([np.array([[1.0, 2.0], [3.0, -1.0]]), np.array([[1.0], [2.0]])],
                    [np.zeros(2), np.array([1.0])])
    np.testing.assert_allclose(mlp_forward(net, np.array([1.0, -1.0])), [7.0])


def test_mlp_shape_mismatch_rejected():
    with pytest.raises(ShapeError):
        MlpParams([np.zeros((3, 4)), np.zeros((5, 2))], [np.zeros(4), np.zeros(2)])


# -- losses -------------------------------------------------------------------------

def test_losses_hand_values():
    t = np.zeros((2, 1, 2))
    assert loss("squared", t, t) == 0.0
    assert loss("squared", t + 1, t) == 1.0 and loss("l1", t + 1, t) == 1.0
    p = np.array([[1.0], [3.0]])
    q = np.array([[0.0], [1.0]])
    assert loss("squared", p, q) == pytest.approx((1 + 4) / 2)
    assert loss("l1", p, q) == pytest.approx(1.5)


def test_loss_gradient_is_exact_derivative(rng):
    p, q = rng.normal(size=(4, 3)), rng.normal(size=(4, 3))
    _, g = loss_and_grad("squared", p, q)
    e = np.zeros_like(p)
    e[1, 2] = 1e-6
    fd = (loss("squared", p + e, q) - loss("squared", p - e, q)) / 2e-6
    assert g[1, 2] == pytest.approx(fd, rel=1e-6)


def test_loss_rejects_bad_input():
    with pytest.raises(ShapeError):
        loss("squared", np.zeros(3), np.zeros(4))
    with pytest.raises(DomainError):
        loss("huber", np.zeros(3), np.zeros(3))


# -- optimizer ----------------------------------------------------------------------

def test_clip_leaves_small_gradients():
    g = {"a": np.array([0.3, 0.4])}
    assert np.array_equal(clip_grad_norm(g, 1.0)["a"], g["a"])


def test_clip_scales_large_gradients():
    g = {"a": np.array([6.0, 8.0])}
    np.testing.assert_allclose(clip_grad_norm(g, 1.0)["a"], [0.6, 0.8])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=20), st.floats(1e-3, 10.0))
def test_clip_bound_property(values, max_norm):
    g = clip_grad_norm({"w": np.array(values)}, max_norm)
    assert global_norm(g) <= max_norm * (1 + 1e-12)


def test_adam_zero_gradient_keeps_params():
    params = {"w": np.array([1.0, 2.0])}
    st_ = AdamState.for_params(params)
    adam_update(st_, params, {"w": np.zeros(2)})
    np.testing.assert_array_equal(params["w"], [1.0, 2.0])


def test_adam_first_step_is_sign_step():
    params = {"w": np.array([0.0, 0.0])}
    st_ = AdamState.for_params(params, lr=0.01)
    adam_update(st_, params, {"w": np.array([3.0, -0.2])})
    np.testing.assert_allclose(params["w"], [-0.01, 0.01], rtol=1e-6)


def test_adam_symmetry():
    params = {"a": np.array([1.0]), "b": np.array([1.0])}
    st_ = AdamState.for_params(params)
    for _ in range(3):
        adam_update(st_, params, {"a": np.array([0.5]), "b": np.array([0.5])})
    assert params["a"][0] == params["b"][0]


def test_slanted_triangular_values():
    s = LrSchedule("slanted-triangular", eta_max=0.1, cut_frac=0.1, ratio=40.0, T=1000)
    assert lr_at(s, s.cut) == pytest.approx(0.1)
    assert lr_at(s, 0) == pytest.approx(0.0025)
    assert lr_at(s, 1000) == pytest.approx(0.0025)
    with pytest.raises(DomainError):
        lr_at(s, 1001)


# -- checkpoint ---------------------------------------------------------------------

def test_checkpoint_roundtrip_bitwise(tmp_path, rng):
    blocks = {"W": rng.normal(size=(3, 4)), "b": rng.normal(size=4), "empty": np.zeros((0, 2))}
    checkpoint.save(tmp_path / "x.ckpt", blocks, {"kind": "test"})
    out, meta = checkpoint.load(tmp_path / "x.ckpt")
    assert meta == {"kind": "test"}
    for k in blocks:
        assert out[k].tobytes() == blocks[k].tobytes() and out[k].shape == blocks[k].shape


def test_checkpoint_rejects_garbage(tmp_path):
    (tmp_path / "bad.ckpt").write_bytes(b"not a checkpoint")
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.load(tmp_path / "bad.ckpt")
