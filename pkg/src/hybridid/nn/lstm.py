"""LSTM cell with forget gate and no peepholes, plus sequence-level BPTT.

Gate weights are stored stacked in one array of shape ``(4, p, d + p)`` with
gate order (input, forget, candidate, output). Each gate acts on the
concatenation ``[x_t, h_{t-1}]``.
"""
from dataclasses import dataclass

import numpy as np

from .._validation import check_finite
from ..exceptions import ShapeError

GATES = ("input", "forget", "candidate", "output")


def sigmoid(z):
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _gate_scale(p):
    s = np.full(4 * p, 0.5)
    s[2 * p:3 * p] = 1.0
    return s


def _activate(z, p, scale):
    """Gate activations (sigmoid, sigmoid, tanh, sigmoid) from pre-activations."""
    a = np.tanh(z * scale)
    a[..., :2 * p] += 1.0
    a[..., :2 * p] *= 0.5
    a[..., 3 * p:] += 1.0
    a[..., 3 * p:] *= 0.5
    return a


@dataclass
class LstmParams:
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.W.ndim != 3 or self.W.shape[0] != 4:
            raise ShapeError(f"gate weights must have shape (4, p, d+p), got {self.W.shape}")
        p = self.W.shape[1]
        if p <= 0 or self.W.shape[2] <= p:
            raise ShapeError(f"invalid gate weight shape {self.W.shape}")
        if self.b.shape != (4, p):
            raise ShapeError(f"gate biases must have shape (4, {p}), got {self.b.shape}")

    @property
    def hidden_dim(self):
        return self.W.shape[1]

    @property
    def input_dim(self):
        return self.W.shape[2] - self.W.shape[1]

    @classmethod
    def zeros(cls, input_dim, hidden_dim):
        return cls(np.zeros((4, hidden_dim, input_dim + hidden_dim)), np.zeros((4, hidden_dim)))

    @classmethod
    def init(cls, input_dim, hidden_dim, rng, forget_bias=1.0):
        """Uniform(+-1/sqrt(fan_in)) weights, zero biases except the forget gate."""
        fan_in = input_dim + hidden_dim
        bound = 1.0 / np.sqrt(fan_in)
        W = rng.uniform(-bound, bound, size=(4, hidden_dim, fan_in))
        b = np.zeros((4, hidden_dim))
        b[1] = forget_bias
        return cls(W, b)

    def named(self, prefix=""):
        return {prefix + "W": self.W, prefix + "b": self.b}

    def copy(self):
        return LstmParams(self.W.copy(), self.b.copy())


def lstm_step(params, x_t, c_prev, h_prev):
    """One LSTM update. Accepts single vectors or a leading batch axis."""
    x_t = np.asarray(x_t, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    p, d = params.hidden_dim, params.input_dim
    if x_t.shape[-1] != d:
        raise ShapeError(f"x_t has width {x_t.shape[-1]}, expected {d}")
    if c_prev.shape[-1] != p or h_prev.shape[-1] != p:
        raise ShapeError(f"state width must be {p}")
    W = params.W.reshape(4 * p, d + p)
    z = np.concatenate([x_t, h_prev], axis=-1) @ W.T + params.b.reshape(4 * p)
    a = _activate(z, p, _gate_scale(p))
    i, f, g, o = a[..., :p], a[..., p:2 * p], a[..., 2 * p:3 * p], a[..., 3 * p:]
    c_t = f * c_prev + i * g
    h_t = o * np.tanh(c_t)
    return c_t, h_t


class LstmCache:
    __slots__ = ("xs", "hs", "cs", "gates", "tc")


def lstm_forward(params, xs, c0, h0, check=True):
    """Run the cell over ``xs`` of shape (T, B, d) from state (c0, h0).

    Returns ``(hs, (c_T, h_T), cache)`` where ``hs`` has shape (T, B, p).
    """
    T, B, d = xs.shape
    p = params.hidden_dim
    if d != params.input_dim:
        raise ShapeError(f"inputs have width {d}, expected {params.input_dim}")
    W = params.W.reshape(4 * p, d + p)
    WhT = np.ascontiguousarray(W[:, d:].T)
    scale = _gate_scale(p)
    zx = xs @ W[:, :d].T + params.b.reshape(4 * p)
    hs = np.empty((T + 1, B, p))
    cs = np.empty((T + 1, B, p))
    hs[0], cs[0] = h0, c0
    gates = np.empty((T, B, 4 * p))
    tc = np.empty((T, B, p))
    for t in range(T):
        a = _activate(zx[t] + hs[t] @ WhT, p, scale)
        gates[t] = a
        c = a[:, p:2 * p] * cs[t]
        c += a[:, :p] * a[:, 2 * p:3 * p]
        cs[t + 1] = c
        np.tanh(c, out=tc[t])
        np.multiply(a[:, 3 * p:], tc[t], out=hs[t + 1])
    if check and not np.all(np.isfinite(cs[T])):
        bad = int(np.argmax(~np.all(np.isfinite(cs[1:]), axis=(1, 2))))
        check_finite(cs[bad + 1], "LSTM cell state", step=bad)
    cache = LstmCache()
    cache.xs, cache.hs, cache.cs, cache.gates, cache.tc = xs, hs, cs, gates, tc
    return hs[1:], (cs[T], hs[T]), cache


def lstm_backward(params, cache, dhs=None, dc_T=None, dh_T=None):
    """Reverse-mode pass through an unrolled sequence.

    ``dhs`` is the loss gradient w.r.t. every emitted hidden state (T, B, p),
    ``dc_T``/``dh_T`` the gradient w.r.t. the final state. Returns
    ``(grads, dxs, dc0, dh0)`` with ``grads`` keyed ``W`` and ``b``.
    """
    xs, hs, cs = cache.xs, cache.hs, cache.cs
    T, B, d = xs.shape
    p = params.hidden_dim
    W = params.W.reshape(4 * p, d + p)
    Wh = W[:, d:]
    dh_next = np.zeros((B, p)) if dh_T is None else np.array(dh_T, dtype=np.float64)
    dc_next = np.zeros((B, p)) if dc_T is None else np.array(dc_T, dtype=np.float64)
    # local derivative factors, vectorized over time
    a = cache.gates
    i, f, g, o = a[..., :p], a[..., p:2 * p], a[..., 2 * p:3 * p], a[..., 3 * p:]
    tc = cache.tc
    D = np.empty((T, B, 4, p))
    D[:, :, 0] = g * i * (1.0 - i)
    D[:, :, 1] = cs[:-1] * f * (1.0 - f)
    D[:, :, 2] = i * (1.0 - g * g)
    D[:, :, 3] = tc * o * (1.0 - o)
    carry = o * (1.0 - tc * tc)
    dz = np.empty((T, B, 4, p))
    for t in range(T - 1, -1, -1):
        dh = dh_next if dhs is None else dh_next + dhs[t]
        dc = dc_next + dh * carry[t]
        np.multiply(D[t, :, :3], dc[:, None, :], out=dz[t, :, :3])
        np.multiply(D[t, :, 3], dh, out=dz[t, :, 3])
        dc_next = dc * f[t]
        dh_next = dz[t].reshape(B, 4 * p) @ Wh
    dz = dz.reshape(T, B, 4 * p)
    flat = dz.reshape(T * B, 4 * p)
    dWx = flat.T @ xs.reshape(T * B, d)
    dWh = flat.T @ hs[:-1].reshape(T * B, p)
    dW = np.concatenate([dWx, dWh], axis=1).reshape(4, p, d + p)
    db = flat.sum(axis=0).reshape(4, p)
    dxs = dz @ W[:, :d]
    return {"W": dW, "b": db}, dxs, dc_next, dh_next
