"""Linear state-space baseline identified by subspace regression.

Data are stacked into past/future block-Hankel matrices and the future
outputs are projected on the past along the future inputs and a constant.
A truncated SVD of that projection yields a state sequence, from which the
affine model follows by least squares:

    s[t+1] = A s[t] + B u[t] + s_off
    y[t]   = C s[t] + D u[t] + y_off

Prediction estimates the initial state from a warm-up window by least
squares and then free-runs the model.
"""
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ..exceptions import DivergenceError, DomainError, IdentificationError, ShapeError
from ..nn import checkpoint

DIVERGENCE_LIMIT = 1e6


def _hankel(z, start, rows, cols):
    """Block-Hankel matrix with ``rows`` block rows of ``z[start + r + j]``."""
    m = z.shape[1]
    idx = start + np.arange(rows)[:, None] + np.arange(cols)[None, :]
    return z[idx].transpose(0, 2, 1).reshape(rows * m, cols)


@dataclass
class SsmMatrices:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    s_off: np.ndarray
    y_off: np.ndarray

    @property
    def order(self):
        return self.A.shape[0]

    @property
    def spectral_radius(self):
        if self.order == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(self.A))))


def identify(u, y, order, block_rows=None):
    """Subspace identification; returns ``SsmMatrices``."""
    u = np.asarray(u, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if u.ndim == 1:
        u = u[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if len(u) != len(y):
        raise ShapeError(f"u has {len(u)} rows, y has {len(y)}")
    if not 1 <= order <= 10:
        raise DomainError(f"order must lie in 1..10, got {order}")
    N, m = u.shape
    p = y.shape[1]
    i = block_rows or max(2 * order, 10)
    cols = N - 2 * i + 1
    if cols < 2 * i * (m + p):
        raise IdentificationError(f"{N} samples are too few for {i} block rows")
    if not np.any(y - y[0]):
        # nothing to explain: a constant-response model
        return SsmMatrices(np.zeros((order, order)), np.zeros((order, m)), np.zeros((p, order)),
                           np.zeros((p, m)), np.zeros(order), y[0].copy())
    Up, Uf = _hankel(u, 0, i, cols), _hankel(u, i, i, cols)
    Yp, Yf = _hankel(y, 0, i, cols), _hankel(y, i, i, cols)
    Wp = np.vstack([Up, Yp])
    ones = np.ones((1, cols))
    R = np.vstack([Wp, Uf, ones])
    if np.linalg.matrix_rank(np.vstack([Up, Uf, ones])) < 2 * i * m + 1:
        raise IdentificationError("inputs are not persistently exciting (rank-deficient input Hankel)")
    # noise-free data make the past outputs collinear; lstsq then picks the minimum-norm solution
    coef, *_ = np.linalg.lstsq(R.T, Yf.T, rcond=None)
    Lw = coef[:Wp.shape[0]].T
    O = Lw @ Wp
    U_, s, Vt = np.linalg.svd(O, full_matrices=False)
    if order > len(s) or s[order - 1] <= 1e-12 * s[0]:
        raise IdentificationError(f"projection has numerical rank below the requested order {order}")
    X = np.sqrt(s[:order])[:, None] * Vt[:order]
    # consecutive columns are consecutive times
    u_t = u[i:i + cols - 1].T
    y_t = y[i:i + cols - 1].T
    lhs = np.vstack([X[:, 1:], y_t])
    rhs = np.vstack([X[:, :-1], u_t, ones[:, 1:]])
    theta, *_ = np.linalg.lstsq(rhs.T, lhs.T, rcond=None)
    theta = theta.T
    n = order
    return SsmMatrices(theta[:n, :n], theta[:n, n:n + m], theta[n:, :n], theta[n:, n:n + m],
                       theta[:n, -1], theta[n:, -1])


def _estimate_state(mats, u_w, y_w):
    """Least-squares state at the start of the warm window."""
    A, B, C, D = mats.A, mats.B, mats.C, mats.D
    L = len(u_w)
    n, p = mats.order, C.shape[0]
    obs = np.empty((L * p, n))
    forced = np.empty((L, p))
    Ak = np.eye(n)
    s = np.zeros(n)
    for t in range(L):
        obs[t * p:(t + 1) * p] = C @ Ak
        forced[t] = C @ s + D @ u_w[t] + mats.y_off
        s = A @ s + B @ u_w[t] + mats.s_off
        Ak = A @ Ak
    x0, *_ = np.linalg.lstsq(obs, (y_w - forced).reshape(-1), rcond=None)
    return x0


def simulate(mats, u_future, warm_u, warm_y):
    """Free-run prediction after a warm-up window; returns (L, p) outputs."""
    m, p = mats.B.shape[1], mats.C.shape[0]
    u_future = np.asarray(u_future, dtype=np.float64).reshape(len(u_future), m)
    warm_u = np.asarray(warm_u, dtype=np.float64).reshape(len(warm_u), m)
    warm_y = np.asarray(warm_y, dtype=np.float64).reshape(len(warm_y), p)
    if u_future.shape[1] != mats.B.shape[1] or warm_u.shape[1] != mats.B.shape[1]:
        raise ShapeError("input width does not match the model")
    if warm_y.shape[1] != mats.C.shape[0] or len(warm_y) != len(warm_u):
        raise ShapeError("warm-up outputs do not match the model or the warm-up inputs")
    s = _estimate_state(mats, warm_u, warm_y) if len(warm_u) else np.zeros(mats.order)
    for t in range(len(warm_u)):
        s = mats.A @ s + mats.B @ warm_u[t] + mats.s_off
    out = np.empty((len(u_future), mats.C.shape[0]))
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(len(u_future)):
            out[t] = mats.C @ s + mats.D @ u_future[t] + mats.y_off
            if not np.all(np.abs(out[t]) < DIVERGENCE_LIMIT):
                raise DivergenceError(f"linear model prediction diverged at step {t}")
            s = mats.A @ s + mats.B @ u_future[t] + mats.s_off
    return out


class LinearSSM(RegressorMixin, BaseEstimator):
    """Estimator wrapper: ``fit(u, y)`` then ``predict(u, warm_u=, warm_y=)``."""

    def __init__(self, order=2, block_rows=None):
        self.order = order
        self.block_rows = block_rows

    def fit(self, u, y):
        self.matrices_ = identify(u, y, self.order, self.block_rows)
        self.A_, self.B_ = self.matrices_.A, self.matrices_.B
        self.C_, self.D_ = self.matrices_.C, self.matrices_.D
        self.n_features_in_ = self.B_.shape[1]
        return self

    @property
    def spectral_radius_(self):
        check_is_fitted(self, "matrices_")
        return self.matrices_.spectral_radius

    def predict(self, u, warm_u=None, warm_y=None):
        check_is_fitted(self, "matrices_")
        if warm_u is None:
            warm_u = np.empty((0, self.n_features_in_))
            warm_y = np.empty((0, self.C_.shape[0]))
        return simulate(self.matrices_, u, warm_u, warm_y)


def fit_linear_ssm(hist, order, block_rows=None):
    """Fit on a dataset; inputs are ``x_sharp``, outputs the observations.

    Episodes are concatenated; their seams add a little noise to the
    regression and are tolerated.
    """
    return LinearSSM(order, block_rows).fit(hist.x_sharp, hist.observations)


def predict_linear_ssm(model, x_sharp, warm):
    """``warm`` is a ``(warm_x_sharp, warm_observations)`` pair."""
    warm_u, warm_y = warm
    return model.predict(x_sharp, warm_u, warm_y)


def save_linear_ssm(path, model):
    check_is_fitted(model, "matrices_")
    m = model.matrices_
    blocks = {k: np.atleast_1d(np.asarray(getattr(m, k), dtype=np.float64))
              for k in ("A", "B", "C", "D", "s_off", "y_off")}
    checkpoint.save(path, blocks, {"kind": "linear-ssm", "order": int(model.order),
                                   "block_rows": model.block_rows})


def load_linear_ssm(path):
    blocks, meta = checkpoint.load(path)
    if meta.get("kind") != "linear-ssm":
        raise ShapeError(f"{path} does not hold a linear state-space model")
    model = LinearSSM(meta["order"], meta["block_rows"])
    model.matrices_ = SsmMatrices(*(blocks[k] for k in ("A", "B", "C", "D", "s_off", "y_off")))
    model.A_, model.B_ = model.matrices_.A, model.matrices_.B
    model.C_, model.D_ = model.matrices_.C, model.matrices_.D
    model.n_features_in_ = model.B_.shape[1]
    return model
