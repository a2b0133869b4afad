"""Forward and backward kernels for the forecaster layers.

All kernels are float64 and pure: forward returns (output, cache) and the
matching backward consumes the cache plus the upstream gradient.  Inputs
are channels-last; convolution is valid (no padding) with stride 1, and
pooling strides by its own window.
"""

from __future__ import annotations

import numpy as np

BN_EPS = 1e-3
BN_MOMENTUM = 0.99


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activate(z: np.ndarray, kind: str):
    """Returns (y, aux) where aux is whatever the gradient needs."""
    if kind == "linear":
        return z, None
    if kind == "relu":
        mask = z > 0
        return z * mask, mask
    if kind == "sigmoid":
        y = sigmoid(z)
        return y, y
    if kind == "tanh":
        y = np.tanh(z)
        return y, y
    raise ValueError(f"unknown activation '{kind}'")


def _activation_grad(dy: np.ndarray, kind: str, aux) -> np.ndarray:
    if kind == "linear":
        return dy
    if kind == "relu":
        return dy * aux
    if kind == "sigmoid":
        return dy * aux * (1.0 - aux)
    if kind == "tanh":
        return dy * (1.0 - aux * aux)
    raise ValueError(f"unknown activation '{kind}'")


# -- dense -------------------------------------------------------------

def dense_forward(x, w, b, activation):
    z = x @ w + b
    y, aux = _activate(z, activation)
    return y, (x, activation, aux)


def dense_backward(cache, w, dy):
    x, activation, aux = cache
    dz = _activation_grad(dy, activation, aux)
    return dz @ w.T, {"w": x.T @ dz, "b": dz.sum(axis=0)}


# -- lstm --------------------------------------------------------------
# Gate layout along the 4H axis: input, forget, cell, output.

def lstm_forward(x, w, u, b):
    """x (B, T, n) -> final hidden state (B, H).

    The input projection x @ w is hoisted out of the time loop into one
    matrix product over all steps.
    """
    batch, steps, n_in = x.shape
    hidden = u.shape[0]
    xw = (x.reshape(batch * steps, n_in) @ w).reshape(batch, steps, 4 * hidden)
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    steps_cache = []
    for t in range(steps):
        z = xw[:, t] + h @ u + b
        gi = sigmoid(z[:, :hidden])
        gf = sigmoid(z[:, hidden : 2 * hidden])
        gg = np.tanh(z[:, 2 * hidden : 3 * hidden])
        go = sigmoid(z[:, 3 * hidden :])
        c_new = gf * c + gi * gg
        tc = np.tanh(c_new)
        steps_cache.append((h, c, gi, gf, gg, go, tc))
        h = go * tc
        c = c_new
    return h, (x, steps_cache)


def lstm_backward(cache, w, u, dh):
    """Backpropagation through time from the final hidden state only."""
    x, steps_cache = cache
    batch, steps, n_in = x.shape
    hidden = u.shape[0]
    du = np.zeros_like(u)
    dz_all = np.empty((batch, steps, 4 * hidden))
    dc = np.zeros_like(dh)
    for t in reversed(range(steps)):
        h_prev, c_prev, gi, gf, gg, go, tc = steps_cache[t]
        do = dh * tc
        dc = dc + dh * go * (1.0 - tc * tc)
        dz = dz_all[:, t]
        dz[:, :hidden] = dc * gg * gi * (1.0 - gi)
        dz[:, hidden : 2 * hidden] = dc * c_prev * gf * (1.0 - gf)
        dz[:, 2 * hidden : 3 * hidden] = dc * gi * (1.0 - gg * gg)
        dz[:, 3 * hidden :] = do * go * (1.0 - go)
        du += h_prev.T @ dz
        dh = dz @ u.T
        dc = dc * gf
    dz_flat = dz_all.reshape(batch * steps, 4 * hidden)
    x_flat = x.reshape(batch * steps, n_in)
    dx = (dz_flat @ w.T).reshape(batch, steps, n_in)
    return dx, {"w": x_flat.T @ dz_flat, "u": du, "b": dz_flat.sum(axis=0)}


# -- conv3d ------------------------------------------------------------

def conv3d_forward(x, kern, b, activation):
    """x (B, D, H, W, Cin), kern (kd, kh, kw, Cin, F) -> (B, D', H', W', F)."""
    kd, kh, kw, _, filters = kern.shape
    d_out = x.shape[1] - kd + 1
    h_out = x.shape[2] - kh + 1
    w_out = x.shape[3] - kw + 1
    z = np.zeros((x.shape[0], d_out, h_out, w_out, filters))
    z += b
    for a in range(kd):
        for p in range(kh):
            for r in range(kw):
                z += x[:, a : a + d_out, p : p + h_out, r : r + w_out, :] @ kern[a, p, r]
    y, aux = _activate(z, activation)
    return y, (x, kern.shape, activation, aux)


def conv3d_backward(cache, kern, dy):
    x, kshape, activation, aux = cache
    dz = _activation_grad(dy, activation, aux)
    kd, kh, kw = kshape[:3]
    d_out, h_out, w_out = dz.shape[1:4]
    dkern = np.zeros(kshape)
    dx = np.zeros_like(x)
    db = dz.sum(axis=(0, 1, 2, 3))
    for a in range(kd):
        for p in range(kh):
            for r in range(kw):
                patch = x[:, a : a + d_out, p : p + h_out, r : r + w_out, :]
                dkern[a, p, r] = np.tensordot(
                    patch, dz, axes=([0, 1, 2, 3], [0, 1, 2, 3])
                )
                dx[:, a : a + d_out, p : p + h_out, r : r + w_out, :] += (
                    dz @ kern[a, p, r].T
                )
    return dx, {"k": dkern, "b": db}


# -- maxpool3d ---------------------------------------------------------

def maxpool3d_forward(x, window):
    """Stride equals the window; trailing remainders are dropped (valid)."""
    wd, wh, ww = window
    batch, d, h, w, ch = x.shape
    d_out, h_out, w_out = d // wd, h // wh, w // ww
    cropped = x[:, : d_out * wd, : h_out * wh, : w_out * ww, :]
    cells = cropped.reshape(batch, d_out, wd, h_out, wh, w_out, ww, ch)
    cells = cells.transpose(0, 1, 3, 5, 7, 2, 4, 6).reshape(
        batch, d_out, h_out, w_out, ch, wd * wh * ww
    )
    arg = cells.argmax(axis=-1)
    y = np.take_along_axis(cells, arg[..., None], axis=-1)[..., 0]
    return y, (x.shape, window, arg)


def maxpool3d_backward(cache, dy):
    x_shape, window, arg = cache
    wd, wh, ww = window
    batch, d_out, h_out, w_out, ch = dy.shape
    flat = np.zeros((batch, d_out, h_out, w_out, ch, wd * wh * ww))
    np.put_along_axis(flat, arg[..., None], dy[..., None], axis=-1)
    cells = flat.reshape(batch, d_out, h_out, w_out, ch, wd, wh, ww)
    cells = cells.transpose(0, 1, 5, 2, 6, 3, 7, 4)
    dx = np.zeros(x_shape)
    dx[:, : d_out * wd, : h_out * wh, : w_out * ww, :] = cells.reshape(
        batch, d_out * wd, h_out * wh, w_out * ww, ch
    )
    return dx


# -- batchnorm ---------------------------------------------------------

def batchnorm_forward(
    x,
    gamma,
    beta,
    running_mean,
    running_var,
    training,
    momentum=BN_MOMENTUM,
    eps=BN_EPS,
):
    """Channels-last batch normalization.

    Training mode normalizes with per-batch statistics (biased variance)
    and returns updated running statistics; inference mode uses the running
    statistics unchanged.
    """
    axes = tuple(range(x.ndim - 1))
    if training:
        mean = x.mean(axis=axes)
        var = x.var(axis=axes)
        new_mean = momentum * running_mean + (1.0 - momentum) * mean
        new_var = momentum * running_var + (1.0 - momentum) * var
    else:
        mean, var = running_mean, running_var
        new_mean, new_var = running_mean, running_var
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean) * inv
    y = gamma * xhat + beta
    n = x.size // x.shape[-1]
    return y, (xhat, inv, gamma, training, n), (new_mean, new_var)


def batchnorm_backward(cache, dy):
    xhat, inv, gamma, training, n = cache
    axes = tuple(range(dy.ndim - 1))
    dgamma = (dy * xhat).sum(axis=axes)
    dbeta = dy.sum(axis=axes)
    dxhat = dy * gamma
    if training:
        dx = (inv / n) * (
            n * dxhat - dxhat.sum(axis=axes) - xhat * (dxhat * xhat).sum(axis=axes)
        )
    else:
        dx = dxhat * inv
    return dx, {"gamma": dgamma, "beta": dbeta}
