"""Layers with explicit forward and backward passes.

Every layer stores whatever its backward pass needs in ``self.cache``
during forward, accumulates parameter gradients into ``self.grads``, and
returns the gradient with respect to its input.  Weights initialize
uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)] with zero biases.

Recurrent gate order is [forget, input, candidate, output] everywhere,
with the forget and input and output gates through a sigmoid and the
candidate through tanh:

    f = sig(W_f [h, x] + b_f)        C = f * C_prev + i * c
    i = sig(W_i [h, x] + b_i)        h = o * tanh(C)
    c = tanh(W_C [h, x] + b_C)
    o = sig(W_o [h, x] + b_o)

The convolutional variants replace the matrix products with same-padded
convolutions over the spatial axes, keeping the gate algebra unchanged.
Dense applies over the last axis only, so it is time-distributed for free
on sequence-shaped inputs.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import InvalidInstanceError

ACTIVATIONS = ("linear", "relu", "sigmoid", "tanh")


def _init_weight(rng: np.random.Generator, shape: tuple[int, ...], dtype) -> np.ndarray:
    fan_in = int(np.prod(shape[:-1]))
    scale = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-scale, scale, size=shape).astype(dtype)


class Layer:
    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.cache = None

    def build(self, d_in: int, rng: np.random.Generator, dtype) -> int:
        raise NotImplementedError

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def zero_grads(self) -> None:
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def config(self) -> dict:
        raise NotImplementedError


class Dense(Layer):
    """Affine map over the last axis with an optional pointwise activation."""

    def __init__(self, units: int, activation: str = "linear"):
        super().__init__()
        if activation not in ACTIVATIONS:
            raise InvalidInstanceError(f"unknown activation {activation!r}")
        self.units = units
        self.activation = activation

    def build(self, d_in: int, rng: np.random.Generator, dtype) -> int:
        self.params = {
            "W": _init_weight(rng, (d_in, self.units), dtype),
            "b": np.zeros(self.units, dtype=dtype),
        }
        self.zero_grads()
        return self.units

    def forward(self, x: np.ndarray) -> np.ndarray:
        z = x @ self.params["W"] + self.params["b"]
        if self.activation == "relu":
            a = np.maximum(z, 0)
            self.cache = (x, z > 0)
        elif self.activation == "sigmoid":
            a = expit(z)
            self.cache = (x, a)
        elif self.activation == "tanh":
            a = np.tanh(z)
            self.cache = (x, a)
        else:
            a = z
            self.cache = (x, None)
        return a

    def backward(self, dy: np.ndarray) -> np.ndarray:
        x, act = self.cache
        if self.activation == "relu":
            dz = dy * act
        elif self.activation == "sigmoid":
            dz = dy * act * (1 - act)
        elif self.activation == "tanh":
            dz = dy * (1 - act * act)
        else:
            dz = dy
        d_in = x.shape[-1]
        x2 = x.reshape(-1, d_in)
        dz2 = dz.reshape(-1, self.units)
        self.grads["W"] += x2.T @ dz2
        self.grads["b"] += dz2.sum(axis=0)
        return dz @ self.params["W"].T

    def config(self) -> dict:
        return {"type": "dense", "units": self.units, "activation": self.activation}


class LSTM(Layer):
    """Recurrent layer over (batch, time, features), returning all steps."""

    GATES = ("f", "i", "C", "o")

    def __init__(self, units: int):
        super().__init__()
        self.units = units

    def build(self, d_in: int, rng: np.random.Generator, dtype) -> int:
        h = self.units
        self.params = {}
        for gate in self.GATES:
            self.params[f"W_{gate}"] = _init_weight(rng, (h + d_in, h), dtype)
        for gate in self.GATES:
            self.params[f"b_{gate}"] = np.zeros(h, dtype=dtype)
        self.zero_grads()
        self.d_in = d_in
        return h

    def _packed(self) -> tuple[np.ndarray, np.ndarray]:
        w = np.concatenate([self.params[f"W_{g}"] for g in self.GATES], axis=1)
        b = np.concatenate([self.params[f"b_{g}"] for g in self.GATES])
        return w, b

    def forward(self, x: np.ndarray) -> np.ndarray:
        batch, steps, d_in = x.shape
        h_dim = self.units
        w, b = self._packed()
        h = np.zeros((batch, h_dim), dtype=x.dtype)
        c = np.zeros((batch, h_dim), dtype=x.dtype)
        zs = np.empty((steps, batch, h_dim + d_in), dtype=x.dtype)
        gates = np.empty((steps, batch, 4 * h_dim), dtype=x.dtype)
        tcs = np.empty((steps, batch, h_dim), dtype=x.dtype)
        c_prevs = np.empty((steps, batch, h_dim), dtype=x.dtype)
        out = np.empty((batch, steps, h_dim), dtype=x.dtype)
        for t in range(steps):
            z = np.concatenate([h, x[:, t, :]], axis=1)
            raw = z @ w + b
            f = expit(raw[:, :h_dim])
            i = expit(raw[:, h_dim : 2 * h_dim])
            g = np.tanh(raw[:, 2 * h_dim : 3 * h_dim])
            o = expit(raw[:, 3 * h_dim :])
            c_prevs[t] = c
            c = f * c + i * g
            tc = np.tanh(c)
            h = o * tc
            zs[t] = z
            gates[t] = np.concatenate([f, i, g, o], axis=1)
            tcs[t] = tc
            out[:, t, :] = h
        self.cache = (zs, gates, tcs, c_prevs, w)
        return out

    def backward(self, dy: np.ndarray) -> np.ndarray:
        zs, gates, tcs, c_prevs, w = self.cache
        steps, batch, _ = zs.shape
        h_dim = self.units
        d_in = self.d_in
        dw = np.zeros_like(w)
        db = np.zeros(4 * h_dim, dtype=w.dtype)
        dx = np.empty((batch, steps, d_in), dtype=w.dtype)
        dh_next = np.zeros((batch, h_dim), dtype=w.dtype)
        dc = np.zeros((batch, h_dim), dtype=w.dtype)
        for t in reversed(range(steps)):
            f = gates[t][:, :h_dim]
            i = gates[t][:, h_dim : 2 * h_dim]
            g = gates[t][:, 2 * h_dim : 3 * h_dim]
            o = gates[t][:, 3 * h_dim :]
            tc = tcs[t]
            dh = dy[:, t, :] + dh_next
            do = dh * tc
            dc = dc + dh * o * (1 - tc * tc)
            df = dc * c_prevs[t]
            di = dc * g
            dg = dc * i
            draw = np.concatenate(
                [
                    df * f * (1 - f),
                    di * i * (1 - i),
                    dg * (1 - g * g),
                    do * o * (1 - o),
                ],
                axis=1,
            )
            dw += zs[t].T @ draw
            db += draw.sum(axis=0)
            dz = draw @ w.T
            dh_next = dz[:, :h_dim]
            dx[:, t, :] = dz[:, h_dim:]
            dc = dc * f
        for k, gate in enumerate(self.GATES):
            self.grads[f"W_{gate}"] += dw[:, k * h_dim : (k + 1) * h_dim]
            self.grads[f"b_{gate}"] += db[k * h_dim : (k + 1) * h_dim]
        return dx

    def config(self) -> dict:
        return {"type": "lstm", "units": self.units}


# ---------------------------------------------------------------------------
# Same-padded convolutions as sums of shifted matrix products
# ---------------------------------------------------------------------------

def _same_pad(kernel: int) -> tuple[int, int]:
    before = (kernel - 1) // 2
    return before, kernel - 1 - before


def conv1d_same(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """x (N, L, Cin), w (K, Cin, Cout) -> (N, L, Cout)."""
    k, _, c_out = w.shape
    length = x.shape[1]
    pb, pa = _same_pad(k)
    xp = np.pad(x, ((0, 0), (pb, pa), (0, 0)))
    out = np.zeros((x.shape[0], length, c_out), dtype=x.dtype)
    for kk in range(k):
        out += xp[:, kk : kk + length, :] @ w[kk]
    return out


def conv1d_same_backward(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients (dx, dw) of conv1d_same."""
    k = w.shape[0]
    length = x.shape[1]
    pb, pa = _same_pad(k)
    xp = np.pad(x, ((0, 0), (pb, pa), (0, 0)))
    dxp = np.zeros_like(xp)
    dw = np.zeros_like(w)
    for kk in range(k):
        patch = xp[:, kk : kk + length, :]
        dw[kk] = np.tensordot(patch, dy, axes=([0, 1], [0, 1]))
        dxp[:, kk : kk + length, :] += dy @ w[kk].T
    return dxp[:, pb : pb + length, :], dw


def conv2d_same(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """x (N, H, W, Cin), w (Kh, Kw, Cin, Cout) -> (N, H, W, Cout)."""
    kh, kw, _, c_out = w.shape
    height, width = x.shape[1], x.shape[2]
    pbh, pah = _same_pad(kh)
    pbw, paw = _same_pad(kw)
    xp = np.pad(x, ((0, 0), (pbh, pah), (pbw, paw), (0, 0)))
    out = np.zeros((x.shape[0], height, width, c_out), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            out += xp[:, i : i + height, j : j + width, :] @ w[i, j]
    return out


def conv2d_same_backward(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    kh, kw = w.shape[0], w.shape[1]
    height, width = x.shape[1], x.shape[2]
    pbh, pah = _same_pad(kh)
    pbw, paw = _same_pad(kw)
    xp = np.pad(x, ((0, 0), (pbh, pah), (pbw, paw), (0, 0)))
    dxp = np.zeros_like(xp)
    dw = np.zeros_like(w)
    for i in range(kh):
        for j in range(kw):
            patch = xp[:, i : i + height, j : j + width, :]
            dw[i, j] = np.tensordot(patch, dy, axes=([0, 1, 2], [0, 1, 2]))
            dxp[:, i : i + height, j : j + width, :] += dy @ w[i, j].T
    return dxp[:, pbh : pbh + height, pbw : pbw + width, :], dw


class _ConvLSTMBase(Layer):
    """Shared gate algebra for the 1D and 2D convolutional recurrent layers.

    Input convolutions for all timesteps run as one batched call before
    the time loop; the recurrent convolution runs per step.  Gate weights
    are packed along the output channel axis in gate order.
    """

    def __init__(self, filters: int):
        super().__init__()
        self.filters = filters

    def _conv(self, x, w):
        raise NotImplementedError

    def _conv_backward(self, x, w, dy):
        raise NotImplementedError

    def forward(self, x: np.ndarray) -> np.ndarray:
        batch, steps = x.shape[0], x.shape[1]
        spatial = x.shape[2:-1]
        f_dim = self.filters
        wx, wh, b = self.params["Wx"], self.params["Wh"], self.params["b"]

        flat = x.reshape((batch * steps,) + x.shape[2:])
        zx = self._conv(flat, wx).reshape((batch, steps) + spatial + (4 * f_dim,))

        h = np.zeros((batch,) + spatial + (f_dim,), dtype=x.dtype)
        c = np.zeros_like(h)
        gates = np.empty((steps, batch) + spatial + (4 * f_dim,), dtype=x.dtype)
        tcs = np.empty((steps, batch) + spatial + (f_dim,), dtype=x.dtype)
        c_prevs = np.empty_like(tcs)
        h_prevs = np.empty_like(tcs)
        out = np.empty((batch, steps) + spatial + (f_dim,), dtype=x.dtype)
        for t in range(steps):
            raw = zx[:, t] + self._conv(h, wh) + b
            f = expit(raw[..., :f_dim])
            i = expit(raw[..., f_dim : 2 * f_dim])
            g = np.tanh(raw[..., 2 * f_dim : 3 * f_dim])
            o = expit(raw[..., 3 * f_dim :])
            h_prevs[t] = h
            c_prevs[t] = c
            c = f * c + i * g
            tc = np.tanh(c)
            h = o * tc
            gates[t] = np.concatenate([f, i, g, o], axis=-1)
            tcs[t] = tc
            out[:, t] = h
        self.cache = (x, gates, tcs, c_prevs, h_prevs)
        return out

    def backward(self, dy: np.ndarray) -> np.ndarray:
        x, gates, tcs, c_prevs, h_prevs = self.cache
        batch, steps = x.shape[0], x.shape[1]
        spatial = x.shape[2:-1]
        f_dim = self.filters
        wx, wh = self.params["Wx"], self.params["Wh"]

        dzx = np.empty((batch, steps) + spatial + (4 * f_dim,), dtype=wx.dtype)
        dwh = np.zeros_like(wh)
        db = np.zeros(4 * f_dim, dtype=wx.dtype)
        dh_next = np.zeros((batch,) + spatial + (f_dim,), dtype=wx.dtype)
        dc = np.zeros_like(dh_next)
        for t in reversed(range(steps)):
            f = gates[t][..., :f_dim]
            i = gates[t][..., f_dim : 2 * f_dim]
            g = gates[t][..., 2 * f_dim : 3 * f_dim]
            o = gates[t][..., 3 * f_dim :]
            tc = tcs[t]
            dh = dy[:, t] + dh_next
            do = dh * tc
            dc = dc + dh * o * (1 - tc * tc)
            df = dc * c_prevs[t]
            di = dc * g
            dg = dc * i
            draw = np.concatenate(
                [
                    df * f * (1 - f),
                    di * i * (1 - i),
                    dg * (1 - g * g),
                    do * o * (1 - o),
                ],
                axis=-1,
            )
            dzx[:, t] = draw
            db += draw.reshape(-1, 4 * f_dim).sum(axis=0)
            dh_next, dwh_t = self._conv_backward(h_prevs[t], wh, draw)
            dwh += dwh_t
            dc = dc * f
        flat_x = x.reshape((batch * steps,) + x.shape[2:])
        flat_dzx = dzx.reshape((batch * steps,) + dzx.shape[2:])
        dx_flat, dwx = self._conv_backward(flat_x, wx, flat_dzx)
        self.grads["Wx"] += dwx
        self.grads["Wh"] += dwh
        self.grads["b"] += db
        return dx_flat.reshape(x.shape)


class ConvLSTM1D(_ConvLSTMBase):
    """Convolutional recurrent layer over (batch, time, sites, channels)."""

    def __init__(self, filters: int, kernel_size: int = 3):
        super().__init__(filters)
        self.kernel_size = kernel_size

    def build(self, d_in: int, rng: np.random.Generator, dtype) -> int:
        k, f = self.kernel_size, self.filters
        self.params = {
            "Wx": _init_weight(rng, (k, d_in, 4 * f), dtype),
            "Wh": _init_weight(rng, (k, f, 4 * f), dtype),
            "b": np.zeros(4 * f, dtype=dtype),
        }
        self.zero_grads()
        return f

    def _conv(self, x, w):
        return conv1d_same(x, w)

    def _conv_backward(self, x, w, dy):
        return conv1d_same_backward(x, w, dy)

    def config(self) -> dict:
        return {"type": "convlstm1d", "filters": self.filters, "kernel_size": self.kernel_size}


class ConvLSTM2D(_ConvLSTMBase):
    """Convolutional recurrent layer over (batch, time, rows, cols, channels)."""

    def __init__(self, filters: int, kernel_size: tuple[int, int] = (2, 2)):
        super().__init__(filters)
        self.kernel_size = tuple(kernel_size)

    def build(self, d_in: int, rng: np.random.Generator, dtype) -> int:
        kh, kw = self.kernel_size
        f = self.filters
        self.params = {
            "Wx": _init_weight(rng, (kh, kw, d_in, 4 * f), dtype),
            "Wh": _init_weight(rng, (kh, kw, f, 4 * f), dtype),
            "b": np.zeros(4 * f, dtype=dtype),
        }
        self.zero_grads()
        return f

    def _conv(self, x, w):
        return conv2d_same(x, w)

    def _conv_backward(self, x, w, dy):
        return conv2d_same_backward(x, w, dy)

    def config(self) -> dict:
        return {
            "type": "convlstm2d",
            "filters": self.filters,
            "kernel_size": list(self.kernel_size),
        }


class GlobalMaxPool(Layer):
    """Max over all spatial axes, keeping batch, time, and channels.

    (B, T, L, C) -> (B, T, C) and (B, T, H, W, C) -> (B, T, C).  The
    backward pass routes each gradient entry to the first position that
    attained the maximum.
    """

    def build(self, d_in: int, rng: np.random.Generator, dtype) -> int:
        return d_in

    def forward(self, x: np.ndarray) -> np.ndarray:
        batch, steps = x.shape[0], x.shape[1]
        channels = x.shape[-1]
        flat = x.reshape(batch, steps, -1, channels)
        idx = np.argmax(flat, axis=2)
        out = np.take_along_axis(flat, idx[:, :, None, :], axis=2)[:, :, 0, :]
        self.cache = (x.shape, idx)
        return out

    def backward(self, dy: np.ndarray) -> np.ndarray:
        shape, idx = self.cache
        batch, steps = shape[0], shape[1]
        channels = shape[-1]
        dflat = np.zeros((batch, steps, int(np.prod(shape[2:-1])), channels), dtype=dy.dtype)
        np.put_along_axis(dflat, idx[:, :, None, :], dy[:, :, None, :], axis=2)
        return dflat.reshape(shape)

    def config(self) -> dict:
        return {"type": "globalmaxpool"}


LAYER_TYPES = {
    "dense": lambda cfg: Dense(cfg["units"], cfg.get("activation", "linear")),
    "lstm": lambda cfg: LSTM(cfg["units"]),
    "convlstm1d": lambda cfg: ConvLSTM1D(cfg["filters"], cfg.get("kernel_size", 3)),
    "convlstm2d": lambda cfg: ConvLSTM2D(
        cfg["filters"], tuple(cfg.get("kernel_size", (2, 2)))
    ),
    "globalmaxpool": lambda cfg: GlobalMaxPool(),
}


def layer_from_config(cfg: dict) -> Layer:
    kind = cfg.get("type")
    if kind not in LAYER_TYPES:
        raise InvalidInstanceError(f"unknown layer type {kind!r}")
    return LAYER_TYPES[kind](cfg)
