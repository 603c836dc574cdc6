"""A small reverse-mode differentiation kernel for sequence regressors.

Every layer caches what it needs on ``forward`` and, on ``backward``, takes the
gradient of the loss with respect to its output, accumulates gradients into its
parameters and returns the gradient with respect to its input. Arrays are
``(batch, time, channels)`` until ``Flatten`` or a final-state LSTM.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class Param:
    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.array(value, dtype=np.float64, order="C")
        self.grad = np.zeros_like(self.value)


def glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def orthogonal(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    return q if rows >= cols else q.T


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


class Layer:
    def params(self) -> list[Param]:
        return []

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Conv1D(Layer):
    """Dilated 1-D convolution with ``same`` padding.

    The ``d * (k - 1)`` padding zeros are split with the smaller half on the left.
    """

    def __init__(self, in_channels: int, filters: int, kernel_size: int, dilation: int,
                 rng: np.random.Generator, name: str = "conv"):
        self.k, self.d, self.cin, self.cout = kernel_size, dilation, in_channels, filters
        total = dilation * (kernel_size - 1)
        self.pad_left, self.pad_right = total // 2, total - total // 2
        self.W = Param(f"{name}.W", glorot(rng, (kernel_size * in_channels, filters),
                                           kernel_size * in_channels, kernel_size * filters))
        self.b = Param(f"{name}.b", np.zeros(filters))

    def params(self):
        return [self.W, self.b]

    def forward(self, x):
        B, L, C = x.shape
        xp = np.pad(x, ((0, 0), (self.pad_left, self.pad_right), (0, 0)))
        cols = np.concatenate([xp[:, i * self.d:i * self.d + L, :] for i in range(self.k)], axis=2)
        self._shape, self._cols = x.shape, cols
        return cols @ self.W.value + self.b.value

    def backward(self, dout):
        B, L, C = self._shape
        self.W.grad += np.einsum("blk,blf->kf", self._cols, dout)
        self.b.grad += dout.sum(axis=(0, 1))
        dcols = dout @ self.W.value.T
        dxp = np.zeros((B, L + self.pad_left + self.pad_right, C))
        for i in range(self.k):
            dxp[:, i * self.d:i * self.d + L, :] += dcols[:, :, i * C:(i + 1) * C]
        return dxp[:, self.pad_left:self.pad_left + L, :]


class ReLU(Layer):
    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dout):
        return np.where(self._mask, dout, 0.0)


class Flatten(Layer):
    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)


class Dense(Layer):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, name: str = "dense"):
        self.W = Param(f"{name}.W", glorot(rng, (n_in, n_out), n_in, n_out))
        self.b = Param(f"{name}.b", np.zeros(n_out))

    def params(self):
        return [self.W, self.b]

    def forward(self, x):
        self._x = x
        return x @ self.W.value + self.b.value

    def backward(self, dout):
        self.W.grad += self._x.T @ dout
        self.b.grad += dout.sum(axis=0)
        return dout @ self.W.value.T


class LSTM(Layer):
    """Gate order i, f, g, o; forget-gate bias starts at one."""

    def __init__(self, n_in: int, units: int, rng: np.random.Generator, return_sequences: bool,
                 name: str = "lstm"):
        H = units
        self.H, self.return_sequences = H, return_sequences
        self.Wx = Param(f"{name}.Wx", glorot(rng, (n_in, 4 * H), n_in, 4 * H))
        self.Wh = Param(f"{name}.Wh", orthogonal(rng, H, 4 * H))
        b = np.zeros(4 * H)
        b[H:2 * H] = 1.0
        self.b = Param(f"{name}.b", b)

    def params(self):
        return [self.Wx, self.Wh, self.b]

    def forward(self, x):
        B, T, _ = x.shape
        H = self.H
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        self._x = x
        self._cache = []
        hs = np.empty((B, T, H))
        xw = x @ self.Wx.value + self.b.value
        for t in range(T):
            z = xw[:, t] + h @ self.Wh.value
            i = sigmoid(z[:, :H])
            f = sigmoid(z[:, H:2 * H])
            g = np.tanh(z[:, 2 * H:3 * H])
            o = sigmoid(z[:, 3 * H:])
            c_new = f * c + i * g
            tc = np.tanh(c_new)
            self._cache.append((h, c, i, f, g, o, tc))
            h, c = o * tc, c_new
            hs[:, t] = h
        return hs if self.return_sequences else h

    def backward(self, dout):
        x = self._x
        B, T, _ = x.shape
        H = self.H
        if self.return_sequences:
            dh_seq = dout
        else:
            dh_seq = np.zeros((B, T, H))
            dh_seq[:, -1] = dout
        dx = np.empty_like(x)
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        Wx, Wh = self.Wx.value, self.Wh.value
        for t in reversed(range(T)):
            h_prev, c_prev, i, f, g, o, tc = self._cache[t]
            dh = dh_seq[:, t] + dh_next
            dc = dc_next + dh * o * (1.0 - tc * tc)
            dz = np.concatenate([
                dc * g * i * (1.0 - i),
                dc * c_prev * f * (1.0 - f),
                dc * i * (1.0 - g * g),
                dh * tc * o * (1.0 - o),
            ], axis=1)
            self.Wx.grad += x[:, t].T @ dz
            self.Wh.grad += h_prev.T @ dz
            self.b.grad += dz.sum(axis=0)
            dx[:, t] = dz @ Wx.T
            dh_next = dz @ Wh.T
            dc_next = dc * f
        return dx


class Sequential:
    def __init__(self, layers: list[Layer]):
        self.layers = layers

    def params(self) -> list[Param]:
        return [p for layer in self.layers for p in layer.params()]

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, dout: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout

    def zero_grad(self) -> None:
        for p in self.params():
            p.grad[...] = 0.0

    def predict(self, x: np.ndarray, batch: int = 4096) -> np.ndarray:
        out = [self.forward(x[s:s + batch]) for s in range(0, x.shape[0], batch)]
        return np.concatenate(out).reshape(-1)

    def get_weights(self) -> list[np.ndarray]:
        return [p.value.copy() for p in self.params()]

    def set_weights(self, weights: list[np.ndarray]) -> None:
        params = self.params()
        if len(params) != len(weights):
            raise ValueError("weight list does not match the network")
        for p, w in zip(params, weights):
            if p.value.shape != w.shape:
                raise ValueError(f"shape mismatch for {p.name}")
            p.value = np.array(w, dtype=np.float64, order="C")
            p.grad = np.zeros_like(p.value)


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over the batch and its gradient w.r.t. ``pred``."""
    pred = pred.reshape(target.shape[0], -1)
    diff = pred - target.reshape(pred.shape)
    n = diff.size
    return float(np.sum(diff * diff) / n), 2.0 * diff / n


def loss_and_grad(net: Sequential, x: np.ndarray, y: np.ndarray) -> float:
    net.zero_grad()
    out = net.forward(x)
    loss, dout = mse_loss(out, y)
    net.backward(dout.reshape(out.shape))
    return loss


class Adam:
    def __init__(self, params: list[Param], lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params, self.lr, self.b1, self.b2, self.eps = params, lr, beta1, beta2, eps
        self.m = [np.zeros_like(p.value) for p in params]
        self.v = [np.zeros_like(p.value) for p in params]
        self.t = 0

    def step(self) -> None:
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * p.grad
            v *= self.b2
            v += (1.0 - self.b2) * p.grad * p.grad
            p.value -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class SGD:
    """Plain gradient descent with optional global-norm clipping."""

    def __init__(self, params: list[Param], lr=1e-2, clip_norm: float | None = 1.0):
        self.params, self.lr, self.clip_norm = params, lr, clip_norm

    def step(self) -> None:
        scale = 1.0
        if self.clip_norm is not None:
            norm = math.sqrt(sum(float(np.sum(p.grad * p.grad)) for p in self.params))
            if norm > self.clip_norm:
                scale = self.clip_norm / norm
        for p in self.params:
            p.value -= self.lr * scale * p.grad


@dataclass(frozen=True)
class GradientCheck:
    max_rel_error: float
    checked: int
    skipped_kinks: int


def _relu_masks(net: Sequential) -> list[np.ndarray]:
    return [layer._mask for layer in net.layers if isinstance(layer, ReLU)]


def check_gradients(net: Sequential, x: np.ndarray, y: np.ndarray, eps: float = 1e-5,
                    n_params: int = 200, rng: np.random.Generator | None = None,
                    floor: float = 1e-8) -> GradientCheck:
    """Largest relative gap between backprop and central differences.

    The relative error of one coordinate is ``|a - n| / max(|a|, |n|, floor)``;
    the floor keeps exactly-zero gradients (unused dilated taps) from dividing
    by zero. The loss difference is formed per sample as
    ``(p+ - p-)(p+ + p- - 2y)`` to avoid cancelling two nearly equal sums.
    Coordinates whose perturbation flips any ReLU mask sit on a kink where the
    loss is not differentiable; they are skipped and counted.
    """
    rng = rng or np.random.default_rng(0)
    params = net.params()
    loss_and_grad(net, x, y)
    analytic = [p.grad.copy() for p in params]
    base = [m.copy() for m in _relu_masks(net)]
    sizes = np.array([p.value.size for p in params])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    order = rng.permutation(int(sizes.sum()))
    target = y.reshape(y.shape[0], -1)
    worst, checked, skipped = 0.0, 0, 0

    def run() -> tuple[np.ndarray, bool]:
        out = net.forward(x).reshape(target.shape)
        flipped = any((m != b).any() for m, b in zip(_relu_masks(net), base))
        return out, flipped

    for flat in order:
        if checked >= n_params:
            break
        k = int(np.searchsorted(offsets, flat, side="right") - 1)
        p, idx = params[k], np.unravel_index(flat - offsets[k], params[k].value.shape)
        orig = p.value[idx]
        p.value[idx] = orig + eps
        up, f_up = run()
        p.value[idx] = orig - eps
        down, f_down = run()
        p.value[idx] = orig
        if f_up or f_down:
            skipped += 1
            continue
        numeric = float(np.sum((up - down) * (up + down - 2.0 * target))) / target.size / (2 * eps)
        a = float(analytic[k][idx])
        worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), floor))
        checked += 1
    return GradientCheck(worst, checked, skipped)
