"""Dilated 1D-CNN and CNN-LSTM regressors built on the layer kernel in ``nn``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteLoss
from .config import CnnConfig, CnnLstmConfig, FitSchedule
from .nn import (LSTM, SGD, Adam, Conv1D, Dense, Flatten, GradientCheck, ReLU, Sequential, check_gradients,
                 loss_and_grad, mse_loss)

SEQ_LEN = 6


def build_network(config: CnnConfig | CnnLstmConfig, rng: np.random.Generator,
                  seq_len: int = SEQ_LEN) -> Sequential:
    layers = []
    if isinstance(config, CnnConfig):
        cin = 1
        for n, d in enumerate(config.dilations):
            layers += [Conv1D(cin, config.filters, config.kernel_size, d, rng, f"conv{n}"), ReLU()]
            cin = config.filters
        layers += [Flatten(), Dense(seq_len * config.filters, 1, rng, "out")]
    elif isinstance(config, CnnLstmConfig):
        layers += [Conv1D(1, config.filters, config.kernel_size, 1, rng, "conv0"), ReLU()]
        cin = config.filters
        for n in range(config.lstm_layers):
            last = n == config.lstm_layers - 1
            layers.append(LSTM(cin, config.lstm_units, rng, return_sequences=not last, name=f"lstm{n}"))
            cin = config.lstm_units
        layers.append(Dense(cin, 1, rng, "out"))
    else:
        raise TypeError(f"not a neural config: {type(config).__name__}")
    return Sequential(layers)


def make_optimizer(config: CnnConfig | CnnLstmConfig, net: Sequential):
    if isinstance(config, CnnConfig):
        return Adam(net.params(), config.lr, config.beta1, config.beta2, config.adam_eps)
    return SGD(net.params(), config.lr, config.clip_norm)


def as_sequences(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return X.reshape(X.shape[0], -1, 1) if X.ndim == 2 else X


@dataclass
class FitHistory:
    train_loss: list[float] = field(default_factory=list)
    val_mae: list[float] = field(default_factory=list)
    best_epoch: int = 0

    @property
    def best_val_mae(self) -> float:
        return self.val_mae[self.best_epoch - 1] if self.val_mae else float("nan")


def fit_network(net: Sequential, optimizer, X: np.ndarray, y: np.ndarray, X_val: np.ndarray,
                y_val: np.ndarray, schedule: FitSchedule, rng: np.random.Generator,
                val_scale: float = 1.0) -> FitHistory:
    """Mini-batch training with early stopping on validation MAE.

    ``val_scale`` converts standardized residuals back to ppm for the log.
    The weights of the best validation epoch are restored at the end.
    """
    X, X_val = as_sequences(X), as_sequences(X_val)
    y = np.asarray(y, dtype=np.float64).reshape(-1, 1)
    hist = FitHistory()
    best = (np.inf, net.get_weights())
    stale = 0
    n = X.shape[0]
    for epoch in range(1, schedule.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, schedule.batch_size):
            idx = order[s:s + schedule.batch_size]
            loss = loss_and_grad(net, X[idx], y[idx])
            if not np.isfinite(loss):
                raise NonFiniteLoss(epoch)
            optimizer.step()
            total += loss * idx.size
        hist.train_loss.append(total / n)
        pred = net.predict(X_val)
        if not np.all(np.isfinite(pred)):
            raise NonFiniteLoss(epoch)
        val = float(np.mean(np.abs(pred - y_val))) * val_scale
        hist.val_mae.append(val)
        if val < best[0]:
            best = (val, net.get_weights())
            hist.best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= schedule.patience:
                break
    net.set_weights(best[1])
    return hist


def gradient_check(config: CnnConfig | CnnLstmConfig, sample_batch, eps: float = 1e-5,
                   n_params: int = 200, seed: int = 0, bias_scale: float = 0.1) -> GradientCheck:
    """Compare backprop with central differences on a random network.

    Weights use the usual initialisers; biases are drawn from N(0, bias_scale)
    instead of zero so that padded positions do not sit exactly on ReLU kinks.
    """
    x, y = sample_batch
    x = as_sequences(x)
    rng = np.random.default_rng(seed)
    net = build_network(config, rng, seq_len=x.shape[1])
    for p in net.params():
        if p.name.endswith(".b"):
            p.value[...] = rng.normal(0.0, bias_scale, p.value.shape)
    return check_gradients(net, x, np.asarray(y, dtype=np.float64).reshape(-1, 1), eps, n_params, rng)


__all__ = ["build_network", "make_optimizer", "fit_network", "gradient_check", "FitHistory",
           "as_sequences", "mse_loss", "GradientCheck"]
