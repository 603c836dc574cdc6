"""Common train/predict contract over the four model kinds."""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..errors import BadRowWidth, NonFiniteInput, TooFewSamples, ZeroVarianceColumn
from ..matching import MatchedDataSet
from .config import CnnConfig, CnnLstmConfig, RfrConfig, SvrConfig, TrainConfig
from .forest import Forest, fit_forest
from .neural import as_sequences, build_network, fit_network, make_optimizer
from .nn import Sequential
from .svr import SvrSolution, solve_svr

log = logging.getLogger(__name__)

N_FEATURES = 6
MIN_SAMPLES = 10


@dataclass(frozen=True, eq=False)
class Scaler:
    """Per-column feature standardization plus a target mean/std."""

    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float = 0.0
    y_std: float = 1.0

    @classmethod
    def identity(cls, d: int = N_FEATURES) -> "Scaler":
        return cls(np.zeros(d), np.ones(d))

    @classmethod
    def fit(cls, X: np.ndarray, y: np.ndarray) -> "Scaler":
        x_mean = X.mean(axis=0)
        x_std = X.std(axis=0)
        bad = np.flatnonzero(x_std == 0)
        if bad.size:
            raise ZeroVarianceColumn(f"feature column(s) {bad.tolist()} have zero variance")
        y_std = float(y.std())
        # a constant target needs no scaling; the models then predict its mean exactly
        return cls(x_mean, x_std, float(y.mean()), y_std if y_std > 0 else 1.0)

    def x(self, X: np.ndarray) -> np.ndarray:
        return (X - self.x_mean) / self.x_std

    def y(self, y: np.ndarray) -> np.ndarray:
        return (y - self.y_mean) / self.y_std

    def y_inverse(self, z: np.ndarray) -> np.ndarray:
        return z * self.y_std + self.y_mean


Params = Union[Forest, SvrSolution, Sequential]


@dataclass(frozen=True, eq=False)
class Model:
    kind: str
    config: TrainConfig
    params: Params
    scaler: Scaler
    metadata: dict = field(default_factory=dict)


def fingerprint(dataset: MatchedDataSet) -> str:
    h = hashlib.blake2b(digest_size=8)
    h.update(np.ascontiguousarray(dataset.features, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(dataset.labels, dtype="<f8").tobytes())
    return h.hexdigest()


def split_train_val(dataset: MatchedDataSet, fraction: float = 0.2,
                    seed: int = 0) -> tuple[MatchedDataSet, MatchedDataSet]:
    """Seeded shuffle, then the first ``ceil((1 - f) n)`` rows train."""
    n = len(dataset)
    if n < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} samples, got {n}")
    n_train = math.ceil(round((1.0 - fraction) * n, 9))
    order = np.random.default_rng(seed).permutation(n)
    return dataset.subset(np.sort(order[:n_train])), dataset.subset(np.sort(order[n_train:]))


def _svr_gamma(cfg: SvrConfig, Xs: np.ndarray) -> float:
    if cfg.gamma != "scale":
        return float(cfg.gamma)
    var = float(Xs.var())
    return 1.0 / (Xs.shape[1] * var) if var > 0 else 1.0


def train_model(dataset: MatchedDataSet, config: TrainConfig) -> Model:
    """Fit on the training split of ``dataset``; the validation MAE (ppm) goes
    into the metadata together with the config and a data fingerprint."""
    train, val = split_train_val(dataset, config.validation_fraction, config.seed)
    X, y = train.features, train.labels
    cfg = config.model
    meta: dict = {"n_train": len(train), "n_val": len(val), "fingerprint": fingerprint(dataset),
                  "config": json.loads(json.dumps(config.to_dict()))}
    if isinstance(cfg, RfrConfig):
        scaler = Scaler.identity(X.shape[1])
        params: Params = fit_forest(X, y, cfg.n_trees, cfg.bootstrap, cfg.max_depth,
                                    cfg.min_samples_leaf, config.seed)
    else:
        scaler = Scaler.fit(X, y)
        Xs, ys = scaler.x(X), scaler.y(y)
        if isinstance(cfg, SvrConfig):
            gamma = _svr_gamma(cfg, Xs)
            params, _ = solve_svr(Xs, ys, cfg.C, cfg.epsilon, gamma, cfg.tol, cfg.max_iter)
            meta.update(converged=params.converged, iterations=params.iterations, gamma=gamma)
            if not params.converged:
                log.warning("SVR hit the iteration cap (%d) before reaching tol", cfg.max_iter)
        elif isinstance(cfg, (CnnConfig, CnnLstmConfig)):
            rng = np.random.default_rng(config.seed)
            net = build_network(cfg, rng, seq_len=X.shape[1])
            hist = fit_network(net, make_optimizer(cfg, net), Xs, ys, scaler.x(val.features),
                               scaler.y(val.labels), cfg.schedule, rng, scaler.y_std)
            params = net
            meta.update(val_mae_history=hist.val_mae, train_loss_history=hist.train_loss,
                        best_epoch=hist.best_epoch)
        else:  # pragma: no cover - TrainConfig validates the block type
            raise TypeError(type(cfg).__name__)
    model = Model(config.kind, config, params, scaler, meta)
    meta["val_mae"] = float(np.mean(np.abs(_predict(model, val.features) - val.labels)))
    return model


def _predict(model: Model, X: np.ndarray) -> np.ndarray:
    if X.shape[0] == 0:
        return np.empty(0)
    p = model.params
    if isinstance(p, Forest):
        return p.predict(X)
    Xs = model.scaler.x(X)
    if isinstance(p, SvrSolution):
        return model.scaler.y_inverse(p.decision(Xs))
    return model.scaler.y_inverse(p.predict(as_sequences(Xs)))


def predict(model: Model, features) -> np.ndarray:
    """One ppm prediction per 6-value row."""
    try:
        X = np.asarray(features, dtype=np.float64)
    except ValueError:
        raise BadRowWidth("rows have unequal lengths") from None
    if X.ndim == 1 and X.size == 0:
        X = X.reshape(0, N_FEATURES)
    if X.ndim != 2 or X.shape[1] != N_FEATURES:
        width = X.shape[-1] if X.ndim else 0
        raise BadRowWidth(f"expected rows of {N_FEATURES} values, got width {width}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("feature rows must be finite")
    return _predict(model, X)
