"""Training configuration for the four calibration model kinds."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Union

from ..errors import InvalidConfig

KINDS = ("rfr", "svr", "cnn", "cnn_lstm")


@dataclass(frozen=True)
class RfrConfig:
    n_trees: int = 10
    bootstrap: bool = True
    max_depth: int | None = None
    min_samples_leaf: int = 1

    def validate(self):
        if self.n_trees < 1 or self.min_samples_leaf < 1:
            raise InvalidConfig("n_trees and min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class SvrConfig:
    C: float = 1.0
    epsilon: float = 0.1
    gamma: Union[float, str] = "scale"
    tol: float = 1e-3
    max_iter: int = 1_000_000

    def validate(self):
        if self.C <= 0 or self.epsilon < 0 or self.tol <= 0:
            raise InvalidConfig("need C > 0, epsilon >= 0, tol > 0")
        if self.gamma != "scale" and not (isinstance(self.gamma, (int, float)) and self.gamma > 0):
            raise InvalidConfig("gamma must be 'scale' or a positive number")


@dataclass(frozen=True)
class FitSchedule:
    epochs: int = 200
    batch_size: int = 64
    patience: int = 20


@dataclass(frozen=True)
class CnnConfig:
    filters: int = 32
    dilations: tuple[int, ...] = (1, 2, 4, 8, 16, 32)
    kernel_size: int = 2
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    schedule: FitSchedule = field(default_factory=FitSchedule)

    @property
    def conv_layers(self) -> int:
        return len(self.dilations)

    def validate(self):
        d = self.dilations
        if not d or d[0] != 1 or any(b != 2 * a for a, b in zip(d, d[1:])):
            raise InvalidConfig("dilations must double from 1")
        if self.filters < 1 or self.kernel_size < 1 or self.lr < 0:
            raise InvalidConfig("bad CNN shape or learning rate")


@dataclass(frozen=True)
class CnnLstmConfig:
    filters: int = 32
    kernel_size: int = 2
    lstm_units: int = 32
    lstm_layers: int = 2
    lr: float = 1e-2
    clip_norm: float = 1.0
    schedule: FitSchedule = field(default_factory=FitSchedule)

    def validate(self):
        if self.filters < 1 or self.lstm_units < 1 or self.lstm_layers < 1 or self.lr < 0:
            raise InvalidConfig("bad CNN-LSTM shape or learning rate")


KindConfig = Union[RfrConfig, SvrConfig, CnnConfig, CnnLstmConfig]
_DEFAULTS = {"rfr": RfrConfig, "svr": SvrConfig, "cnn": CnnConfig, "cnn_lstm": CnnLstmConfig}


@dataclass(frozen=True)
class TrainConfig:
    kind: str
    validation_fraction: float = 0.2
    seed: int = 0
    model: KindConfig | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfig(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if self.model is None:
            object.__setattr__(self, "model", _DEFAULTS[self.kind]())
        elif not isinstance(self.model, _DEFAULTS[self.kind]):
            raise InvalidConfig(f"{self.kind} needs a {_DEFAULTS[self.kind].__name__}")
        if not 0.0 < self.validation_fraction < 1.0:
            raise InvalidConfig("validation_fraction must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be a non-negative 64-bit integer")
        self.model.validate()

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        kind = d["kind"]
        block = dict(d.get("model") or {})
        if "schedule" in block:
            block["schedule"] = FitSchedule(**block["schedule"])
        if "dilations" in block:
            block["dilations"] = tuple(block["dilations"])
        return cls(kind, d.get("validation_fraction", 0.2), d.get("seed", 0), _DEFAULTS[kind](**block))
