"""Calibration models: random forest, SVR, dilated CNN and CNN-LSTM."""
from .config import KINDS, CnnConfig, CnnLstmConfig, FitSchedule, RfrConfig, SvrConfig, TrainConfig
from .core import Model, Scaler, fingerprint, predict, split_train_val, train_model
from .neural import gradient_check
from .serialize import dump_model, load_bytes, load_model, save_model

__all__ = ["KINDS", "CnnConfig", "CnnLstmConfig", "FitSchedule", "RfrConfig", "SvrConfig", "TrainConfig",
           "Model", "Scaler", "fingerprint", "predict", "split_train_val", "train_model", "gradient_check",
           "dump_model", "load_bytes", "load_model", "save_model"]
