"""Encoder-classifier network: architecture, gradients, Adam training,
frozen-encoder feature extraction."""

from .arch import ArchitectureSpec, ModelParams, init_params
from .model import (
    backward,
    cross_entropy_loss,
    encode,
    forward,
    loss_and_gradients,
    stack_windows,
)
from .train import (
    AdamState,
    TrainConfig,
    TrainTrace,
    adam_step,
    evaluate_pretext,
    macro_ovr_auc,
    train_pretext,
)

__all__ = [
    "ArchitectureSpec",
    "ModelParams",
    "init_params",
    "forward",
    "backward",
    "loss_and_gradients",
    "cross_entropy_loss",
    "encode",
    "stack_windows",
    "TrainConfig",
    "TrainTrace",
    "AdamState",
    "adam_step",
    "train_pretext",
    "evaluate_pretext",
    "macro_ovr_auc",
]
