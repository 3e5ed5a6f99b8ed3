"""Adam optimization and pretext-task training."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..augment import ALL_CLASSES, LabeledWindow
from ..errors import ConfigurationError, ContractViolation
from ..seeding import rng_from
from .arch import ArchitectureSpec, ModelParams, init_params
from .model import cross_entropy_loss, encode, forward, loss_and_gradients, stack_windows

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-7


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    decay: float = 0.0
    batch_size: int = 64
    epochs: int = 400
    seed: int = 0
    repeats: int = 1

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigurationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.decay < 0:
            raise ConfigurationError(f"decay must be >= 0, got {self.decay}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ConfigurationError(f"epochs must be >= 0, got {self.epochs}")
        if self.repeats < 1:
            raise ConfigurationError(f"repeats must be >= 1, got {self.repeats}")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "decay": self.decay,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "seed": self.seed,
            "repeats": self.repeats,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(
            learning_rate=float(d["learning_rate"]),
            decay=float(d["decay"]),
            batch_size=int(d["batch_size"]),
            epochs=int(d["epochs"]),
            seed=int(d["seed"]),
            repeats=int(d["repeats"]),
        )


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        arrays = params.as_list()
        return cls(m=[np.zeros_like(a) for a in arrays], v=[np.zeros_like(a) for a in arrays])


def adam_step(
    params: ModelParams, grads: ModelParams, state: AdamState, config: TrainConfig
) -> tuple[ModelParams, AdamState]:
    """One Adam update with inverse-time learning-rate decay.

    lr_t = lr0 / (1 + decay * t) with t the 1-based update count (the same t
    used by the bias correction). Updates params and state in place and
    returns them.
    """
    t = state.t + 1
    lr_t = config.learning_rate / (1.0 + config.decay * t)
    bc1 = 1.0 - ADAM_BETA1**t
    bc2 = 1.0 - ADAM_BETA2**t
    for p, g, m, v in zip(params.as_list(), grads.as_list(), state.m, state.v):
        if p.shape != g.shape:
            raise ContractViolation(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * np.square(g)
        p -= lr_t * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
    state.t = t
    return params, state


@dataclass
class TrainTrace:
    """Per-epoch training diagnostics.

    Loss is the sample-weighted mean over the epoch's batches; AUC is the
    macro one-vs-rest AUC of the probabilities each batch produced before its
    update (a streaming training metric, not a held-out score).
    """

    loss: list[float] = field(default_factory=list)
    auc: list[float] = field(default_factory=list)


def macro_ovr_auc(probs: np.ndarray, labels) -> float:
    """Macro-averaged one-vs-rest AUC for the 4-class pretext task."""
    from ..detectors import auc  # local import: detectors does not import nn

    y = np.asarray(labels, dtype=np.int64)
    per_class = []
    for cls_label, col in zip(ALL_CLASSES, range(probs.shape[1])):
        mask = y == cls_label
        if mask.all() or not mask.any():
            continue
        per_class.append(auc(probs[~mask, col], probs[mask, col]))
    if not per_class:
        raise ContractViolation("macro AUC needs at least two classes present")
    return float(np.mean(per_class))


def _dataset_arrays(dataset: list[LabeledWindow]) -> tuple[np.ndarray, np.ndarray]:
    if not dataset:
        raise ContractViolation("empty pretext dataset")
    x = stack_windows([lw.window for lw in dataset])
    y = np.array([lw.label for lw in dataset], dtype=np.int64)
    return x, y


def train_pretext(
    dataset: list[LabeledWindow], spec: ArchitectureSpec, config: TrainConfig
) -> tuple[ModelParams, TrainTrace]:
    """Train the encoder-classifier on the transformation-classification task.

    Shuffles with a generator seeded from config.seed each epoch, runs
    config.epochs epochs of Adam at config.batch_size, and returns the final
    parameters plus the per-epoch trace. epochs=0 returns the initial
    parameters unchanged.
    """
    x, y = _dataset_arrays(dataset)
    if x.shape[1] != spec.input_len:
        raise ContractViolation(
            f"dataset window length {x.shape[1]} != spec input_len {spec.input_len}"
        )
    params = init_params(spec, config.seed)
    state = AdamState.for_params(params)
    shuffle_rng = rng_from(config.seed, "train_pretext", "shuffle")
    trace = TrainTrace()
    n = x.shape[0]
    for _ in range(config.epochs):
        perm = shuffle_rng.permutation(n)
        loss_sum = 0.0
        epoch_probs = np.empty((n, spec.n_classes))
        for start in range(0, n, config.batch_size):
            sel = perm[start : start + config.batch_size]
            loss, probs, grads = loss_and_gradients(spec, params, x[sel], y[sel])
            adam_step(params, grads, state, config)
            loss_sum += loss * len(sel)
            epoch_probs[sel] = probs
        trace.loss.append(loss_sum / n)
        trace.auc.append(macro_ovr_auc(epoch_probs, y))
    return params, trace


def evaluate_pretext(
    dataset: list[LabeledWindow], spec: ArchitectureSpec, params: ModelParams
) -> tuple[float, float]:
    """(cross-entropy loss, macro one-vs-rest AUC) on a held-out pretext set."""
    x, y = _dataset_arrays(dataset)
    probs_all = []
    for start in range(0, x.shape[0], 256):
        _, probs = forward(spec, params, x[start : start + 256])
        probs_all.append(probs)
    probs = np.concatenate(probs_all, axis=0)
    return cross_entropy_loss(probs, y), macro_ovr_auc(probs, y)
