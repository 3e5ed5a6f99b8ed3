"""Encoder-classifier architecture: shape arithmetic, parameters, init.

The network is a 1-D CNN: one unpadded head convolution, then `n_blocks`
blocks of [same-padded conv, ELU, same-padded conv, ELU, max-pool 2], then a
flatten, a dense latent layer with ReLU (the representation), and a dense
softmax output layer. With the default settings the trainable parameter
count is 686,756 and the per-stage lengths are
512 -> 449 -> 224 -> 112 -> 56 -> 28 -> 14 (flatten 448).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from ..seeding import rng_from


@dataclass(frozen=True)
class ArchitectureSpec:
    input_len: int = 512
    kernel: int = 64
    channels: int = 32
    n_blocks: int = 5
    latent_dim: int = 64
    n_classes: int = 4

    def __post_init__(self):
        for name in ("input_len", "kernel", "channels", "n_blocks", "latent_dim", "n_classes"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_classes < 2:
            raise ConfigurationError("n_classes must be >= 2")
        # Validate the shape chain eagerly.
        self.block_lengths()

    def head_out_len(self) -> int:
        out = self.input_len - self.kernel + 1
        if out < 2:
            raise ConfigurationError(
                f"head conv output length {out} < 2 (input_len={self.input_len}, "
                f"kernel={self.kernel})"
            )
        return out

    def block_lengths(self) -> list[int]:
        """Sequence length after the head conv and after each pooling stage."""
        lengths = [self.head_out_len()]
        cur = lengths[0]
        for i in range(self.n_blocks):
            if cur < 2:
                raise ConfigurationError(
                    f"sequence length {cur} too short to pool in block {i + 1}; "
                    "reduce n_blocks or kernel, or increase input_len"
                )
            cur //= 2
            lengths.append(cur)
        return lengths

    @property
    def flat_dim(self) -> int:
        return self.block_lengths()[-1] * self.channels

    def layer_param_counts(self) -> dict[str, int]:
        k, c = self.kernel, self.channels
        return {
            "head_conv": k * 1 * c + c,
            "block_conv": k * c * c + c,
            "latent_dense": self.flat_dim * self.latent_dim + self.latent_dim,
            "output_dense": self.latent_dim * self.n_classes + self.n_classes,
        }

    def param_count(self) -> int:
        counts = self.layer_param_counts()
        return (
            counts["head_conv"]
            + 2 * self.n_blocks * counts["block_conv"]
            + counts["latent_dense"]
            + counts["output_dense"]
        )

    def to_dict(self) -> dict:
        return {
            "input_len": self.input_len,
            "kernel": self.kernel,
            "channels": self.channels,
            "n_blocks": self.n_blocks,
            "latent_dim": self.latent_dim,
            "n_classes": self.n_classes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArchitectureSpec":
        return cls(**{k: int(v) for k, v in d.items()})


@dataclass
class ModelParams:
    """All trainable tensors, float64. conv_w[i] has shape (K, C_in, C_out)."""

    conv_w: list[np.ndarray]
    conv_b: list[np.ndarray]
    w_latent: np.ndarray
    b_latent: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray

    def as_list(self) -> list[np.ndarray]:
        """Canonical flat ordering, shared by gradients and Adam state."""
        out = []
        for w, b in zip(self.conv_w, self.conv_b):
            out.extend((w, b))
        out.extend((self.w_latent, self.b_latent, self.w_out, self.b_out))
        return out

    def named_arrays(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, (w, b) in enumerate(zip(self.conv_w, self.conv_b)):
            out.append((f"conv_w_{i}", w))
            out.append((f"conv_b_{i}", b))
        out.extend(
            [
                ("w_latent", self.w_latent),
                ("b_latent", self.b_latent),
                ("w_out", self.w_out),
                ("b_out", self.b_out),
            ]
        )
        return out

    def param_count(self) -> int:
        return sum(a.size for a in self.as_list())

    def copy(self) -> "ModelParams":
        return ModelParams(
            conv_w=[w.copy() for w in self.conv_w],
            conv_b=[b.copy() for b in self.conv_b],
            w_latent=self.w_latent.copy(),
            b_latent=self.b_latent.copy(),
            w_out=self.w_out.copy(),
            b_out=self.b_out.copy(),
        )

    @classmethod
    def zeros_like(cls, other: "ModelParams") -> "ModelParams":
        return cls(
            conv_w=[np.zeros_like(w) for w in other.conv_w],
            conv_b=[np.zeros_like(b) for b in other.conv_b],
            w_latent=np.zeros_like(other.w_latent),
            b_latent=np.zeros_like(other.b_latent),
            w_out=np.zeros_like(other.w_out),
            b_out=np.zeros_like(other.b_out),
        )


def _glorot_uniform(rng: np.random.Generator, shape: tuple, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(spec: ArchitectureSpec, seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases; deterministic per seed."""
    rng = rng_from(seed, "init_params")
    k, c = spec.kernel, spec.channels
    conv_w = [_glorot_uniform(rng, (k, 1, c), fan_in=k * 1, fan_out=k * c)]
    conv_b = [np.zeros(c)]
    for _ in range(2 * spec.n_blocks):
        conv_w.append(_glorot_uniform(rng, (k, c, c), fan_in=k * c, fan_out=k * c))
        conv_b.append(np.zeros(c))
    w_latent = _glorot_uniform(
        rng, (spec.flat_dim, spec.latent_dim), fan_in=spec.flat_dim, fan_out=spec.latent_dim
    )
    b_latent = np.zeros(spec.latent_dim)
    w_out = _glorot_uniform(
        rng, (spec.latent_dim, spec.n_classes), fan_in=spec.latent_dim, fan_out=spec.n_classes
    )
    b_out = np.zeros(spec.n_classes)
    return ModelParams(conv_w, conv_b, w_latent, b_latent, w_out, b_out)
