"""Forward pass, loss, and backpropagation for the encoder-classifier."""

from __future__ import annotations

import numpy as np

from ..dsp import Window
from ..errors import ContractViolation
from . import ops
from .arch import ArchitectureSpec, ModelParams

PROB_FLOOR = 1e-12


def stack_windows(windows) -> np.ndarray:
    """(B, T) float64 matrix from a sequence of Windows (or pass through)."""
    if isinstance(windows, np.ndarray):
        x = np.asarray(windows, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        return x
    return np.stack([np.asarray(w.values, dtype=np.float64) for w in windows])


def _check_input(spec: ArchitectureSpec, x: np.ndarray) -> None:
    if x.ndim != 2 or x.shape[1] != spec.input_len:
        raise ContractViolation(
            f"expected batch of shape (B, {spec.input_len}), got {x.shape}"
        )


def _forward_cached(spec: ArchitectureSpec, params: ModelParams, x: np.ndarray) -> dict:
    """Run the network, keeping every intermediate needed for backprop."""
    _check_input(spec, x)
    cache: dict = {"x": x}
    h = x[:, :, None]  # (B, T, 1)
    # Head convolution: valid padding, no activation.
    cache["head_in"] = h
    h = ops.conv1d_valid_forward(h, params.conv_w[0], params.conv_b[0])
    blocks = []
    li = 1
    for _ in range(spec.n_blocks):
        blk: dict = {}
        blk["in1"] = h
        a1 = ops.conv1d_same_forward(h, params.conv_w[li], params.conv_b[li])
        blk["pre1"], blk["act1"] = a1, ops.elu_forward(a1)
        blk["in2"] = blk["act1"]
        a2 = ops.conv1d_same_forward(blk["act1"], params.conv_w[li + 1], params.conv_b[li + 1])
        blk["pre2"], blk["act2"] = a2, ops.elu_forward(a2)
        pooled, idx = ops.maxpool2_forward(blk["act2"])
        blk["pool_idx"], blk["pool_in_len"] = idx, blk["act2"].shape[1]
        h = pooled
        blocks.append(blk)
        li += 2
    cache["blocks"] = blocks
    b = h.shape[0]
    flat = h.reshape(b, -1)
    cache["pool_out_shape"] = h.shape
    cache["flat"] = flat
    pre_latent = ops.dense_forward(flat, params.w_latent, params.b_latent)
    cache["pre_latent"] = pre_latent
    latent = ops.relu_forward(pre_latent)
    cache["latent"] = latent
    logits = ops.dense_forward(latent, params.w_out, params.b_out)
    cache["logits"] = logits
    cache["probs"] = ops.softmax(logits)
    return cache


def forward(
    spec: ArchitectureSpec, params: ModelParams, batch
) -> tuple[np.ndarray, np.ndarray]:
    """Returns (latents (B, d), class probabilities (B, n_classes))."""
    cache = _forward_cached(spec, params, stack_windows(batch))
    return cache["latent"], cache["probs"]


def encode(spec: ArchitectureSpec, params: ModelParams, windows, chunk: int = 256) -> np.ndarray:
    """Frozen-encoder feature extraction: latent vectors only, (N, d)."""
    x = stack_windows(windows)
    outs = []
    for start in range(0, x.shape[0], chunk):
        latents, _ = forward(spec, params, x[start : start + chunk])
        outs.append(latents)
    return np.concatenate(outs, axis=0)


def labels_to_indices(labels) -> np.ndarray:
    """Transform-class labels (1..4) to zero-based class indices."""
    y = np.asarray(labels, dtype=np.int64)
    if y.ndim != 1:
        raise ContractViolation("labels must be a 1-D sequence")
    if y.min() < 1:
        raise ContractViolation("transform-class labels are 1-based")
    return y - 1


def cross_entropy_loss(probs: np.ndarray, labels) -> float:
    """Mean negative log-probability of the true class, probabilities
    floored at 1e-12."""
    idx = labels_to_indices(labels)
    if probs.shape[0] != idx.shape[0]:
        raise ContractViolation(
            f"{probs.shape[0]} probability rows vs {idx.shape[0]} labels"
        )
    p = np.clip(probs[np.arange(len(idx)), idx], PROB_FLOOR, None)
    return float(-np.log(p).mean())


def _backward_from_cache(
    spec: ArchitectureSpec, params: ModelParams, cache: dict, labels_idx: np.ndarray
) -> ModelParams:
    grads = ModelParams.zeros_like(params)
    probs = cache["probs"]
    b = probs.shape[0]
    dlogits = probs.copy()
    dlogits[np.arange(b), labels_idx] -= 1.0
    dlogits /= b
    dlatent, grads.w_out[...], grads.b_out[...] = ops.dense_backward(
        cache["latent"], params.w_out, dlogits
    )
    dpre_latent = ops.relu_backward(cache["pre_latent"], dlatent)
    dflat, grads.w_latent[...], grads.b_latent[...] = ops.dense_backward(
        cache["flat"], params.w_latent, dpre_latent
    )
    dh = dflat.reshape(cache["pool_out_shape"])
    li = 2 * spec.n_blocks
    for blk in reversed(cache["blocks"]):
        dact2 = ops.maxpool2_backward(dh, blk["pool_idx"], blk["pool_in_len"])
        dpre2 = ops.elu_backward(blk["pre2"], blk["act2"], dact2)
        dact1, grads.conv_w[li][...], grads.conv_b[li][...] = ops.conv1d_same_backward(
            blk["in2"], params.conv_w[li], dpre2
        )
        dpre1 = ops.elu_backward(blk["pre1"], blk["act1"], dact1)
        dh, grads.conv_w[li - 1][...], grads.conv_b[li - 1][...] = ops.conv1d_same_backward(
            blk["in1"], params.conv_w[li - 1], dpre1
        )
        li -= 2
    _, grads.conv_w[0][...], grads.conv_b[0][...] = ops.conv1d_valid_backward(
        cache["head_in"], params.conv_w[0], dh
    )
    return grads


def loss_and_gradients(
    spec: ArchitectureSpec, params: ModelParams, batch, labels
) -> tuple[float, np.ndarray, ModelParams]:
    """One combined pass: (loss, probs, gradients) for a labeled batch."""
    x = stack_windows(batch)
    idx = labels_to_indices(labels)
    cache = _forward_cached(spec, params, x)
    loss = cross_entropy_loss(cache["probs"], labels)
    grads = _backward_from_cache(spec, params, cache, idx)
    return loss, cache["probs"], grads


def backward(spec: ArchitectureSpec, params: ModelParams, batch, labels) -> ModelParams:
    """Gradient of the mean cross-entropy loss w.r.t. every parameter."""
    _, _, grads = loss_and_gradients(spec, params, batch, labels)
    return grads
