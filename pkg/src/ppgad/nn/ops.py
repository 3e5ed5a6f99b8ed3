"""Layer primitives with analytic gradients.

Everything operates on float64 arrays of shape (batch, length, channels).
Convolutions are cross-correlations (no kernel flip), matching the usual
deep-learning convention. Backward passes were derived by hand and are
checked against central finite differences in the test suite.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv1d_valid_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """x: (B, L, C_in), w: (K, C_in, C_out) -> (B, L-K+1, C_out)."""
    k = w.shape[0]
    win = sliding_window_view(x, k, axis=1)  # (B, L_out, C_in, K)
    return np.tensordot(win, w, axes=([3, 2], [0, 1])) + b


def conv1d_valid_backward(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (dx, dw, db) for conv1d_valid_forward."""
    k = w.shape[0]
    win = sliding_window_view(x, k, axis=1)  # (B, L_out, C_in, K)
    dw = np.tensordot(win, dy, axes=([0, 1], [0, 1])).transpose(1, 0, 2)  # (K, C_in, C_out)
    db = dy.sum(axis=(0, 1))
    # dx[s] = sum_k dy[s - k] * w[k]: full correlation with the flipped kernel.
    dy_padded = np.pad(dy, ((0, 0), (k - 1, k - 1), (0, 0)))
    dy_win = sliding_window_view(dy_padded, k, axis=1)  # (B, L, C_out, K)
    dx = np.tensordot(dy_win, w[::-1], axes=([3, 2], [0, 2]))  # (B, L, C_in)
    return dx, dw, db


def same_pad_widths(kernel: int) -> tuple[int, int]:
    """Zero-pad widths for 'same' convolution at stride 1 (left, right)."""
    total = kernel - 1
    left = total // 2
    return left, total - left


def conv1d_same_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Same-padded convolution: output length equals input length."""
    left, right = same_pad_widths(w.shape[0])
    xp = np.pad(x, ((0, 0), (left, right), (0, 0)))
    return conv1d_valid_forward(xp, w, b)


def conv1d_same_backward(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    left, right = same_pad_widths(w.shape[0])
    xp = np.pad(x, ((0, 0), (left, right), (0, 0)))
    dxp, dw, db = conv1d_valid_backward(xp, w, dy)
    return dxp[:, left : left + x.shape[1]], dw, db


def elu_forward(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def elu_backward(x: np.ndarray, y: np.ndarray, dy: np.ndarray) -> np.ndarray:
    # For x <= 0 the derivative is exp(x) = y + 1.
    return dy * np.where(x > 0, 1.0, y + 1.0)


def maxpool2_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pool size 2, stride 2; odd trailing element dropped.

    Returns (y, argmax) where argmax has the in-pair index (0 or 1) of the
    maximum, taking the first on ties.
    """
    b, length, c = x.shape
    pooled = length // 2
    pairs = x[:, : 2 * pooled].reshape(b, pooled, 2, c)
    idx = pairs.argmax(axis=2)  # first max wins ties
    y = np.take_along_axis(pairs, idx[:, :, None, :], axis=2).squeeze(2)
    return y, idx


def maxpool2_backward(dy: np.ndarray, idx: np.ndarray, input_len: int) -> np.ndarray:
    b, pooled, c = dy.shape
    dpairs = np.zeros((b, pooled, 2, c))
    np.put_along_axis(dpairs, idx[:, :, None, :], dy[:, :, None, :], axis=2)
    dx = np.zeros((b, input_len, c))
    dx[:, : 2 * pooled] = dpairs.reshape(b, 2 * pooled, c)
    return dx


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    return x @ w + b


def dense_backward(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return dy @ w.T, x.T @ dy, dy.sum(axis=0)


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, dy: np.ndarray) -> np.ndarray:
    return dy * (x > 0)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)
