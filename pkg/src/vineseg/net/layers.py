"""Differentiable layer primitives in NHWC layout.

Each layer caches what its backward pass needs during forward and exposes
`params()` as (name, weight, grad) triples for the optimizer. All math is
plain numpy; dtype follows the weights.
"""

from __future__ import annotations

import numpy as np


def fan_in_uniform(shape, fan_in, rng, dtype):
    """Symmetric uniform init scaled by the input fan (He-style).

    Fan-in scaling keeps activation variance roughly constant through the
    ReLU stack; averaging in the output fan shrinks gradients by orders of
    magnitude over ten layers and stalls training at practical rates.
    """
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def _windows(x_pad, k, stride, out_h, out_w):
    """Strided (N, out_h, out_w, k, k, C) view of a padded NHWC array."""
    n, _, _, c = x_pad.shape
    sn, sh, sw, sc = x_pad.strides
    return np.lib.stride_tricks.as_strided(
        x_pad,
        (n, out_h, out_w, k, k, c),
        (sn, stride * sh, stride * sw, sh, sw, sc),
        writeable=False)


class Conv2D:
    """k x k convolution, same padding: output side = ceil(input / stride)."""

    def __init__(self, in_ch, out_ch, ksize=3, stride=1, rng=None, dtype=np.float64):
        self.in_ch = in_ch
        self.out_ch = out_ch
        self.k = ksize
        self.stride = stride
        rng = rng or np.random.default_rng(0)
        fan_in = ksize * ksize * in_ch
        self.w = fan_in_uniform((ksize, ksize, in_ch, out_ch), fan_in, rng, dtype)
        self.b = np.zeros(out_ch, dtype=dtype)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._cache = None

    def params(self):
        return [("w", self.w, self.dw), ("b", self.b, self.db)]

    def _padding(self, side):
        out = -(-side // self.stride)
        total = max((out - 1) * self.stride + self.k - side, 0)
        return out, total // 2, total - total // 2

    def forward(self, x, train=True):
        if x.shape[3] != self.in_ch:
            raise ValueError(f"expected {self.in_ch} input channels, got {x.shape[3]}")
        n, h, w, _ = x.shape
        out_h, ph0, ph1 = self._padding(h)
        out_w, pw0, pw1 = self._padding(w)
        x_pad = np.pad(x, ((0, 0), (ph0, ph1), (pw0, pw1), (0, 0)))
        win = _windows(x_pad, self.k, self.stride, out_h, out_w)
        cols = win.reshape(n * out_h * out_w, self.k * self.k * self.in_ch)
        y = cols @ self.w.reshape(-1, self.out_ch) + self.b
        y = y.reshape(n, out_h, out_w, self.out_ch)
        if train:
            self._cache = (x.shape, x_pad, (ph0, pw0), cols)
        return y

    def backward(self, dy):
        x_shape, x_pad, (ph0, pw0), cols = self._cache
        n, h, w, _ = x_shape
        _, out_h, out_w, _ = dy.shape
        dy2 = dy.reshape(-1, self.out_ch)
        self.dw += (cols.T @ dy2).reshape(self.w.shape)
        self.db += dy2.sum(axis=0)
        if self.stride == 1:
            # dx = same-padded correlation of dy with the flipped kernel
            k = self.k
            dy_pad = np.pad(dy, ((0, 0), (k - 1 - ph0, ph0),
                                 (k - 1 - pw0, pw0), (0, 0)))
            win = _windows(dy_pad, k, 1, h, w)
            cols_dy = win.reshape(n * h * w, k * k * self.out_ch)
            w_rot = self.w[::-1, ::-1].transpose(0, 1, 3, 2)
            dx = cols_dy @ w_rot.reshape(k * k * self.out_ch, self.in_ch)
            return dx.reshape(n, h, w, self.in_ch)
        dx_pad = np.zeros_like(x_pad)
        s = self.stride
        for a in range(self.k):
            for b in range(self.k):
                # dy[n,i,j,o] contributes to x_pad[n, i*s+a, j*s+b, c]
                dx_pad[:, a:a + out_h * s:s, b:b + out_w * s:s, :] += dy @ self.w[a, b].T
        return dx_pad[:, ph0:ph0 + h, pw0:pw0 + w, :]


class ReLU:
    def __init__(self):
        self._mask = None

    def params(self):
        return []

    def forward(self, x, train=True):
        if train:
            self._mask = x > 0
        return np.maximum(x, 0)

    def backward(self, dy):
        return dy * self._mask


class MaxPool2x2:
    """2x2/stride-2 max pooling; gradient goes to the first (row-major) max."""

    def __init__(self):
        self._cache = None

    def params(self):
        return []

    def forward(self, x, train=True):
        n, h, w, c = x.shape
        if h % 2 or w % 2:
            raise ValueError(f"maxpool needs even spatial dims, got {h}x{w}")
        win = x.reshape(n, h // 2, 2, w // 2, 2, c).transpose(0, 1, 3, 2, 4, 5)
        win = win.reshape(n, h // 2, w // 2, 4, c)
        idx = win.argmax(axis=3)
        out = np.take_along_axis(win, idx[:, :, :, None, :], axis=3)[:, :, :, 0, :]
        if train:
            self._cache = (x.shape, idx)
        return out

    def backward(self, dy):
        (n, h, w, c), idx = self._cache
        dwin = np.zeros((n, h // 2, w // 2, 4, c), dtype=dy.dtype)
        np.put_along_axis(dwin, idx[:, :, :, None, :], dy[:, :, :, None, :], axis=3)
        dwin = dwin.reshape(n, h // 2, w // 2, 2, 2, c).transpose(0, 1, 3, 2, 4, 5)
        return dwin.reshape(n, h, w, c)


class Deconv2D:
    """Transposed convolution: output side = input side * stride.

    Implemented as the adjoint of a strided convolution with explicit
    padding: out[i*s + a - p] += x[i] * w[a]. Kernel/stride/padding are
    chosen so the output lands exactly on stride * input.
    """

    def __init__(self, in_ch, out_ch, ksize, stride, rng=None, dtype=np.float64):
        if (ksize - stride) % 2:
            raise ValueError("kernel minus stride must be even for exact upsampling")
        self.in_ch = in_ch
        self.out_ch = out_ch
        self.k = ksize
        self.stride = stride
        self.pad = (ksize - stride) // 2
        rng = rng or np.random.default_rng(0)
        fan_in = ksize * ksize * in_ch
        self.w = fan_in_uniform((ksize, ksize, in_ch, out_ch), fan_in, rng, dtype)
        self.b = np.zeros(out_ch, dtype=dtype)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._cache = None

    def params(self):
        return [("w", self.w, self.dw), ("b", self.b, self.db)]

    def forward(self, x, train=True):
        if x.shape[3] != self.in_ch:
            raise ValueError(f"expected {self.in_ch} input channels, got {x.shape[3]}")
        n, h, w, _ = x.shape
        s, k, p = self.stride, self.k, self.pad
        full = np.zeros((n, (h - 1) * s + k, (w - 1) * s + k, self.out_ch), dtype=x.dtype)
        for a in range(k):
            for b in range(k):
                full[:, a:a + h * s:s, b:b + w * s:s, :] += x @ self.w[a, b]
        out = full[:, p:p + h * s, p:p + w * s, :] + self.b
        if train:
            self._cache = (x, full.shape)
        return out

    def backward(self, dy):
        x, full_shape = self._cache
        n, h, w, _ = x.shape
        s, k, p = self.stride, self.k, self.pad
        dfull = np.zeros(full_shape, dtype=dy.dtype)
        dfull[:, p:p + h * s, p:p + w * s, :] = dy
        dx = np.zeros_like(x)
        for a in range(k):
            for b in range(k):
                sub = dfull[:, a:a + h * s:s, b:b + w * s:s, :]
                dx += sub @ self.w[a, b].T
                self.dw[a, b] += np.tensordot(x, sub, axes=([0, 1, 2], [0, 1, 2]))
        self.db += dy.sum(axis=(0, 1, 2))
        return dx


def concat_channels(a, b):
    if a.shape[:3] != b.shape[:3]:
        raise ValueError(f"spatial mismatch {a.shape} vs {b.shape}")
    return np.concatenate([a, b], axis=3)


def split_channels(d, ca):
    return d[:, :, :, :ca], d[:, :, :, ca:]


def softmax(logits):
    """Channel-axis softmax of an NHWC logit tensor."""
    shifted = logits - logits.max(axis=3, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=3, keepdims=True)


def softmax_xent(logits, target_classes, class_weights=None):
    """Mean per-pixel cross-entropy of softmaxed logits against class ids.

    Returns (loss, probs, dlogits); dlogits = (softmax - onehot) / pixel
    count. With class_weights, each pixel's term is weighted by its target
    class and the mean is taken over the total weight instead.
    """
    if logits.shape[:3] != target_classes.shape:
        raise ValueError(f"target shape {target_classes.shape} does not match logits")
    probs = softmax(logits)
    onehot = np.zeros_like(probs)
    np.put_along_axis(onehot, target_classes[:, :, :, None], 1.0, axis=3)
    picked = np.take_along_axis(probs, target_classes[:, :, :, None], axis=3)[:, :, :, 0]
    eps = np.finfo(probs.dtype).tiny
    logp = -np.log(np.maximum(picked, eps))
    if class_weights is None:
        total = float(picked.size)
        loss = logp.sum() / total
        dlogits = (probs - onehot) / total
    else:
        weights = np.asarray(class_weights, dtype=probs.dtype)[target_classes]
        total = weights.sum()
        loss = (weights * logp).sum() / total
        dlogits = weights[:, :, :, None] * (probs - onehot) / total
    return loss, probs, dlogits
