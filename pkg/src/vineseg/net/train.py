"""Mini-batch gradient descent over training patches.

Patches are shuffled each epoch (seeded), partitioned into batches, and the
weights are updated with the mean batch gradient; an optional momentum term
is available but defaults off. The last short batch is processed, not
dropped. Costs are recorded per epoch.
"""

from __future__ import annotations

import csv

import numpy as np

from .network import Network, TrainConfig


def patches_to_arrays(patches, dtype=np.float64):
    """Stack patches into X (P,H,W,C) in [0,1] and class-id targets (P,H,W).

    Class 0 = object, class 1 = background.
    """
    imgs, targets = [], []
    for p in patches:
        if p.mask is None:
            raise ValueError("training patches need masks")
        img = np.asarray(p.image)
        x = img.astype(dtype)
        if img.dtype == np.uint8:
            x = x / 255.0
        if x.ndim == 2:
            x = x[:, :, None]
        imgs.append(x)
        targets.append(np.where(np.asarray(p.mask, dtype=bool), 0, 1).astype(np.int64))
    return np.stack(imgs), np.stack(targets)


def sgd_step(params, velocities, learning_rate, momentum):
    for (name, w, g), v in zip(params, velocities):
        if momentum:
            v *= momentum
            v -= learning_rate * g
            w += v
        else:
            w -= learning_rate * g


def train(net: Network, patches, cfg: TrainConfig, progress=None):
    """Train in place; returns the per-epoch mean cost history."""
    if not patches:
        raise ValueError("empty training set")
    if cfg.batch_size < 1 or cfg.learning_rate <= 0:
        raise ValueError("batch_size must be >= 1 and learning_rate > 0")
    x_all, y_all = patches_to_arrays(patches, dtype=net.dtype)
    n = len(patches)
    rng = np.random.default_rng(cfg.shuffle_seed)
    velocities = [np.zeros_like(w) for _, w, _ in net.params()]
    history = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        cost_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            net.zero_grads()
            loss, _ = net.loss_and_grads(x_all[idx], y_all[idx], cfg.class_weights)
            sgd_step(net.params(), velocities, cfg.learning_rate, cfg.momentum)
            cost_sum += float(loss) * len(idx)
        history.append(cost_sum / n)
        if progress:
            progress(epoch, history[-1])
    net.epochs_run += cfg.epochs
    net.final_cost = history[-1] if history else None
    return history


def write_cost_history(history, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mean_cost"])
        for i, cost in enumerate(history):
            writer.writerow([i + 1, f"{cost:.8f}"])
