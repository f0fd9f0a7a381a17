"""Minibatch training on mean squared error in the log-gap target space.

Determinism contract: given (network seed, shuffle seed, data, dtype) the
loss history is bitwise reproducible, because every source of randomness
is a fresh default_rng keyed by (seed, epoch) and minibatch order never
depends on wall clock or iteration history.  Data providers with
``epoch_arrays``/``eval_arrays`` hooks (placement augmentation) are
re-invoked each epoch; plain (x, y) tuples are used as-is.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingDivergedError
from .network import Network
from .optim import Adam


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean over all elements; returns the loss and its gradient w.r.t. pred."""
    diff = pred - target
    loss = float(np.mean(np.square(diff)))
    grad = (2.0 / diff.size) * diff
    return loss, grad


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.train_loss)

    def to_json(self) -> dict:
        return {"train_loss": list(self.train_loss), "val_loss": list(self.val_loss)}

    @staticmethod
    def from_json(obj: dict) -> "History":
        return History(
            train_loss=[float(v) for v in obj.get("train_loss", [])],
            val_loss=[float(v) for v in obj.get("val_loss", [])],
        )


def _epoch_arrays(data, epoch: int):
    if hasattr(data, "epoch_arrays"):
        return data.epoch_arrays(epoch)
    return data


def _eval_arrays(data):
    if hasattr(data, "eval_arrays"):
        return data.eval_arrays()
    return data


def predict(network: Network, x: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Forward pass in chunks; returns float64 regardless of network dtype."""
    outs = []
    for start in range(0, len(x), batch_size):
        outs.append(network.forward(x[start : start + batch_size]))
    return np.concatenate(outs).astype(np.float64)


def batched_loss(network: Network, x: np.ndarray, y: np.ndarray, batch_size: int = 256) -> float:
    """MSE over a whole array pair without building one giant activation set."""
    total = 0.0
    for start in range(0, len(x), batch_size):
        pred = network.forward(x[start : start + batch_size])
        target = np.asarray(y[start : start + batch_size], dtype=pred.dtype)
        total += float(np.sum(np.square(pred - target)))
    return total / np.asarray(y).size


def train(
    network: Network,
    train_data,
    val_data=None,
    *,
    epochs: int,
    batch_size: int = 64,
    optimizer: Adam | None = None,
    lr: float = 1e-3,
    lr_decay: float = 1.0,
    seed: int = 0,
    start_epoch: int = 0,
    history: History | None = None,
    on_epoch=None,
) -> History:
    """Run ``epochs`` epochs and return the per-epoch loss history.

    The recorded train loss is the size-weighted mean of the minibatch
    losses; the validation loss is a full pass at epoch end.  The learning
    rate for epoch e is lr * lr_decay**e, computed from the absolute epoch
    index so resumed runs stay on the same schedule.  Passing
    ``start_epoch`` and the previous ``history`` resumes a run, keeping
    the per-epoch shuffle and placement streams aligned with an
    uninterrupted run.  ``on_epoch(epoch, history)`` runs after each epoch.
    """
    optimizer = optimizer or Adam(network.parameters(), lr=lr)
    base_lr = optimizer.lr
    history = history if history is not None else History()

    for epoch in range(start_epoch, start_epoch + epochs):
        optimizer.lr = base_lr * lr_decay**epoch
        x, y = _epoch_arrays(train_data, epoch)
        n = len(x)
        order = np.random.default_rng((seed, epoch)).permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            xb = x[idx]
            yb = y[idx]
            network.zero_grads()
            pred = network.forward(xb)
            loss, grad = mse_loss(pred, np.asarray(yb, dtype=pred.dtype))
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite training loss at epoch {epoch}", history=history
                )
            network.backward(grad)
            optimizer.step(network.gradients())
            total += loss * len(idx)
        # outside the minibatch loop the optimizer always carries the base
        # rate, so checkpoints and resumed runs recompute the same schedule
        optimizer.lr = base_lr
        history.train_loss.append(total / n)

        if val_data is not None:
            xv, yv = _eval_arrays(val_data)
            vloss = batched_loss(network, xv, yv, batch_size=max(batch_size, 256))
            if not np.isfinite(vloss):
                raise TrainingDivergedError(
                    f"non-finite validation loss at epoch {epoch}", history=history
                )
            history.val_loss.append(vloss)

        if on_epoch is not None:
            on_epoch(epoch, history)
    return history


def evaluate_gap_mse(
    network: Network, x: np.ndarray, y_log: np.ndarray, batch_size: int = 256
) -> dict[str, float]:
    """MSE in the training (log) space and in gap space after inversion."""
    pred_log = predict(network, x, batch_size=batch_size)
    target_log = np.asarray(y_log, dtype=np.float64)
    mse_log = float(np.mean(np.square(pred_log - target_log)))
    pred_gap = np.maximum(np.expm1(pred_log), 0.0)
    target_gap = np.expm1(target_log)
    mse_gap = float(np.mean(np.square(pred_gap - target_gap)))
    return {"mse_log": mse_log, "mse_gap": mse_gap}
