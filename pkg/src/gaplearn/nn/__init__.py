"""Minimal array-backed neural network engine with hand-derived gradients.

Layers compute their own backward passes; correctness is pinned by a
finite-difference suite in the tests rather than by an autograd library.
"""

from .layers import (
    ConvLSTM1D,
    ConvLSTM2D,
    Dense,
    GlobalMaxPool,
    LSTM,
)
from .network import (
    Network,
    NetworkSpec,
    build_network,
    conv1d_spec,
    conv2d_spec,
    fcnn_spec,
    lstm_spec,
)
from .optim import Adam
from .training import History, batched_loss, evaluate_gap_mse, mse_loss, predict, train
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Adam",
    "ConvLSTM1D",
    "ConvLSTM2D",
    "Dense",
    "GlobalMaxPool",
    "History",
    "LSTM",
    "Network",
    "NetworkSpec",
    "batched_loss",
    "build_network",
    "conv1d_spec",
    "conv2d_spec",
    "evaluate_gap_mse",
    "fcnn_spec",
    "load_checkpoint",
    "lstm_spec",
    "mse_loss",
    "predict",
    "save_checkpoint",
    "train",
]
