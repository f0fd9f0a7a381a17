"""Sequential networks described by a serializable spec.

A NetworkSpec is the architecture alone (layer configs plus the input
feature width); weights live in the Network and are (re)created from a
seed, so spec + seed + training settings fully determine a run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInstanceError
from .layers import Layer, layer_from_config

DTYPES = {"f32": np.float32, "f64": np.float64}


@dataclass(frozen=True)
class NetworkSpec:
    kind: str
    d_in: int
    layers: tuple[dict, ...]

    def to_json(self) -> dict:
        return {"kind": self.kind, "d_in": self.d_in, "layers": [dict(c) for c in self.layers]}

    @staticmethod
    def from_json(obj: dict) -> "NetworkSpec":
        return NetworkSpec(
            kind=obj["kind"],
            d_in=int(obj["d_in"]),
            layers=tuple(dict(c) for c in obj["layers"]),
        )


def fcnn_spec(n_inputs: int, n_outputs: int, hidden: tuple[int, ...] = (500,) * 5) -> NetworkSpec:
    """Dense net: relu hidden stack, linear head of width ``n_outputs``."""
    layers = [{"type": "dense", "units": int(h), "activation": "relu"} for h in hidden]
    layers.append({"type": "dense", "units": int(n_outputs), "activation": "linear"})
    return NetworkSpec(kind="fcnn", d_in=int(n_inputs), layers=tuple(layers))


def lstm_spec(n_features: int, units: tuple[int, ...] = (128, 128)) -> NetworkSpec:
    """Stacked recurrent layers (full sequences) with a per-step linear head."""
    layers = [{"type": "lstm", "units": int(u)} for u in units]
    layers.append({"type": "dense", "units": 1, "activation": "linear"})
    return NetworkSpec(kind="lstm", d_in=int(n_features), layers=tuple(layers))


def conv1d_spec(
    channels: int = 4,
    filters: tuple[int, ...] = (20, 40, 60, 40, 20),
    kernel_size: int = 3,
    head: int = 100,
) -> NetworkSpec:
    """Convolutional recurrent stack, spatial max pool, linear per-step head."""
    layers: list[dict] = [
        {"type": "convlstm1d", "filters": int(f), "kernel_size": int(kernel_size)}
        for f in filters
    ]
    layers.append({"type": "globalmaxpool"})
    layers.append({"type": "dense", "units": int(head), "activation": "linear"})
    layers.append({"type": "dense", "units": 1, "activation": "linear"})
    return NetworkSpec(kind="conv1d", d_in=int(channels), layers=tuple(layers))


def conv2d_spec(
    channels: int = 2,
    filters: tuple[int, ...] = (20, 40, 60, 40, 20),
    kernel_size: tuple[int, int] = (2, 2),
    head: int = 100,
) -> NetworkSpec:
    layers: list[dict] = [
        {"type": "convlstm2d", "filters": int(f), "kernel_size": list(kernel_size)}
        for f in filters
    ]
    layers.append({"type": "globalmaxpool"})
    layers.append({"type": "dense", "units": int(head), "activation": "linear"})
    layers.append({"type": "dense", "units": 1, "activation": "linear"})
    return NetworkSpec(kind="conv2d", d_in=int(channels), layers=tuple(layers))


class Network:
    """Layer chain with shared forward/backward plumbing.

    Weights are drawn from default_rng(seed) in layer order, so the same
    (spec, seed, dtype) always yields the same initial network.
    """

    def __init__(self, spec: NetworkSpec, seed: int = 0, dtype: str = "f64"):
        if dtype not in DTYPES:
            raise InvalidInstanceError(f"dtype must be one of {sorted(DTYPES)}, got {dtype!r}")
        self.spec = spec
        self.seed = seed
        self.dtype = dtype
        self.np_dtype = DTYPES[dtype]
        self.layers: list[Layer] = [layer_from_config(cfg) for cfg in spec.layers]
        rng = np.random.default_rng(seed)
        width = spec.d_in
        for layer in self.layers:
            width = layer.build(width, rng, self.np_dtype)
        self._names = [
            f"{idx:02d}.{cfg['type']}" for idx, cfg in enumerate(spec.layers)
        ]

    def forward(self, x: np.ndarray) -> np.ndarray:
        out = np.asarray(x, dtype=self.np_dtype)
        for layer in self.layers:
            out = layer.forward(out)
        return out

    def backward(self, dy: np.ndarray) -> np.ndarray:
        grad = np.asarray(dy, dtype=self.np_dtype)
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def zero_grads(self) -> None:
        for layer in self.layers:
            layer.zero_grads()

    def parameters(self) -> dict[str, np.ndarray]:
        out = {}
        for prefix, layer in zip(self._names, self.layers):
            for key, value in layer.params.items():
                out[f"{prefix}.{key}"] = value
        return out

    def gradients(self) -> dict[str, np.ndarray]:
        out = {}
        for prefix, layer in zip(self._names, self.layers):
            for key, value in layer.grads.items():
                out[f"{prefix}.{key}"] = value
        return out

    def set_parameters(self, values: dict[str, np.ndarray]) -> None:
        current = self.parameters()
        missing = sorted(set(current) - set(values))
        extra = sorted(set(values) - set(current))
        if missing or extra:
            raise InvalidInstanceError(
                f"parameter names do not match network (missing {missing}, extra {extra})"
            )
        for prefix, layer in zip(self._names, self.layers):
            for key in layer.params:
                new = np.asarray(values[f"{prefix}.{key}"], dtype=self.np_dtype)
                if new.shape != layer.params[key].shape:
                    raise InvalidInstanceError(
                        f"{prefix}.{key}: shape {new.shape} != {layer.params[key].shape}"
                    )
                layer.params[key] = new.copy()
        self.zero_grads()

    def n_parameters(self) -> int:
        return sum(int(np.prod(p.shape)) for p in self.parameters().values())


def build_network(spec: NetworkSpec, seed: int = 0, dtype: str = "f64") -> Network:
    return Network(spec, seed=seed, dtype=dtype)
