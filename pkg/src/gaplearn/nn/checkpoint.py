"""Checkpoints: one .npz of arrays plus a JSON manifest with its checksum.

Weights and optimizer moments are stored as float64 whatever the training
dtype, so a checkpoint round-trip never loses precision that the run had.
The manifest records the architecture spec, seeds, the epoch to resume
at, and the loss history; the shuffle and placement streams are keyed by
(seed, epoch), so (seed, next_epoch) is the entire RNG state a resumed
run needs.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .. import jsonio
from ..errors import InvalidInstanceError
from .network import Network, NetworkSpec
from .optim import Adam
from .training import History

CHECKPOINT_VERSION = 1


def manifest_path_for(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".manifest.json")


def save_checkpoint(
    path: str | Path,
    network: Network,
    optimizer: Adam | None = None,
    *,
    history: History | None = None,
    next_epoch: int = 0,
    extra: dict | None = None,
) -> dict:
    path = Path(path)
    arrays = {
        f"param::{name}": value.astype(np.float64)
        for name, value in network.parameters().items()
    }
    adam_meta = None
    if optimizer is not None:
        state = optimizer.state_dict()
        for name, value in state["m"].items():
            arrays[f"m::{name}"] = value.astype(np.float64)
        for name, value in state["v"].items():
            arrays[f"v::{name}"] = value.astype(np.float64)
        adam_meta = {
            "lr": state["lr"],
            "beta1": state["beta1"],
            "beta2": state["beta2"],
            "eps": state["eps"],
            "t": state["t"],
        }
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)
    manifest = {
        "version": CHECKPOINT_VERSION,
        "kind": "checkpoint",
        "spec": network.spec.to_json(),
        "seed": network.seed,
        "dtype": network.dtype,
        "adam": adam_meta,
        "next_epoch": next_epoch,
        "history": history.to_json() if history is not None else None,
        "extra": dict(extra or {}),
        "sha256": jsonio.sha256_file(path),
    }
    jsonio.write_json(manifest_path_for(path), manifest)
    return manifest


def load_checkpoint(
    path: str | Path, dtype: str | None = None, verify: bool = True
) -> tuple[Network, Adam | None, dict]:
    path = Path(path)
    manifest = jsonio.read_json(manifest_path_for(path))
    if manifest.get("kind") != "checkpoint":
        raise InvalidInstanceError(f"{path}: manifest does not describe a checkpoint")
    if verify:
        jsonio.verify_checksum(path, manifest["sha256"])

    network = Network(
        NetworkSpec.from_json(manifest["spec"]),
        seed=manifest["seed"],
        dtype=dtype or manifest["dtype"],
    )
    with np.load(path) as data:
        params = {
            key[len("param::") :]: data[key] for key in data.files if key.startswith("param::")
        }
        network.set_parameters(params)
        optimizer = None
        if manifest["adam"] is not None:
            meta = manifest["adam"]
            optimizer = Adam(
                network.parameters(),
                lr=meta["lr"],
                beta1=meta["beta1"],
                beta2=meta["beta2"],
                eps=meta["eps"],
            )
            optimizer.t = int(meta["t"])
            for key in data.files:
                if key.startswith("m::"):
                    name = key[len("m::") :]
                    optimizer.m[name] = data[key].astype(network.np_dtype)
                elif key.startswith("v::"):
                    name = key[len("v::") :]
                    optimizer.v[name] = data[key].astype(network.np_dtype)
    return network, optimizer, manifest
