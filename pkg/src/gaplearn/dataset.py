"""Datasets of (instance, gap trajectory) pairs and network encodings.

Generation draws one independent PRNG sub-stream per instance, keyed as
(root_seed, index), so datasets are reproducible record by record and a
file regenerated with the same arguments is byte-identical.

Four encodings turn a sample into network arrays:

  flat      couplings then fields as one vector (dense nets)
  sequence  row k is lam_k times the flat vector (plain recurrent nets)
  line      per-site channels [field, left bond, right bond, mask] on a
            1D canvas of ``m_embed`` sites (1D convolutional recurrent)
  canvas    per-cell channels [value, mask] on a 2D canvas holding the
            parity-encoded triangular layout (2D convolutional recurrent)

Line and canvas encodings place the instance at a random offset inside
the canvas during training (a fresh draw per epoch) and at a fixed draw
for evaluation, which is what lets one network read instances of several
sizes.  Targets are log1p of the gaps; predictions are mapped back with
expm1 and clipped at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import jsonio
from .errors import ConvergenceError, InvalidInstanceError
from .spectrum import FORMAT_VERSION, SolverPolicy, gap_trajectory
from .spinmodel import (
    Family,
    ProblemInstance,
    instance_from_json,
    instance_to_json,
    lhz_encode,
    sample_instance,
    schedule,
)


@dataclass(frozen=True)
class Sample:
    instance: ProblemInstance
    gaps: np.ndarray = field(repr=False)


@dataclass
class GapDataset:
    samples: list[Sample]
    family: Family
    sizes: tuple[int, ...]
    n_steps: int
    root_seed: int
    solver: SolverPolicy = field(default_factory=SolverPolicy)
    failures: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)

    def lambdas(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_steps)

    def gaps_matrix(self) -> np.ndarray:
        return np.stack([s.gaps for s in self.samples])


def generate_samples(
    family: Family | str,
    sizes: int | list[int],
    n_samples: int,
    root_seed: int,
    n_steps: int = 50,
    policy: SolverPolicy | None = None,
    max_failure_fraction: float = 0.01,
    meta: dict | None = None,
) -> GapDataset:
    """Sample instances and solve their sweeps.

    With several sizes the dataset cycles through them, so counts per size
    differ by at most one.  For the parity-encoded family the sampled
    object is a fully connected logical instance of the requested size,
    which is then encoded; the stored instance and solved sweep are the
    physical ones.  A sweep that fails to converge is skipped and logged;
    more than ``max_failure_fraction`` of them aborts generation.
    """
    family = Family(family)
    sizes = [sizes] if isinstance(sizes, int) else list(sizes)
    if not sizes or any(m < 2 for m in sizes):
        raise InvalidInstanceError(f"sizes must all be >= 2, got {sizes}")
    policy = policy or SolverPolicy()
    sched = schedule(n_steps)

    samples: list[Sample] = []
    failures: list[dict] = []
    for index in range(n_samples):
        size = sizes[index % len(sizes)]
        seed = (root_seed, index)
        if family is Family.LHZ_PHYSICAL:
            logical = sample_instance(Family.ALL_TO_ALL, size, seed)
            instance, _ = lhz_encode(logical)
        else:
            instance = sample_instance(family, size, seed)
        try:
            traj = gap_trajectory(instance, sched, policy)
        except ConvergenceError as err:
            failures.append({"index": index, "seed": list(seed), "error": str(err)})
            continue
        samples.append(Sample(instance=instance, gaps=traj.gaps))

    if len(failures) > max_failure_fraction * n_samples:
        raise ConvergenceError(
            f"{len(failures)} of {n_samples} sweeps failed to converge "
            f"(allowed fraction {max_failure_fraction})"
        )
    return GapDataset(
        samples=samples,
        family=family,
        sizes=tuple(sizes),
        n_steps=n_steps,
        root_seed=root_seed,
        solver=policy,
        failures=failures,
        meta=dict(meta or {}),
    )


# ---------------------------------------------------------------------------
# Files: records JSONL plus sidecar manifest, manifest written last
# ---------------------------------------------------------------------------

def manifest_path_for(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".manifest.json")


def save_dataset(path: str | Path, dataset: GapDataset) -> dict:
    path = Path(path)
    records = (
        {"instance": instance_to_json(s.instance), "gaps": [float(g) for g in s.gaps]}
        for s in dataset.samples
    )
    count = jsonio.write_jsonl(path, records)
    manifest = {
        "version": FORMAT_VERSION,
        "kind": "dataset",
        "family": dataset.family.value,
        "sizes": list(dataset.sizes),
        "n_steps": dataset.n_steps,
        "n_samples": count,
        "root_seed": dataset.root_seed,
        "solver": {
            "method": dataset.solver.method,
            "dense_max_qubits": dataset.solver.dense_max_qubits,
            "tol": dataset.solver.tol,
            "seed": dataset.solver.seed,
        },
        "failures": dataset.failures,
        "meta": dataset.meta,
        "sha256": jsonio.sha256_file(path),
    }
    jsonio.write_json(manifest_path_for(path), manifest)
    return manifest


def load_dataset(path: str | Path, verify: bool = True) -> GapDataset:
    path = Path(path)
    mpath = manifest_path_for(path)
    manifest = jsonio.read_json(mpath)
    if verify:
        jsonio.verify_checksum(path, manifest["sha256"])
    samples = []
    for rec in jsonio.read_jsonl(path):
        samples.append(
            Sample(
                instance=instance_from_json(rec["instance"]),
                gaps=np.array(rec["gaps"], dtype=float),
            )
        )
    solver = manifest.get("solver", {})
    return GapDataset(
        samples=samples,
        family=Family(manifest["family"]),
        sizes=tuple(manifest["sizes"]),
        n_steps=manifest["n_steps"],
        root_seed=manifest["root_seed"],
        solver=SolverPolicy(
            method=solver.get("method", "auto"),
            dense_max_qubits=solver.get("dense_max_qubits", 8),
            tol=solver.get("tol", 1e-10),
            seed=solver.get("seed", 0),
        ),
        failures=list(manifest.get("failures", [])),
        meta=dict(manifest.get("meta", {})),
    )


def split_indices(n: int, val_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint covering (train, validation) index arrays, deterministic in seed."""
    if not 0.0 < val_fraction < 1.0:
        raise InvalidInstanceError(f"val_fraction must be in (0, 1), got {val_fraction}")
    if n < 2:
        raise InvalidInstanceError(f"need at least 2 samples to split, got {n}")
    n_val = min(n - 1, max(1, int(round(n * val_fraction))))
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def subset(dataset: GapDataset, indices: np.ndarray) -> GapDataset:
    return GapDataset(
        samples=[dataset.samples[int(i)] for i in indices],
        family=dataset.family,
        sizes=dataset.sizes,
        n_steps=dataset.n_steps,
        root_seed=dataset.root_seed,
        solver=dataset.solver,
        failures=dataset.failures,
        meta=dataset.meta,
    )


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------

def encode_targets(gaps: np.ndarray, sequence: bool) -> np.ndarray:
    """log1p targets; (B, T, 1) for sequence models, (B, T) for dense ones."""
    y = np.log1p(np.asarray(gaps, dtype=float))
    return y[..., None] if sequence else y


def decode_predictions(y: np.ndarray) -> np.ndarray:
    """Back to gap space; gaps cannot be negative, so clip there."""
    return np.maximum(np.expm1(y), 0.0)


# ---------------------------------------------------------------------------
# Flat and sequence encodings
# ---------------------------------------------------------------------------

def flat_parameters(instance: ProblemInstance) -> np.ndarray:
    return np.concatenate([instance.coupling_values(), instance.field_values()])


def encode_flat(instances: list[ProblemInstance]) -> np.ndarray:
    rows = [flat_parameters(inst) for inst in instances]
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise InvalidInstanceError("flat encoding needs instances of one size")
    return np.stack(rows)


def decode_flat(vector: np.ndarray, family: Family, size: int) -> ProblemInstance:
    """Rebuild an instance from its flat vector (chain or fully connected)."""
    family = Family(family)
    if family is Family.NEAREST_NEIGHBOR_1D:
        pairs = [(i, i + 1) for i in range(size - 1)]
    elif family is Family.ALL_TO_ALL:
        pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    else:
        raise InvalidInstanceError("flat decoding covers the chain and fully connected families")
    vector = np.asarray(vector, dtype=float)
    if len(vector) != len(pairs) + size:
        raise InvalidInstanceError(f"expected {len(pairs) + size} entries, got {len(vector)}")
    return ProblemInstance(
        family=family,
        size=size,
        couplings=tuple((i, j, float(v)) for (i, j), v in zip(pairs, vector[: len(pairs)])),
        fields=tuple(float(v) for v in vector[len(pairs):]),
    )


def encode_sequence(instances: list[ProblemInstance], n_steps: int) -> np.ndarray:
    """(B, T, P) with row k equal to lam_k times the flat vector."""
    flat = encode_flat(instances)
    lambdas = np.linspace(0.0, 1.0, n_steps)
    return lambdas[None, :, None] * flat[:, None, :]


def decode_sequence(x: np.ndarray, family: Family, size: int) -> ProblemInstance:
    """Invert one sequence encoding via the final row, where lam = 1."""
    return decode_flat(np.asarray(x)[-1], family, size)


# ---------------------------------------------------------------------------
# Line encoding (1D canvas)
# ---------------------------------------------------------------------------

LINE_CHANNELS = 4  # field, left bond, right bond, mask


def _chain_bonds(instance: ProblemInstance) -> np.ndarray:
    if instance.family is not Family.NEAREST_NEIGHBOR_1D:
        raise InvalidInstanceError("line encoding is defined for chain instances")
    return instance.coupling_values()


def encode_line(
    instances: list[ProblemInstance],
    n_steps: int,
    m_embed: int,
    offsets: np.ndarray | None = None,
) -> np.ndarray:
    """(B, T, m_embed, 4) canvases; channels 0..2 scale with lam, mask does not.

    ``offsets`` gives the left edge of each instance on the canvas; zeros
    when omitted.  Site s carries its field, the bond to its left
    neighbour (zero at the left end), the bond to its right neighbour
    (zero at the right end), and a 1 on the mask channel.
    """
    b = len(instances)
    if offsets is None:
        offsets = np.zeros(b, dtype=int)
    offsets = np.asarray(offsets, dtype=int)
    lambdas = np.linspace(0.0, 1.0, n_steps)
    x = np.zeros((b, n_steps, m_embed, LINE_CHANNELS))
    for s, (inst, off) in enumerate(zip(instances, offsets)):
        m = inst.size
        if not 0 <= off <= m_embed - m:
            raise InvalidInstanceError(f"offset {off} does not fit size {m} in canvas {m_embed}")
        bonds = _chain_bonds(inst)
        fields = inst.field_values()
        sites = np.arange(off, off + m)
        frame = np.zeros((m_embed, LINE_CHANNELS))
        frame[sites, 0] = fields
        frame[sites[1:], 1] = bonds
        frame[sites[:-1], 2] = bonds
        frame[sites, 3] = 1.0
        x[s] = frame[None, :, :]
        x[s, :, :, :3] *= lambdas[:, None, None]
    return x


def decode_line(x: np.ndarray) -> ProblemInstance:
    """Invert one line canvas via its mask and final (lam = 1) frame."""
    x = np.asarray(x)
    mask = x[0, :, 3]
    sites = np.flatnonzero(mask == 1.0)
    if len(sites) < 2 or np.any(np.diff(sites) != 1):
        raise InvalidInstanceError("mask channel does not mark one contiguous block")
    m = len(sites)
    final = x[-1]
    fields = final[sites, 0]
    bonds = final[sites[:-1], 2]
    return ProblemInstance(
        family=Family.NEAREST_NEIGHBOR_1D,
        size=m,
        couplings=tuple((i, i + 1, float(v)) for i, v in enumerate(bonds)),
        fields=tuple(float(v) for v in fields),
    )


# ---------------------------------------------------------------------------
# Canvas encoding (2D, parity-encoded layout)
# ---------------------------------------------------------------------------

CANVAS_CHANNELS = 2  # value, mask


def _physical_positions(instance: ProblemInstance) -> tuple[np.ndarray, int]:
    """Grid cells (row, col) of each physical qubit plus the layout's span."""
    if instance.family is not Family.LHZ_PHYSICAL:
        raise InvalidInstanceError("canvas encoding is defined for parity-encoded instances")
    pairs = [(i, j) for i, j, _ in instance.couplings]
    span = max(j for _, j in pairs)
    return np.array([(j - 1, i) for i, j in pairs], dtype=int), span


def encode_canvas(
    instances: list[ProblemInstance],
    n_steps: int,
    grid_shape: tuple[int, int],
    offsets: np.ndarray | None = None,
) -> np.ndarray:
    """(B, T, H, W, 2) canvases; values scale with lam, the mask does not."""
    b = len(instances)
    height, width = grid_shape
    if offsets is None:
        offsets = np.zeros((b, 2), dtype=int)
    offsets = np.asarray(offsets, dtype=int)
    lambdas = np.linspace(0.0, 1.0, n_steps)
    x = np.zeros((b, n_steps, height, width, CANVAS_CHANNELS))
    for s, (inst, (dr, dc)) in enumerate(zip(instances, offsets)):
        cells, span = _physical_positions(inst)
        if not (0 <= dr <= height - span and 0 <= dc <= width - span):
            raise InvalidInstanceError(
                f"offset ({dr}, {dc}) does not fit span {span} in canvas {grid_shape}"
            )
        values = inst.coupling_values()
        frame = np.zeros((height, width, CANVAS_CHANNELS))
        frame[cells[:, 0] + dr, cells[:, 1] + dc, 0] = values
        frame[cells[:, 0] + dr, cells[:, 1] + dc, 1] = 1.0
        x[s] = frame[None]
        x[s, :, :, :, 0] *= lambdas[:, None, None]
    return x


def decode_canvas(x: np.ndarray) -> list[tuple[int, int, float]]:
    """Invert one canvas into the physical coupling list (i, j, value)."""
    x = np.asarray(x)
    mask = x[0, :, :, 1]
    rows, cols = np.nonzero(mask == 1.0)
    if len(rows) == 0:
        raise InvalidInstanceError("empty mask channel")
    dr, dc = rows.min(), cols.min()
    final = x[-1, :, :, 0]
    entries = [(int(c - dc), int(r - dr + 1), float(final[r, c])) for r, c in zip(rows, cols)]
    entries.sort(key=lambda e: (e[0], e[1]))
    return entries


# ---------------------------------------------------------------------------
# Placement-augmented array provider
# ---------------------------------------------------------------------------

@dataclass
class PlacedEncoder:
    """Arrays for the line or canvas encodings with seeded placement.

    Training draws fresh offsets every epoch from (placement_seed, epoch);
    evaluation draws once from (placement_seed,), so repeated evaluations
    see identical arrays.
    """

    samples: list[Sample]
    n_steps: int
    kind: str = "line"
    m_embed: int = 10
    grid_shape: tuple[int, int] = (10, 10)
    placement_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("line", "canvas"):
            raise InvalidInstanceError(f"unknown placed encoding {self.kind!r}")

    def _offsets(self, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "line":
            slack = np.array([self.m_embed - s.instance.size for s in self.samples])
            if np.any(slack < 0):
                raise InvalidInstanceError("canvas narrower than the largest instance")
            return rng.integers(0, slack + 1)
        height, width = self.grid_shape
        spans = np.array([_physical_positions(s.instance)[1] for s in self.samples])
        if np.any(spans > min(height, width)):
            raise InvalidInstanceError("canvas smaller than the largest layout")
        dr = rng.integers(0, height - spans + 1)
        dc = rng.integers(0, width - spans + 1)
        return np.stack([dr, dc], axis=1)

    def _encode(self, offsets: np.ndarray) -> np.ndarray:
        instances = [s.instance for s in self.samples]
        if self.kind == "line":
            return encode_line(instances, self.n_steps, self.m_embed, offsets)
        return encode_canvas(instances, self.n_steps, self.grid_shape, offsets)

    def targets(self) -> np.ndarray:
        return encode_targets(np.stack([s.gaps for s in self.samples]), sequence=True)

    def epoch_arrays(self, epoch: int) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng((self.placement_seed, epoch))
        return self._encode(self._offsets(rng)), self.targets()

    def eval_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng((self.placement_seed,))
        return self._encode(self._offsets(rng)), self.targets()
