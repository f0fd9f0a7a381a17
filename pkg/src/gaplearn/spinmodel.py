"""Problem-Hamiltonian families, random instances, and the parity encoding.

A problem Hamiltonian is a classical Ising energy

    E(z) = sum_{i<j} J_ij z_i z_j + sum_i K_i z_i,       z_i = +/-1,

identified by the coupling list J and field vector K.  Two samplable
families are supported: an open 1D chain (couplings only between
neighbouring sites) and the fully connected model (all pairs coupled).

The fully connected model can be re-expressed as a locally connected one:
each logical pair (i, j) becomes one physical qubit whose sigma^z carries
the product z_i z_j, the logical coupling J_ij becomes a local field on
that qubit, and 3-/4-body plaquette constraints (penalty strength C) pin
the physical configuration to the consistent sector.  Local fields K_i are
handled by an auxiliary logical qubit fixed to +1, which turns each K_i
into one extra physical qubit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import InvalidInstanceError

DEFAULT_SWEEP_STEPS = 50

SeedLike = int | tuple[int, ...] | list[int]


class Family(str, Enum):
    NEAREST_NEIGHBOR_1D = "nearest_neighbor_1d"
    ALL_TO_ALL = "all_to_all"
    LHZ_PHYSICAL = "lhz_physical"


def pair_list(n: int) -> list[tuple[int, int]]:
    """All (i, j) with i < j < n in lexicographic order."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True)
class ProblemInstance:
    """One sampled problem Hamiltonian.

    ``couplings`` is an ordered edge list of (i, j, value) with i < j.  For
    the physical parity-encoded family each entry names one physical qubit
    (identified with the logical pair (i, j)) and the value is its local
    field; ``fields`` is empty, ``plaquettes`` lists 3-/4-tuples of physical
    qubit indices (positions in the coupling list) whose sigma^z product is
    penalized by ``constraint_strength``.
    """

    family: Family
    size: int
    couplings: tuple[tuple[int, int, float], ...]
    fields: tuple[float, ...]
    seed: tuple[int, ...] | None = None
    constraint_strength: float | None = None
    plaquettes: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.size < 2:
            raise InvalidInstanceError(f"size must be >= 2, got {self.size}")
        m = self.size
        if self.family is Family.NEAREST_NEIGHBOR_1D:
            expected = [(i, i + 1) for i in range(m - 1)]
            if [(i, j) for i, j, _ in self.couplings] != expected:
                raise InvalidInstanceError("chain must couple exactly the M-1 neighbouring pairs")
            if len(self.fields) != m:
                raise InvalidInstanceError(f"need {m} fields, got {len(self.fields)}")
        elif self.family is Family.ALL_TO_ALL:
            if [(i, j) for i, j, _ in self.couplings] != pair_list(m):
                raise InvalidInstanceError("fully connected model must couple all M(M-1)/2 pairs")
            if len(self.fields) != m:
                raise InvalidInstanceError(f"need {m} fields, got {len(self.fields)}")
        elif self.family is Family.LHZ_PHYSICAL:
            if self.fields:
                raise InvalidInstanceError("physical parity instances absorb fields into couplings")
            if self.constraint_strength is None or self.constraint_strength < 0:
                raise InvalidInstanceError("constraint strength must be >= 0")
            if not self.plaquettes:
                raise InvalidInstanceError("physical parity instances carry a plaquette list")
            n_phys = len(self.couplings)
            for plaq in self.plaquettes:
                if len(plaq) not in (3, 4) or len(set(plaq)) != len(plaq):
                    raise InvalidInstanceError(f"plaquette {plaq} must have 3 or 4 distinct qubits")
                if any(not 0 <= q < n_phys for q in plaq):
                    raise InvalidInstanceError(f"plaquette {plaq} references a qubit out of range")
        else:
            raise InvalidInstanceError(f"unknown family {self.family!r}")

    @property
    def n_qubits(self) -> int:
        """Qubit count of the sweep Hamiltonian this instance defines."""
        if self.family is Family.LHZ_PHYSICAL:
            return len(self.couplings)
        return self.size

    def coupling_values(self) -> np.ndarray:
        return np.array([v for _, _, v in self.couplings], dtype=float)

    def field_values(self) -> np.ndarray:
        return np.asarray(self.fields, dtype=float)


@dataclass(frozen=True)
class SweepSchedule:
    """Uniform grid of the interpolation parameter over [0, 1]."""

    n_steps: int
    values: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.n_steps < 2:
            raise InvalidInstanceError(f"schedule needs at least 2 steps, got {self.n_steps}")
        vals = np.linspace(0.0, 1.0, self.n_steps)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def schedule(n_steps: int = DEFAULT_SWEEP_STEPS) -> SweepSchedule:
    return SweepSchedule(n_steps)


def parameter_count(family: Family, size: int) -> int:
    """Number of parameters (couplings + fields) identifying an instance."""
    if size < 2:
        raise InvalidInstanceError(f"size must be >= 2, got {size}")
    if family is Family.NEAREST_NEIGHBOR_1D:
        return 2 * size - 1
    if family is Family.ALL_TO_ALL:
        return size * (size + 1) // 2
    raise InvalidInstanceError(f"parameter_count is defined for samplable families, not {family}")


def instance_rng(seed: SeedLike) -> np.random.Generator:
    """The package-wide PRNG: PCG64 keyed by an integer or tuple of integers.

    Datasets split streams as (root_seed, instance_index), one independent
    sub-stream per instance, so sampling parallelizes and reproduces
    identically on any platform.
    """
    return np.random.default_rng(seed)


def _seed_tuple(seed: SeedLike) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def sample_instance(family: Family, size: int, rng_seed: SeedLike) -> ProblemInstance:
    """Draw couplings and fields i.i.d. uniform on [-1, 1].

    The draw order is fixed (all couplings in lexicographic pair order,
    then all fields by site), so an instance is fully determined by
    (family, size, rng_seed).
    """
    family = Family(family)
    if size < 2:
        raise InvalidInstanceError(f"size must be >= 2, got {size}")
    if family is Family.NEAREST_NEIGHBOR_1D:
        pairs = [(i, i + 1) for i in range(size - 1)]
    elif family is Family.ALL_TO_ALL:
        pairs = pair_list(size)
    else:
        raise InvalidInstanceError("only chain and fully connected instances are sampled directly")
    rng = instance_rng(rng_seed)
    values = rng.uniform(-1.0, 1.0, size=len(pairs) + size)
    couplings = tuple((i, j, float(v)) for (i, j), v in zip(pairs, values[: len(pairs)]))
    fields = tuple(float(v) for v in values[len(pairs):])
    return ProblemInstance(
        family=family,
        size=size,
        couplings=couplings,
        fields=fields,
        seed=_seed_tuple(rng_seed),
    )


# ---------------------------------------------------------------------------
# Parity (pair-qubit) encoding of the fully connected model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LhzEncoding:
    """Bookkeeping for one parity encoding.

    Physical qubit k corresponds to the logical pair ``pairs[k]`` (over the
    extended logical index set: 0..M-1 plus, when fields are encoded, the
    auxiliary index M fixed to +1).  ``physical_fields[k]`` is its local
    term.  On the triangular grid layout, qubit (i, j) occupies cell
    (row=j-1, col=i); plaquettes are the 2x2 grid cells (4-body) and the
    diagonal-truncated cells (3-body).
    """

    logical_size: int
    includes_fields: bool
    pairs: tuple[tuple[int, int], ...]
    plaquettes: tuple[tuple[int, ...], ...]
    physical_fields: tuple[float, ...]

    @property
    def n_physical(self) -> int:
        return len(self.pairs)

    @property
    def n_logical_extended(self) -> int:
        return self.logical_size + (1 if self.includes_fields else 0)

    @property
    def grid_shape(self) -> tuple[int, int]:
        n = self.n_logical_extended
        return (n - 1, n - 1)

    def positions(self) -> np.ndarray:
        """(n_physical, 2) array of (row, col) grid cells, one per qubit."""
        return np.array([(j - 1, i) for i, j in self.pairs], dtype=int)


def _plaquettes_for(n_logical: int) -> list[tuple[int, ...]]:
    """Plaquette index tuples for the pair lattice of ``n_logical`` spins.

    Every plaquette multiplies pair spins whose logical indices each appear
    an even number of times, so the consistent sector has product +1.
    """
    index = {pair: k for k, pair in enumerate(pair_list(n_logical))}

    def cell(r: int, c: int) -> int:
        return index[(c, r + 1)]

    plaquettes: list[tuple[int, ...]] = []
    for r in range(n_logical - 2):
        for c in range(r + 1):
            if c < r:
                plaq = (cell(r, c), cell(r, c + 1), cell(r + 1, c), cell(r + 1, c + 1))
            else:
                plaq = (cell(r, r), cell(r + 1, r), cell(r + 1, r + 1))
            plaquettes.append(tuple(sorted(plaq)))
    return plaquettes


def default_constraint_strength(physical_fields: np.ndarray, logical_size: int) -> float:
    """Penalty strength 2 * max|field| * M, comfortably above the logical sector."""
    peak = float(np.max(np.abs(physical_fields))) if len(physical_fields) else 0.0
    return 2.0 * peak * logical_size


def lhz_encode(
    instance: ProblemInstance,
    constraint_strength: float | None = None,
) -> tuple[ProblemInstance, LhzEncoding]:
    """Encode a fully connected instance into the local pair-qubit model.

    Each logical coupling J_ij becomes the local field of physical qubit
    (i, j).  If the instance has any nonzero field K_i, an auxiliary
    logical qubit (index M, fixed to +1) is added and each K_i becomes the
    field of the physical pair qubit (i, M); the auxiliary qubit itself is
    eliminated analytically and never simulated.
    """
    if instance.family is not Family.ALL_TO_ALL:
        raise InvalidInstanceError("parity encoding is defined for fully connected instances")
    includes_fields = any(v != 0.0 for v in instance.fields)
    m = instance.size
    n_logical = m + 1 if includes_fields else m

    logical = {(i, j): v for i, j, v in instance.couplings}
    if includes_fields:
        for i, k in enumerate(instance.fields):
            logical[(i, m)] = k

    pairs = pair_list(n_logical)
    physical_fields = np.array([logical[p] for p in pairs], dtype=float)
    plaquettes = tuple(_plaquettes_for(n_logical))

    if constraint_strength is None:
        constraint_strength = default_constraint_strength(physical_fields, m)
    if constraint_strength < 0:
        raise InvalidInstanceError(f"constraint strength must be >= 0, got {constraint_strength}")

    encoding = LhzEncoding(
        logical_size=m,
        includes_fields=includes_fields,
        pairs=tuple(pairs),
        plaquettes=plaquettes,
        physical_fields=tuple(float(v) for v in physical_fields),
    )
    physical = ProblemInstance(
        family=Family.LHZ_PHYSICAL,
        size=m,
        couplings=tuple((i, j, float(v)) for (i, j), v in zip(pairs, physical_fields)),
        fields=(),
        seed=instance.seed,
        constraint_strength=float(constraint_strength),
        plaquettes=plaquettes,
    )
    return physical, encoding


def with_couplings(instance: ProblemInstance, replacements: dict[int, float]) -> ProblemInstance:
    """Copy of ``instance`` with coupling values overridden by list index."""
    couplings = list(instance.couplings)
    for idx, value in replacements.items():
        if not 0 <= idx < len(couplings):
            raise InvalidInstanceError(f"coupling index {idx} out of range")
        i, j, _ = couplings[idx]
        couplings[idx] = (i, j, float(value))
    return replace(instance, couplings=tuple(couplings))


# ---------------------------------------------------------------------------
# Serialization (one JSON object per instance, stable key order)
# ---------------------------------------------------------------------------

def instance_to_json(instance: ProblemInstance) -> dict:
    obj: dict = {
        "family": instance.family.value,
        "M": instance.size,
        "couplings": [[i, j, v] for i, j, v in instance.couplings],
        "fields": list(instance.fields),
        "seed": list(instance.seed) if instance.seed is not None else None,
    }
    if instance.family is Family.LHZ_PHYSICAL:
        obj["plaquettes"] = [list(p) for p in instance.plaquettes]
        obj["C"] = instance.constraint_strength
    return obj


def instance_from_json(obj: dict) -> ProblemInstance:
    family = Family(obj["family"])
    seed = obj.get("seed")
    return ProblemInstance(
        family=family,
        size=int(obj["M"]),
        couplings=tuple((int(i), int(j), float(v)) for i, j, v in obj["couplings"]),
        fields=tuple(float(v) for v in obj["fields"]),
        seed=tuple(int(s) for s in seed) if seed is not None else None,
        constraint_strength=float(obj["C"]) if "C" in obj else None,
        plaquettes=tuple(tuple(int(q) for q in p) for p in obj["plaquettes"])
        if "plaquettes" in obj
        else None,
    )
