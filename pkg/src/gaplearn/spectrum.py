"""Two lowest eigenvalues of the interpolating Hamiltonian along a sweep.

The sweep Hamiltonian on n qubits is

    H(lam) = -(1 - lam) * sum_i sigma^x_i + lam * H_problem,

where H_problem is diagonal in the computational basis (see spinmodel).
Basis state b (an integer) assigns spin z_i = 1 - 2*((b >> i) & 1) to
qubit i.  The gap g(lam) = E1(lam) - E0(lam) starts at exactly 2 for any
instance and ends at the classical gap of H_problem.

Two solver routes are kept deliberately independent: a dense route that
materializes the full matrix and calls eigvalsh, and a matrix-free
deflated Lanczos route with full reorthogonalization.  They cross-check
each other in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import jsonio
from .errors import ConvergenceError, InvalidInstanceError, ResourceLimitError
from .spinmodel import (
    Family,
    ProblemInstance,
    SweepSchedule,
    instance_to_json,
    schedule,
    with_couplings,
)

FORMAT_VERSION = 1

# Memory hard cap for the dense route (f64 matrix at 12 qubits is 128 MiB).
DENSE_QUBIT_CAP = 12


def classical_diagonal(instance: ProblemInstance) -> np.ndarray:
    """Diagonal of H_problem over all 2**n basis states, in basis order."""
    n = instance.n_qubits
    dim = 1 << n
    b = np.arange(dim)
    z = np.empty((dim, n), dtype=np.int8)
    for i in range(n):
        z[:, i] = 1 - 2 * ((b >> i) & 1)

    diag = np.zeros(dim)
    if instance.family is Family.LHZ_PHYSICAL:
        for k, (_, _, v) in enumerate(instance.couplings):
            diag += v * z[:, k]
        c = instance.constraint_strength
        for plaq in instance.plaquettes:
            prod = z[:, plaq[0]].copy()
            for q in plaq[1:]:
                prod *= z[:, q]
            diag -= c * prod
    else:
        for i, j, v in instance.couplings:
            diag += v * (z[:, i] * z[:, j])
        for i, k in enumerate(instance.fields):
            diag += k * z[:, i]
    return diag


def satisfying_sector(instance: ProblemInstance) -> np.ndarray:
    """Boolean mask of basis states where every plaquette product is +1."""
    if instance.family is not Family.LHZ_PHYSICAL:
        raise InvalidInstanceError("plaquette sectors exist only for the parity-encoded family")
    n = instance.n_qubits
    dim = 1 << n
    b = np.arange(dim)
    z = np.empty((dim, n), dtype=np.int8)
    for i in range(n):
        z[:, i] = 1 - 2 * ((b >> i) & 1)
    mask = np.ones(dim, dtype=bool)
    for plaq in instance.plaquettes:
        prod = z[:, plaq[0]].copy()
        for q in plaq[1:]:
            prod *= z[:, q]
        mask &= prod == 1
    return mask


def sector_energies(instance: ProblemInstance) -> np.ndarray:
    """Sorted constraint-satisfying energies, shifted back to the logical zero.

    Within the satisfying sector every plaquette term contributes -C, so
    adding C * n_plaquettes recovers the energies of the logical model the
    instance encodes.
    """
    diag = classical_diagonal(instance)
    mask = satisfying_sector(instance)
    offset = instance.constraint_strength * len(instance.plaquettes)
    return np.sort(diag[mask]) + offset


def classical_two_lowest(instance: ProblemInstance) -> tuple[float, float]:
    """Two lowest classical energies, counting multiplicity."""
    diag = classical_diagonal(instance)
    lowest = np.partition(diag, 1)[:2]
    return float(lowest.min()), float(lowest.max())


def classical_gap(instance: ProblemInstance) -> float:
    e0, e1 = classical_two_lowest(instance)
    return e1 - e0


class SweepHamiltonian:
    """H(lam) for one instance, applied matrix-free.

    The problem diagonal is computed once; each matvec costs O(n * 2**n)
    via n single-axis reversals of the state reshaped to (2,) * n.
    """

    def __init__(self, instance: ProblemInstance):
        self.instance = instance
        self.n_qubits = instance.n_qubits
        self.dim = 1 << self.n_qubits
        self.problem_diagonal = classical_diagonal(instance)

    def diagonal(self, lam: float) -> np.ndarray:
        return lam * self.problem_diagonal

    def apply(self, lam: float, v: np.ndarray) -> np.ndarray:
        out = (lam * self.problem_diagonal) * v
        driver = 1.0 - lam
        if driver != 0.0:
            w = v.reshape((2,) * self.n_qubits)
            acc = np.zeros_like(w)
            for axis in range(self.n_qubits):
                acc += np.flip(w, axis=axis)
            out -= driver * acc.reshape(-1)
        return out

    def matvec(self, lam: float):
        return lambda v: self.apply(lam, v)


def dense_matrix(instance: ProblemInstance, lam: float) -> np.ndarray:
    n = instance.n_qubits
    if n > DENSE_QUBIT_CAP:
        raise ResourceLimitError(
            f"dense route capped at {DENSE_QUBIT_CAP} qubits, instance has {n}"
        )
    dim = 1 << n
    h = np.zeros((dim, dim))
    np.fill_diagonal(h, lam * classical_diagonal(instance))
    idx = np.arange(dim)
    driver = 1.0 - lam
    for i in range(n):
        h[idx, idx ^ (1 << i)] -= driver
    return h


def dense_two_lowest(instance: ProblemInstance, lam: float) -> tuple[float, float]:
    """Reference solver: full eigvalsh of the materialized matrix."""
    vals = np.linalg.eigvalsh(dense_matrix(instance, lam))
    return float(vals[0]), float(vals[1])


# ---------------------------------------------------------------------------
# Deflated Lanczos with full reorthogonalization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LanczosResult:
    value: float
    vector: np.ndarray = field(repr=False)
    iterations: int
    residual: float


def _orthogonalize(w: np.ndarray, basis: list[np.ndarray], sweeps: int = 2) -> np.ndarray:
    for _ in range(sweeps):
        for q in basis:
            w = w - (q @ w) * q
    return w


def lanczos_lowest(
    matvec,
    dim: int,
    v0: np.ndarray,
    *,
    deflate: tuple[np.ndarray, ...] = (),
    tol: float = 1e-8,
    max_iter: int = 400,
    rng: np.random.Generator | None = None,
) -> LanczosResult:
    """Lowest eigenpair of a symmetric operator, restricted away from ``deflate``.

    Builds a Krylov basis with full (two-sweep) reorthogonalization against
    all stored vectors and the deflation set, so it stays reliable through
    near-degeneracies.  Convergence is declared when the residual bound
    beta * |s_last| drops below ``tol``.  An invariant subspace (beta ~ 0)
    that has not yet converged is escaped by restarting the recurrence from
    a fresh random direction; the tridiagonal matrix then simply becomes
    block diagonal.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    max_basis = dim - len(deflate)

    v = _orthogonalize(np.asarray(v0, dtype=float).copy(), list(deflate))
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        v = _orthogonalize(rng.standard_normal(dim), list(deflate))
        norm = np.linalg.norm(v)
    basis = [v / norm]

    alphas: list[float] = []
    betas: list[float] = []
    theta, s = 0.0, np.array([1.0])
    residual = np.inf
    for it in range(1, max_iter + 1):
        w = matvec(basis[-1])
        alphas.append(float(basis[-1] @ w))
        w = _orthogonalize(w, list(deflate) + basis)
        beta = float(np.linalg.norm(w))

        if len(alphas) == 1:
            theta, s = alphas[0], np.array([1.0])
        else:
            vals, vecs = eigh_tridiagonal(
                np.array(alphas), np.array(betas), select="i", select_range=(0, 0)
            )
            theta, s = float(vals[0]), vecs[:, 0]
        residual = beta * abs(float(s[-1]))

        if residual <= tol or len(alphas) >= max_basis:
            vector = np.stack(basis, axis=1) @ s
            vector /= np.linalg.norm(vector)
            return LanczosResult(theta, vector, it, residual)

        scale = max(1.0, float(np.max(np.abs(alphas))))
        if beta <= 1e-12 * scale:
            w = _orthogonalize(rng.standard_normal(dim), list(deflate) + basis)
            beta_new = float(np.linalg.norm(w))
            if beta_new < 1e-12:
                vector = np.stack(basis, axis=1) @ s
                vector /= np.linalg.norm(vector)
                return LanczosResult(theta, vector, it, residual)
            basis.append(w / beta_new)
            betas.append(0.0)
        else:
            basis.append(w / beta)
            betas.append(beta)

    raise ConvergenceError(
        f"no convergence after {max_iter} iterations (residual {residual:.3e}, tol {tol:.1e})",
        residual=residual,
    )


def lanczos_two_lowest(
    matvec,
    dim: int,
    *,
    tol: float = 1e-8,
    max_iter: int = 400,
    rng: np.random.Generator | None = None,
    start_ground: np.ndarray | None = None,
    start_excited: np.ndarray | None = None,
) -> tuple[LanczosResult, LanczosResult]:
    """Ground and first excited eigenpair via two deflated passes.

    The second pass deflates the converged ground vector, so it resolves
    the first excited energy also when the ground level is degenerate.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    v0 = start_ground if start_ground is not None else rng.standard_normal(dim)
    ground = lanczos_lowest(matvec, dim, v0, tol=tol, max_iter=max_iter, rng=rng)
    v1 = start_excited if start_excited is not None else rng.standard_normal(dim)
    excited = lanczos_lowest(
        matvec, dim, v1, deflate=(ground.vector,), tol=tol, max_iter=max_iter, rng=rng
    )
    return ground, excited


# ---------------------------------------------------------------------------
# Gap trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverPolicy:
    """Which route solves each sweep point and how hard it tries.

    ``auto`` goes dense up to ``dense_max_qubits`` (kept small: on one core
    a full eigvalsh at every sweep point dominates generation time well
    before the memory cap bites) and Lanczos above.
    """

    method: str = "auto"
    dense_max_qubits: int = 8
    tol: float = 1e-10
    max_iter: int = 400
    seed: int = 0

    def resolve(self, n_qubits: int) -> str:
        if self.method == "auto":
            return "dense" if n_qubits <= self.dense_max_qubits else "lanczos"
        if self.method in ("dense", "lanczos"):
            return self.method
        raise InvalidInstanceError(f"unknown solver method {self.method!r}")


@dataclass(frozen=True)
class GapTrajectory:
    instance: ProblemInstance
    lambdas: np.ndarray = field(repr=False)
    gaps: np.ndarray = field(repr=False)
    energies: np.ndarray = field(repr=False)
    method: str = "dense"
    tol: float = 0.0

    def min_gap(self) -> tuple[float, float]:
        """(lambda, gap) at the smallest gap along the sweep."""
        k = int(np.argmin(self.gaps))
        return float(self.lambdas[k]), float(self.gaps[k])


def instance_id(instance: ProblemInstance) -> str:
    digest = jsonio.sha256_text(jsonio.dumps(instance_to_json(instance)))
    return f"{instance.family.value}-M{instance.size}-{digest[:12]}"


def two_lowest(
    instance: ProblemInstance, lam: float, policy: SolverPolicy | None = None
) -> tuple[float, float]:
    """Two lowest sweep energies at a single point, route chosen by policy."""
    policy = policy or SolverPolicy()
    if policy.resolve(instance.n_qubits) == "dense":
        return dense_two_lowest(instance, lam)
    ham = SweepHamiltonian(instance)
    rng = np.random.default_rng((policy.seed, 0))
    ground, excited = lanczos_two_lowest(
        ham.matvec(lam), ham.dim, tol=policy.tol, max_iter=policy.max_iter, rng=rng
    )
    return ground.value, excited.value


def gap_trajectory(
    instance: ProblemInstance,
    sched: SweepSchedule | None = None,
    policy: SolverPolicy | None = None,
) -> GapTrajectory:
    """g(lam) over the whole schedule.

    The Lanczos route warm-starts each sweep point from the previous
    point's eigenvectors, which cuts the iteration count sharply once the
    sweep is underway.
    """
    sched = sched or schedule()
    policy = policy or SolverPolicy()
    method = policy.resolve(instance.n_qubits)
    lambdas = sched.values
    energies = np.zeros((len(lambdas), 2))

    if method == "dense":
        for k, lam in enumerate(lambdas):
            energies[k] = dense_two_lowest(instance, lam)
    else:
        ham = SweepHamiltonian(instance)
        rng = np.random.default_rng((policy.seed, 1))
        start_ground = start_excited = None
        for k, lam in enumerate(lambdas):
            ground, excited = lanczos_two_lowest(
                ham.matvec(lam),
                ham.dim,
                tol=policy.tol,
                max_iter=policy.max_iter,
                rng=rng,
                start_ground=start_ground,
                start_excited=start_excited,
            )
            energies[k] = (ground.value, excited.value)
            start_ground, start_excited = ground.vector, excited.vector

    gaps = np.maximum(energies[:, 1] - energies[:, 0], 0.0)
    return GapTrajectory(
        instance=instance,
        lambdas=lambdas.copy(),
        gaps=gaps,
        energies=energies,
        method=method,
        tol=policy.tol if method == "lanczos" else 0.0,
    )


def trajectory_minima(trajectories: list[GapTrajectory]) -> np.ndarray:
    """(n, 2) array of (lambda_at_min, min_gap), one row per trajectory."""
    return np.array([t.min_gap() for t in trajectories])


def min_gap_scan(
    instance: ProblemInstance,
    pair: tuple[int, int],
    values_a: np.ndarray,
    values_b: np.ndarray,
    sched: SweepSchedule | None = None,
    policy: SolverPolicy | None = None,
) -> np.ndarray:
    """Minimum sweep gap as two couplings scan a grid, all else held fixed.

    ``pair`` indexes the instance's coupling list; entry (i, j) of the
    result is the minimum of g(lam) for the instance with coupling
    ``pair[0]`` set to ``values_a[i]`` and ``pair[1]`` to ``values_b[j]``.
    """
    a, b = pair
    if a == b:
        raise InvalidInstanceError(f"scan needs two distinct couplings, got ({a}, {b})")
    values_a = np.asarray(values_a, dtype=float)
    values_b = np.asarray(values_b, dtype=float)
    out = np.empty((values_a.size, values_b.size))
    for i, va in enumerate(values_a):
        for j, vb in enumerate(values_b):
            varied = with_couplings(instance, {a: float(va), b: float(vb)})
            out[i, j] = gap_trajectory(varied, sched, policy).min_gap()[1]
    return out


def gap_histogram(
    values: np.ndarray, bins: int = 30, value_range: tuple[float, float] | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of gap values (thin wrapper, fixed here for report reuse)."""
    return np.histogram(np.asarray(values, dtype=float), bins=bins, range=value_range)


# ---------------------------------------------------------------------------
# Trajectory files: one JSON record per sweep point, manifest written last
# ---------------------------------------------------------------------------

def manifest_path_for(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".manifest.json")


def write_trajectories(path: str | Path, trajectories: list[GapTrajectory]) -> dict:
    """Write flat per-point records plus a sidecar manifest; returns the manifest.

    Record fields are scalars only, so downstream tools can stream the file
    line by line.  The manifest carries counts, solver settings, and the
    content checksum, and is written after the data file so a crash cannot
    leave a manifest describing a partial file.
    """
    path = Path(path)
    records = []
    for traj in trajectories:
        ident = instance_id(traj.instance)
        seed = list(traj.instance.seed) if traj.instance.seed is not None else None
        for lam, gap in zip(traj.lambdas, traj.gaps):
            records.append(
                {
                    "instance_id": ident,
                    "family": traj.instance.family.value,
                    "M": traj.instance.size,
                    "seed": seed,
                    "lambda": float(lam),
                    "gap": float(gap),
                }
            )
    count = jsonio.write_jsonl(path, records)

    methods = sorted({t.method for t in trajectories})
    tols = sorted({t.tol for t in trajectories if t.method == "lanczos"})
    n_steps = sorted({len(t.lambdas) for t in trajectories})
    manifest = {
        "version": FORMAT_VERSION,
        "kind": "trajectories",
        "n_instances": len(trajectories),
        "n_steps": n_steps[0] if len(n_steps) == 1 else n_steps,
        "n_records": count,
        "solver_methods": methods,
        "lanczos_tol": tols[0] if len(tols) == 1 else tols,
        "sha256": jsonio.sha256_file(path),
    }
    jsonio.write_json(manifest_path_for(path), manifest)
    return manifest


def read_trajectories(path: str | Path, verify: bool = True) -> list[dict]:
    """Read trajectory records back, grouped per instance in file order.

    Each group is a dict with instance_id, family, M, seed, and lambda/gap
    arrays.  With ``verify`` the data file is checked against the manifest
    checksum when a manifest is present.
    """
    path = Path(path)
    if verify:
        mpath = manifest_path_for(path)
        if mpath.exists():
            manifest = jsonio.read_json(mpath)
            jsonio.verify_checksum(path, manifest["sha256"])

    groups: dict[str, dict] = {}
    for rec in jsonio.read_jsonl(path):
        g = groups.get(rec["instance_id"])
        if g is None:
            g = {
                "instance_id": rec["instance_id"],
                "family": rec["family"],
                "M": rec["M"],
                "seed": rec["seed"],
                "lambdas": [],
                "gaps": [],
            }
            groups[rec["instance_id"]] = g
        g["lambdas"].append(rec["lambda"])
        g["gaps"].append(rec["gap"])
    out = []
    for g in groups.values():
        g["lambdas"] = np.array(g["lambdas"])
        g["gaps"] = np.array(g["gaps"])
        out.append(g)
    return out
