"""Sweep spectra: dense route, Lanczos route, and frozen analytic oracles."""

import numpy as np
import pytest

from gaplearn.errors import ChecksumError, ConvergenceError, InvalidInstanceError, ResourceLimitError
from gaplearn.spectrum import (
    SolverPolicy,
    SweepHamiltonian,
    classical_diagonal,
    classical_gap,
    classical_two_lowest,
    dense_matrix,
    dense_two_lowest,
    gap_histogram,
    gap_trajectory,
    instance_id,
    lanczos_lowest,
    lanczos_two_lowest,
    min_gap_scan,
    read_trajectories,
    sector_energies,
    trajectory_minima,
    two_lowest,
    write_trajectories,
)
from gaplearn.spinmodel import Family, ProblemInstance, lhz_encode, sample_instance, schedule


def kron_matrix(instance, lam):
    """Independent dense construction via explicit Kronecker products."""
    n = instance.n_qubits
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)

    def site_op(single, site):
        m = np.eye(1)
        for q in range(n - 1, -1, -1):
            m = np.kron(m, single if q == site else eye)
        return m

    h = np.zeros((2**n, 2**n))
    if instance.family is Family.LHZ_PHYSICAL:
        for k, (_, _, v) in enumerate(instance.couplings):
            h += lam * v * site_op(z, k)
        for plaq in instance.plaquettes:
            prod = np.eye(2**n)
            for q in plaq:
                prod = prod @ site_op(z, q)
            h -= lam * instance.constraint_strength * prod
    else:
        for i, j, v in instance.couplings:
            h += lam * v * (site_op(z, i) @ site_op(z, j))
        for i, k in enumerate(instance.fields):
            h += lam * k * site_op(z, i)
    for q in range(n):
        h -= (1.0 - lam) * site_op(x, q)
    return h


def brute_force_two_lowest(instance):
    """Classical reference: evaluate the energy of every bitstring."""
    n = instance.n_qubits
    energies = []
    for b in range(2**n):
        zbits = [1 - 2 * ((b >> i) & 1) for i in range(n)]
        e = 0.0
        if instance.family is Family.LHZ_PHYSICAL:
            for k, (_, _, v) in enumerate(instance.couplings):
                e += v * zbits[k]
            for plaq in instance.plaquettes:
                prod = 1
                for q in plaq:
                    prod *= zbits[q]
                e -= instance.constraint_strength * prod
        else:
            for i, j, v in instance.couplings:
                e += v * zbits[i] * zbits[j]
            for i, k in enumerate(instance.fields):
                e += k * zbits[i]
        energies.append(e)
    energies.sort()
    return energies[0], energies[1]


def test_diagonal_basis_convention():
    # basis order 00,01,10,11 with z = +1 for bit value 0
    inst = ProblemInstance(Family.NEAREST_NEIGHBOR_1D, 2, ((0, 1, 1.0),), (0.0, 0.0))
    assert classical_diagonal(inst).tolist() == [1.0, -1.0, -1.0, 1.0]
    inst = ProblemInstance(Family.NEAREST_NEIGHBOR_1D, 2, ((0, 1, 0.0),), (1.0, 0.0))
    assert classical_diagonal(inst).tolist() == [1.0, -1.0, 1.0, -1.0]


def test_dense_matches_kronecker_construction():
    cases = [
        sample_instance(Family.NEAREST_NEIGHBOR_1D, 5, 0),
        sample_instance(Family.ALL_TO_ALL, 4, 1),
        lhz_encode(sample_instance(Family.ALL_TO_ALL, 3, 2))[0],
    ]
    for inst in cases:
        for lam in (0.0, 0.35, 0.7, 1.0):
            h = dense_matrix(inst, lam)
            assert np.allclose(h, h.T)
            assert np.max(np.abs(h - kron_matrix(inst, lam))) < 1e-12


def test_two_spin_coupled_closed_form():
    # frozen oracle: g = sqrt(lam^2 J^2 + 4 (1-lam)^2) - lam |J|
    for coupling in (1.0, -0.7, 0.3):
        inst = ProblemInstance(
            Family.NEAREST_NEIGHBOR_1D, 2, ((0, 1, coupling),), (0.0, 0.0)
        )
        for lam in np.linspace(0.0, 1.0, 11):
            e0, e1 = dense_two_lowest(inst, lam)
            expected = np.sqrt(lam**2 * coupling**2 + 4 * (1 - lam) ** 2) - lam * abs(coupling)
            assert abs((e1 - e0) - expected) < 1e-12


def test_two_spin_field_closed_form():
    # frozen oracle for uncoupled spins: g = min_i 2 sqrt(lam^2 k_i^2 + (1-lam)^2);
    # note the min, an unmagnetized spin costs 2(1-lam) to excite
    for fields in ((1.0, 0.0), (0.8, -0.4)):
        inst = ProblemInstance(Family.NEAREST_NEIGHBOR_1D, 2, ((0, 1, 0.0),), fields)
        for lam in np.linspace(0.0, 1.0, 11):
            e0, e1 = dense_two_lowest(inst, lam)
            expected = min(
                2 * np.sqrt(lam**2 * k**2 + (1 - lam) ** 2) for k in fields
            )
            assert abs((e1 - e0) - expected) < 1e-12


def test_endpoint_identities():
    for index in range(10):
        for family in (Family.NEAREST_NEIGHBOR_1D, Family.ALL_TO_ALL):
            inst = sample_instance(family, 3 + index % 4, (17, index))
            e0, e1 = dense_two_lowest(inst, 0.0)
            assert abs((e1 - e0) - 2.0) < 1e-12
            e0, e1 = dense_two_lowest(inst, 1.0)
            b0, b1 = brute_force_two_lowest(inst)
            assert abs(e0 - b0) < 1e-9 and abs(e1 - b1) < 1e-9


def test_classical_two_lowest_counts_multiplicity():
    # field-free instances have a global-flip degeneracy, so the gap is 0
    base = sample_instance(Family.ALL_TO_ALL, 4, 3)
    inst = ProblemInstance(Family.ALL_TO_ALL, 4, base.couplings, (0.0,) * 4)
    e0, e1 = classical_two_lowest(inst)
    assert e0 == e1
    assert classical_gap(inst) == 0.0
    b0, b1 = brute_force_two_lowest(inst)
    assert e0 == pytest.approx(b0) and e1 == pytest.approx(b1)


def test_spin_relabeling_invariance():
    inst = sample_instance(Family.NEAREST_NEIGHBOR_1D, 5, 4)
    m = inst.size
    reversed_inst = ProblemInstance(
        Family.NEAREST_NEIGHBOR_1D,
        m,
        tuple(
            (i, i + 1, inst.couplings[m - 2 - i][2]) for i in range(m - 1)
        ),
        tuple(reversed(inst.fields)),
    )
    for lam in (0.2, 0.5, 0.9):
        a = dense_two_lowest(inst, lam)
        b = dense_two_lowest(reversed_inst, lam)
        assert a == pytest.approx(b, abs=1e-12)


def test_global_field_flip_invariance():
    # z -> -z maps fields to -fields and leaves couplings alone
    inst = sample_instance(Family.ALL_TO_ALL, 4, 5)
    flipped = ProblemInstance(
        Family.ALL_TO_ALL, 4, inst.couplings, tuple(-k for k in inst.fields)
    )
    for lam in (0.3, 0.6, 1.0):
        a = dense_two_lowest(inst, lam)
        b = dense_two_lowest(flipped, lam)
        assert a == pytest.approx(b, abs=1e-12)


def test_sweep_hamiltonian_apply_matches_dense():
    rng = np.random.default_rng(6)
    for inst in (
        sample_instance(Family.NEAREST_NEIGHBOR_1D, 6, 6),
        lhz_encode(sample_instance(Family.ALL_TO_ALL, 3, 7))[0],
    ):
        ham = SweepHamiltonian(inst)
        for lam in (0.0, 0.4, 1.0):
            h = dense_matrix(inst, lam)
            v = rng.standard_normal(ham.dim)
            assert np.allclose(ham.apply(lam, v), h @ v, atol=1e-12)


def test_dense_cap():
    inst = sample_instance(Family.NEAREST_NEIGHBOR_1D, 13, 0)
    with pytest.raises(ResourceLimitError):
        dense_matrix(inst, 0.5)


def test_lanczos_on_explicit_matrix():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((40, 40))
    a = (a + a.T) / 2
    vals = np.linalg.eigvalsh(a)
    ground = lanczos_lowest(lambda v: a @ v, 40, rng.standard_normal(40), tol=1e-12, rng=rng)
    assert ground.value == pytest.approx(vals[0], abs=1e-9)
    assert ground.residual <= 1e-12
    g, e = lanczos_two_lowest(lambda v: a @ v, 40, tol=1e-12, rng=rng)
    assert g.value == pytest.approx(vals[0], abs=1e-9)
    assert e.value == pytest.approx(vals[1], abs=1e-9)


def test_lanczos_degenerate_lowest():
    # deflation must return the second copy of a degenerate ground level
    diag = np.array([-2.0, -2.0, 0.5, 1.0, 3.0, 4.0])
    matvec = lambda v: diag * v
    rng = np.random.default_rng(9)
    g, e = lanczos_two_lowest(matvec, 6, tol=1e-12, rng=rng)
    assert g.value == pytest.approx(-2.0, abs=1e-10)
    assert e.value == pytest.approx(-2.0, abs=1e-10)
    assert abs(g.vector @ e.vector) < 1e-8


def test_lanczos_exhaustion_raises():
    rng = np.random.default_rng(10)
    a = rng.standard_normal((200, 200))
    a = (a + a.T) / 2
    with pytest.raises(ConvergenceError) as err:
        lanczos_lowest(lambda v: a @ v, 200, rng.standard_normal(200), tol=1e-14, max_iter=3, rng=rng)
    assert err.value.residual > 0


def test_lanczos_matches_dense_on_sweeps():
    cases = [
        sample_instance(Family.NEAREST_NEIGHBOR_1D, 7, 11),
        sample_instance(Family.ALL_TO_ALL, 6, 12),
        lhz_encode(sample_instance(Family.ALL_TO_ALL, 4, 13))[0],
    ]
    rng = np.random.default_rng(14)
    for inst in cases:
        ham = SweepHamiltonian(inst)
        for lam in (0.05, 0.5, 0.95):
            d0, d1 = dense_two_lowest(inst, lam)
            g, e = lanczos_two_lowest(ham.matvec(lam), ham.dim, tol=1e-10, rng=rng)
            assert abs(g.value - d0) < 1e-8
            assert abs(e.value - d1) < 1e-8


def test_two_lowest_policy_dispatch():
    inst = sample_instance(Family.NEAREST_NEIGHBOR_1D, 5, 15)
    dense = two_lowest(inst, 0.5, SolverPolicy(method="dense"))
    kry = two_lowest(inst, 0.5, SolverPolicy(method="lanczos", tol=1e-12))
    assert dense == pytest.approx(kry, abs=1e-9)
    assert SolverPolicy().resolve(8) == "dense"
    assert SolverPolicy().resolve(9) == "lanczos"
    assert SolverPolicy(method="dense").resolve(15) == "dense"
    with pytest.raises(InvalidInstanceError):
        SolverPolicy(method="qr").resolve(4)


def test_trajectory_routes_agree():
    inst = sample_instance(Family.ALL_TO_ALL, 5, 16)
    sched = schedule(21)
    dense = gap_trajectory(inst, sched, SolverPolicy(method="dense"))
    kry = gap_trajectory(inst, sched, SolverPolicy(method="lanczos", tol=1e-11, seed=1))
    assert dense.method == "dense" and kry.method == "lanczos"
    assert np.max(np.abs(dense.gaps - kry.gaps)) < 1e-8


def test_trajectory_shape_and_continuity():
    inst = sample_instance(Family.NEAREST_NEIGHBOR_1D, 6, 17)
    traj = gap_trajectory(inst, schedule(50))
    assert traj.gaps.shape == (50,)
    assert abs(traj.gaps[0] - 2.0) < 1e-9
    assert np.all(traj.gaps >= 0.0)
    # eigenvalues are Lipschitz in lam with constant ||H_p|| + ||driver||
    bound = np.max(np.abs(classical_diagonal(inst))) + inst.n_qubits
    dlam = traj.lambdas[1] - traj.lambdas[0]
    assert np.max(np.abs(np.diff(traj.gaps))) <= 2 * bound * dlam + 1e-9


def test_min_gap():
    inst = sample_instance(Family.ALL_TO_ALL, 5, 18)
    traj = gap_trajectory(inst, schedule(30))
    lam, gap = traj.min_gap()
    assert gap == traj.gaps.min()
    assert lam in traj.lambdas
    scan = trajectory_minima([traj, traj])
    assert scan.shape == (2, 2)
    assert scan[0, 1] == gap


def test_min_gap_scan_single_point_matches_trajectory():
    inst = sample_instance(Family.NEAREST_NEIGHBOR_1D, 4, 21)
    a_val = inst.couplings[0][2]
    b_val = inst.couplings[1][2]
    sched = schedule(12)
    grid = min_gap_scan(inst, (0, 1), np.array([a_val]), np.array([b_val]), sched)
    assert grid.shape == (1, 1)
    assert grid[0, 0] == pytest.approx(gap_trajectory(inst, sched).min_gap()[1], abs=1e-12)


def test_min_gap_scan_sign_flip_symmetry():
    # with all fields zero, negating both scanned couplings relabels basis
    # states and leaves every sweep spectrum unchanged
    inst = ProblemInstance(Family.NEAREST_NEIGHBOR_1D, 3, ((0, 1, 0.7), (1, 2, -0.4)), (0.0,) * 3)
    vals = np.array([-0.8, 0.0, 0.8])
    grid = min_gap_scan(inst, (0, 1), vals, vals, schedule(10))
    assert np.allclose(grid, grid[::-1, ::-1], atol=1e-10)


def test_min_gap_scan_matches_direct_recomputation():
    inst = sample_instance(Family.NEAREST_NEIGHBOR_1D, 4, 22)
    vals_a = np.linspace(-1.0, 1.0, 3)
    vals_b = np.linspace(-0.5, 0.5, 3)
    sched = schedule(8)
    grid = min_gap_scan(inst, (0, 2), vals_a, vals_b, sched)
    for i, va in enumerate(vals_a):
        for j, vb in enumerate(vals_b):
            coup = list(inst.couplings)
            coup[0] = (coup[0][0], coup[0][1], float(va))
            coup[2] = (coup[2][0], coup[2][1], float(vb))
            varied = ProblemInstance(inst.family, inst.size, tuple(coup), inst.fields)
            assert abs(grid[i, j] - gap_trajectory(varied, sched).min_gap()[1]) < 1e-10


def test_min_gap_scan_rejects_duplicate_index():
    inst = sample_instance(Family.NEAREST_NEIGHBOR_1D, 3, 23)
    with pytest.raises(InvalidInstanceError):
        min_gap_scan(inst, (1, 1), np.array([0.0]), np.array([0.0]))


def test_sector_energies_small_case():
    logical = sample_instance(Family.ALL_TO_ALL, 3, 19)
    physical, _ = lhz_encode(logical)
    m = logical.size
    logical_energies = []
    for b in range(2**m):
        zbits = [1 - 2 * ((b >> i) & 1) for i in range(m)]
        e = sum(v * zbits[i] * zbits[j] for i, j, v in logical.couplings)
        e += sum(k * zbits[i] for i, k in enumerate(logical.fields))
        logical_energies.append(e)
    got = sector_energies(physical)
    # each logical configuration appears once, the auxiliary flip is gauged away
    assert len(got) == 2**m
    assert np.max(np.abs(got - np.sort(logical_energies))) < 1e-9


def test_gap_histogram():
    counts, edges = gap_histogram(np.array([0.1, 0.2, 0.9]), bins=3, value_range=(0.0, 0.9))
    assert counts.tolist() == [2, 0, 1]
    assert len(edges) == 4


def test_instance_id_stable():
    a = sample_instance(Family.ALL_TO_ALL, 5, (20, 0))
    b = sample_instance(Family.ALL_TO_ALL, 5, (20, 0))
    c = sample_instance(Family.ALL_TO_ALL, 5, (20, 1))
    assert instance_id(a) == instance_id(b)
    assert instance_id(a) != instance_id(c)
    assert instance_id(a).startswith("all_to_all-M5-")


def test_trajectory_file_round_trip(tmp_path):
    trajs = [
        gap_trajectory(sample_instance(Family.NEAREST_NEIGHBOR_1D, 4, (21, k)), schedule(9))
        for k in range(3)
    ]
    path = tmp_path / "trajectories.jsonl"
    manifest = write_trajectories(path, trajs)
    assert manifest["n_instances"] == 3
    assert manifest["n_steps"] == 9
    assert manifest["n_records"] == 27
    assert (tmp_path / "trajectories.jsonl.manifest.json").exists()

    groups = read_trajectories(path)
    assert len(groups) == 3
    for traj, group in zip(trajs, groups):
        assert group["instance_id"] == instance_id(traj.instance)
        assert group["M"] == 4
        assert np.allclose(group["lambdas"], traj.lambdas)
        assert np.allclose(group["gaps"], traj.gaps)


def test_trajectory_checksum_detects_corruption(tmp_path):
    trajs = [gap_trajectory(sample_instance(Family.ALL_TO_ALL, 3, 22), schedule(5))]
    path = tmp_path / "trajectories.jsonl"
    write_trajectories(path, trajs)
    data = path.read_bytes()
    last_line = data.splitlines()[-1]
    path.write_bytes(data + last_line + b"\n")
    with pytest.raises(ChecksumError):
        read_trajectories(path)
    groups = read_trajectories(path, verify=False)
    assert len(groups) == 1 and len(groups[0]["gaps"]) == 6
