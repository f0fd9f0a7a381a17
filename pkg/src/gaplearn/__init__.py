"""Spectral-gap sweeps of spin instances and neural surrogates that learn them."""

__version__ = "0.1.0"

from .spinmodel import (
    Family,
    LhzEncoding,
    ProblemInstance,
    SweepSchedule,
    instance_from_json,
    instance_to_json,
    lhz_encode,
    parameter_count,
    sample_instance,
    schedule,
)
from .spectrum import (
    GapTrajectory,
    SolverPolicy,
    SweepHamiltonian,
    classical_diagonal,
    classical_gap,
    classical_two_lowest,
    dense_two_lowest,
    gap_trajectory,
    lanczos_two_lowest,
    min_gap_scan,
    read_trajectories,
    satisfying_sector,
    sector_energies,
    trajectory_minima,
    write_trajectories,
)
from .dataset import (
    GapDataset,
    PlacedEncoder,
    Sample,
    generate_samples,
    load_dataset,
    save_dataset,
    split_indices,
    subset,
)
from .budget import estimate_runs, format_duration, speedup_analysis
from .errors import (
    ChecksumError,
    ConvergenceError,
    GaplearnError,
    InvalidInstanceError,
    ResourceLimitError,
    TrainingDivergedError,
)

__all__ = [
    "ChecksumError",
    "ConvergenceError",
    "Family",
    "GapDataset",
    "GapTrajectory",
    "GaplearnError",
    "InvalidInstanceError",
    "LhzEncoding",
    "PlacedEncoder",
    "ProblemInstance",
    "ResourceLimitError",
    "Sample",
    "SolverPolicy",
    "SweepHamiltonian",
    "SweepSchedule",
    "TrainingDivergedError",
    "__version__",
    "classical_diagonal",
    "classical_gap",
    "classical_two_lowest",
    "dense_two_lowest",
    "estimate_runs",
    "format_duration",
    "gap_trajectory",
    "generate_samples",
    "instance_from_json",
    "instance_to_json",
    "lanczos_two_lowest",
    "lhz_encode",
    "load_dataset",
    "min_gap_scan",
    "parameter_count",
    "read_trajectories",
    "sample_instance",
    "satisfying_sector",
    "save_dataset",
    "schedule",
    "sector_energies",
    "speedup_analysis",
    "split_indices",
    "subset",
    "trajectory_minima",
    "write_trajectories",
]
