"""Exact cost comparisons between direct solving and a trained surrogate.

All arithmetic is done in fractions: inputs pass through their decimal
string form (0.005 becomes 1/200), so thresholds close to an integer are
decided exactly rather than by float luck.

The surrogate pays once for its training set and training time, then
answers queries at inference cost; the direct route pays the solver cost
per query:

    cost_direct(N)    = N * tau_solve
    cost_surrogate(N) = n_train * (tau_generate + tau_train) + N * tau_infer

The break-even query count is their crossing point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor

from .errors import InvalidInstanceError

NumberLike = int | float | str | Fraction

_DAY = 86400
_UNITS = ((_DAY, "days"), (3600, "hours"), (60, "minutes"), (1, "seconds"))


def as_fraction(value: NumberLike) -> Fraction:
    """Exact rational from a number, reading floats as their shortest decimal."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class SpeedupAnalysis:
    n_train: int
    tau_solve: Fraction
    tau_train: Fraction
    tau_infer: Fraction
    tau_generate: Fraction
    fixed_cost: Fraction
    threshold: Fraction | None
    min_use_count: int | None

    def to_json(self) -> dict:
        return {
            "n_train": self.n_train,
            "tau_solve_seconds": str(self.tau_solve),
            "tau_train_seconds": str(self.tau_train),
            "tau_infer_seconds": str(self.tau_infer),
            "tau_generate_seconds": str(self.tau_generate),
            "fixed_cost_seconds": str(self.fixed_cost),
            "threshold": str(self.threshold) if self.threshold is not None else None,
            "threshold_approx": float(self.threshold) if self.threshold is not None else None,
            "min_use_count": self.min_use_count,
        }


def speedup_analysis(
    n_train: int,
    tau_solve: NumberLike,
    tau_train: NumberLike,
    tau_infer: NumberLike,
    tau_generate: NumberLike | None = None,
) -> SpeedupAnalysis:
    """Break-even analysis; ``min_use_count`` is the least N with a strict win.

    ``tau_generate`` is the per-sample cost of producing one training sweep
    (training instances are often smaller than the ones queried later); it
    defaults to ``tau_solve``.  When inference is not faster than solving
    there is no crossing and both threshold fields are None.
    """
    if n_train < 0:
        raise InvalidInstanceError(f"n_train must be >= 0, got {n_train}")
    tau_solve = as_fraction(tau_solve)
    tau_train = as_fraction(tau_train)
    tau_infer = as_fraction(tau_infer)
    tau_generate = tau_solve if tau_generate is None else as_fraction(tau_generate)
    if min(tau_solve, tau_train, tau_infer, tau_generate) < 0:
        raise InvalidInstanceError("per-run times must be >= 0")

    fixed = n_train * (tau_generate + tau_train)
    if tau_solve <= tau_infer:
        threshold = None
        min_use = None
    else:
        threshold = fixed / (tau_solve - tau_infer)
        min_use = floor(threshold) + 1
    return SpeedupAnalysis(
        n_train=n_train,
        tau_solve=tau_solve,
        tau_train=tau_train,
        tau_infer=tau_infer,
        tau_generate=tau_generate,
        fixed_cost=fixed,
        threshold=threshold,
        min_use_count=min_use,
    )


def estimate_runs(n_instances: int, n_steps: int, repetitions: int) -> int:
    """Total experiment count: instances x sweep points x repetitions per point.

    Plain integer arithmetic, so counts like 10**11 never overflow or round.
    """
    for name, value in (
        ("n_instances", n_instances),
        ("n_steps", n_steps),
        ("repetitions", repetitions),
    ):
        if not isinstance(value, int) or value < 1:
            raise InvalidInstanceError(f"{name} must be a positive integer, got {value!r}")
    return n_instances * n_steps * repetitions


def runtime_seconds(total_runs: int, seconds_per_run: NumberLike) -> Fraction:
    return total_runs * as_fraction(seconds_per_run)


def format_duration(seconds: NumberLike) -> str:
    """Human-sized rendering, largest fitting unit, e.g. '5.787 days'."""
    seconds = as_fraction(seconds)
    if seconds < 0:
        raise InvalidInstanceError("durations cannot be negative")
    for size, label in _UNITS:
        if seconds >= size or size == 1:
            return f"{float(seconds / size):.4g} {label}"
    return f"{float(seconds):.4g} seconds"
