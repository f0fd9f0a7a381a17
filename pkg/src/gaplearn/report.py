"""Delimited report files and the figures rendered alongside them.

Every report function writes a CSV (the machine-readable interface) and a
PNG of the same stem next to it, returning the paths it wrote.  Figures
use the Agg backend only; nothing here ever opens a window.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .nn.training import History
from .spectrum import GapTrajectory, gap_histogram, instance_id

_FLOAT_FORMAT = ".10g"


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), _FLOAT_FORMAT)
    return str(value)


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def trajectory_report(
    out_dir: str | Path,
    trajectories: list[GapTrajectory],
    stem: str = "trajectories",
    max_plotted: int = 12,
) -> dict[str, Path]:
    """Per-point gap records plus an overlay figure of the first few sweeps."""
    out_dir = Path(out_dir)
    rows = []
    for traj in trajectories:
        ident = instance_id(traj.instance)
        for lam, gap in zip(traj.lambdas, traj.gaps):
            rows.append((ident, lam, gap))
    csv_path = write_csv(out_dir / f"{stem}.csv", ["instance_id", "lambda", "gap"], rows)

    fig, ax = plt.subplots(figsize=(6, 4))
    for traj in trajectories[:max_plotted]:
        ax.plot(traj.lambdas, traj.gaps, lw=1.2)
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("gap")
    ax.set_title(f"{len(trajectories)} sweeps (showing {min(len(trajectories), max_plotted)})")
    png_path = _save(fig, out_dir / f"{stem}.png")
    return {"csv": csv_path, "png": png_path}


def min_gap_report(
    out_dir: str | Path,
    trajectories: list[GapTrajectory],
    stem: str = "min_gaps",
    bins: int = 30,
) -> dict[str, Path]:
    """Minimum gap and its location per instance, with a histogram figure."""
    out_dir = Path(out_dir)
    rows = []
    for traj in trajectories:
        lam, gap = traj.min_gap()
        rows.append((instance_id(traj.instance), lam, gap))
    csv_path = write_csv(
        out_dir / f"{stem}.csv", ["instance_id", "lambda_at_min", "min_gap"], rows
    )

    values = np.array([r[2] for r in rows], dtype=float)
    counts, edges = gap_histogram(values, bins=bins)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.stairs(counts, edges, fill=True)
    ax.set_xlabel("minimum gap")
    ax.set_ylabel("instances")
    ax.set_title(f"minimum sweep gaps, n={len(values)}")
    png_path = _save(fig, out_dir / f"{stem}.png")
    return {"csv": csv_path, "png": png_path}


def history_report(
    out_dir: str | Path,
    histories: dict[str, History],
    stem: str = "history",
) -> dict[str, Path]:
    """Loss-per-epoch table for one or more labelled runs, with a log-scale figure."""
    out_dir = Path(out_dir)
    rows = []
    for label, history in histories.items():
        for epoch, tloss in enumerate(history.train_loss):
            vloss = history.val_loss[epoch] if epoch < len(history.val_loss) else ""
            rows.append((label, epoch, tloss, vloss))
    csv_path = write_csv(
        out_dir / f"{stem}.csv", ["model", "epoch", "train_loss", "val_loss"], rows
    )

    fig, ax = plt.subplots(figsize=(6, 4))
    for label, history in histories.items():
        epochs = np.arange(len(history.train_loss))
        ax.plot(epochs, history.train_loss, lw=1.2, label=f"{label} train")
        if history.val_loss:
            ax.plot(epochs[: len(history.val_loss)], history.val_loss, lw=1.2, ls="--",
                    label=f"{label} val")
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("mse (log targets)")
    ax.legend(fontsize=8)
    png_path = _save(fig, out_dir / f"{stem}.png")
    return {"csv": csv_path, "png": png_path}


def scatter_report(
    out_dir: str | Path,
    rows: list[tuple[int, float, float]],
    stem: str = "scatter",
) -> dict[str, Path]:
    """(size, true gap, predicted gap) points with an identity reference line."""
    out_dir = Path(out_dir)
    csv_path = write_csv(out_dir / f"{stem}.csv", ["size", "true_gap", "predicted_gap"], rows)

    fig, ax = plt.subplots(figsize=(5, 5))
    sizes = sorted({r[0] for r in rows})
    for size in sizes:
        pts = np.array([(r[1], r[2]) for r in rows if r[0] == size])
        ax.plot(pts[:, 0], pts[:, 1], ".", ms=3, alpha=0.5, label=f"M={size}")
    lims = ax.get_xlim()
    hi = max(lims[1], ax.get_ylim()[1])
    ax.plot([0, hi], [0, hi], "k-", lw=0.8)
    ax.set_xlabel("true gap")
    ax.set_ylabel("predicted gap")
    ax.legend(fontsize=8, markerscale=3)
    png_path = _save(fig, out_dir / f"{stem}.png")
    return {"csv": csv_path, "png": png_path}


def size_mse_report(
    out_dir: str | Path,
    per_size: dict[int, dict[str, float]],
    stem: str = "size_mse",
) -> dict[str, Path]:
    """Evaluation error per instance size (log-target and gap space)."""
    out_dir = Path(out_dir)
    rows = [
        (size, vals["n_samples"], vals["mse_log"], vals["mse_gap"])
        for size, vals in sorted(per_size.items())
    ]
    csv_path = write_csv(
        out_dir / f"{stem}.csv", ["size", "n_samples", "mse_log", "mse_gap"], rows
    )

    fig, ax = plt.subplots(figsize=(6, 4))
    sizes = [r[0] for r in rows]
    ax.plot(sizes, [r[3] for r in rows], "o-", label="gap space")
    ax.plot(sizes, [r[2] for r in rows], "s--", label="log targets")
    ax.set_yscale("log")
    ax.set_xlabel("instance size")
    ax.set_ylabel("mse")
    ax.legend(fontsize=8)
    png_path = _save(fig, out_dir / f"{stem}.png")
    return {"csv": csv_path, "png": png_path}


def gap_pool_report(
    out_dir: str | Path,
    gaps: np.ndarray,
    bins: int = 30,
    stem: str = "gap_histogram",
) -> dict[str, Path]:
    """Histogram of every g(lambda) value pooled across instances and times."""
    out_dir = Path(out_dir)
    values = np.asarray(gaps, dtype=float).reshape(-1)
    counts, edges = gap_histogram(values, bins=bins)
    rows = [
        (edges[k], edges[k + 1], int(counts[k])) for k in range(len(counts))
    ]
    csv_path = write_csv(out_dir / f"{stem}.csv", ["bin_left", "bin_right", "count"], rows)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.stairs(counts, edges, fill=True)
    ax.set_xlabel("gap")
    ax.set_ylabel("pooled sweep points")
    ax.set_title(f"{values.size} gap values")
    png_path = _save(fig, out_dir / f"{stem}.png")
    return {"csv": csv_path, "png": png_path}


def landscape_report(
    out_dir: str | Path,
    values_a: np.ndarray,
    values_b: np.ndarray,
    grid: np.ndarray,
    stem: str = "landscape",
) -> dict[str, Path]:
    """Minimum-gap surface over a grid of two coupling values."""
    out_dir = Path(out_dir)
    values_a = np.asarray(values_a, dtype=float)
    values_b = np.asarray(values_b, dtype=float)
    grid = np.asarray(grid, dtype=float)
    rows = [
        (values_a[i], values_b[j], grid[i, j])
        for i in range(values_a.size)
        for j in range(values_b.size)
    ]
    csv_path = write_csv(
        out_dir / f"{stem}.csv", ["coupling_a", "coupling_b", "min_gap"], rows
    )

    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    mesh = ax.pcolormesh(values_b, values_a, grid, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="minimum gap")
    ax.set_xlabel("coupling b")
    ax.set_ylabel("coupling a")
    png_path = _save(fig, out_dir / f"{stem}.png")
    return {"csv": csv_path, "png": png_path}


def overlay_report(
    out_dir: str | Path,
    lambdas: np.ndarray,
    true_gaps: np.ndarray,
    predicted_gaps: np.ndarray,
    stem: str = "overlay",
    max_plotted: int = 6,
) -> dict[str, Path]:
    """True and predicted sweeps side by side for a handful of instances."""
    out_dir = Path(out_dir)
    rows = []
    for k in range(len(true_gaps)):
        for j, lam in enumerate(lambdas):
            rows.append((k, lam, true_gaps[k, j], predicted_gaps[k, j]))
    csv_path = write_csv(
        out_dir / f"{stem}.csv", ["sample", "lambda", "true_gap", "predicted_gap"], rows
    )

    n = min(len(true_gaps), max_plotted)
    fig, axes = plt.subplots(1, max(n, 1), figsize=(2.4 * max(n, 1), 2.6), sharey=True)
    axes = np.atleast_1d(axes)
    for k in range(n):
        axes[k].plot(lambdas, true_gaps[k], lw=1.2, label="true")
        axes[k].plot(lambdas, predicted_gaps[k], lw=1.2, ls="--", label="predicted")
        axes[k].set_xlabel(r"$\lambda$")
    axes[0].set_ylabel("gap")
    axes[0].legend(fontsize=7)
    png_path = _save(fig, out_dir / f"{stem}.png")
    return {"csv": csv_path, "png": png_path}
