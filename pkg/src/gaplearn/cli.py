"""Command line entry points.

Verbs cover the full workflow: ``generate`` datasets of solved sweeps,
``train`` surrogates on them, ``evaluate`` checkpoints, ``extrapolate``
across instance sizes, plus the ``speedup`` and ``estimate-runs`` cost
calculators and a ``diagnostics`` self-check.

Configs are JSON, resolved from an explicit path or a packaged preset
name.  Every report embeds the resolved config, its checksum, and the
package version, and never a timestamp, so reruns are comparable file by
file.
"""

from __future__ import annotations

import os
import sys
from importlib import resources
from pathlib import Path

import click
import numpy as np

from . import __version__, jsonio
from .budget import (
    as_fraction,
    estimate_runs,
    format_duration,
    runtime_seconds,
    speedup_analysis,
)
from .dataset import (
    GapDataset,
    PlacedEncoder,
    encode_flat,
    encode_sequence,
    encode_targets,
    generate_samples,
    load_dataset,
    save_dataset,
    split_indices,
    subset,
)
from .errors import GaplearnError, TrainingDivergedError
from .nn import (
    Adam,
    Network,
    conv1d_spec,
    conv2d_spec,
    evaluate_gap_mse,
    fcnn_spec,
    load_checkpoint,
    lstm_spec,
    predict,
    save_checkpoint,
    train as train_network,
)
from .report import (
    gap_pool_report,
    history_report,
    landscape_report,
    min_gap_report,
    overlay_report,
    scatter_report,
    size_mse_report,
    trajectory_report,
)
from .spectrum import GapTrajectory, SolverPolicy, instance_id, min_gap_scan
from .spinmodel import Family, parameter_count, sample_instance, schedule

DIVERGED_EXIT_CODE = 3

CONFIG_DEFAULTS = {
    "seed": 0,
    "precision": "f32",
    "dataset": {
        "family": "all_to_all",
        "sizes": [5],
        "n_samples": 1000,
        "n_steps": 50,
        "val_fraction": 0.1,
        "max_failure_fraction": 0.01,
        "solver": {"method": "auto", "dense_max_qubits": 8, "tol": 1e-10, "max_iter": 400},
    },
    "encoding": {"m_embed": 10, "grid": [6, 6], "placement_seed": 0},
    "training": {"epochs": 5, "batch_size": 64, "lr": 1e-3, "lr_decay": 1.0},
    "evaluation": {"sizes": [], "n_samples_per_size": 50, "eval_seed": 9000},
}


def _merge(defaults: dict, overrides: dict) -> dict:
    out = dict(defaults)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def available_presets() -> list[str]:
    names = []
    for entry in resources.files("gaplearn.presets").iterdir():
        if entry.name.endswith(".json"):
            names.append(entry.name[: -len(".json")])
    return sorted(names)


def resolve_config(
    config: str | None, seed: int | None = None, precision: str | None = None
) -> dict:
    """Load a config from a path or preset name and apply CLI overrides."""
    raw: dict = {}
    if config is not None:
        path = Path(config)
        if path.exists():
            raw = jsonio.read_json(path)
        else:
            preset = resources.files("gaplearn.presets").joinpath(f"{config}.json")
            if not preset.is_file():
                raise click.ClickException(
                    f"no config file or preset named {config!r} "
                    f"(presets: {', '.join(available_presets())})"
                )
            raw = jsonio.read_json(preset)
    cfg = _merge(CONFIG_DEFAULTS, raw)
    if "models" not in cfg:
        cfg["models"] = [raw["model"]] if "model" in raw else []
    if seed is not None:
        cfg["seed"] = seed
    if precision is not None:
        cfg["precision"] = precision
    return cfg


def config_checksum(cfg: dict) -> str:
    return jsonio.sha256_text(jsonio.dumps(cfg))


def apply_threads(threads: int | None) -> None:
    if threads is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(threads)
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(threads)
    except ImportError:
        pass


def _solver_policy(cfg: dict) -> SolverPolicy:
    solver = cfg["dataset"]["solver"]
    return SolverPolicy(
        method=solver.get("method", "auto"),
        dense_max_qubits=int(solver.get("dense_max_qubits", 8)),
        tol=float(solver.get("tol", 1e-10)),
        max_iter=int(solver.get("max_iter", 400)),
        seed=int(solver.get("seed", cfg["seed"])),
    )


def _as_trajectories(ds: GapDataset) -> list[GapTrajectory]:
    lambdas = ds.lambdas()
    placeholder = np.full((ds.n_steps, 2), np.nan)
    return [
        GapTrajectory(
            instance=s.instance,
            lambdas=lambdas,
            gaps=s.gaps,
            energies=placeholder,
            method=ds.solver.method,
            tol=ds.solver.tol,
        )
        for s in ds.samples
    ]


def _model_name(mcfg: dict, index: int) -> str:
    return str(mcfg.get("name", f"{mcfg['kind']}{index}"))


def _model_spec(mcfg: dict, family: Family, sizes: tuple[int, ...], n_steps: int):
    kind = mcfg["kind"]
    if kind in ("fcnn", "lstm"):
        if len(set(sizes)) != 1:
            raise click.ClickException(f"{kind} needs a single instance size, got {sizes}")
        width = parameter_count(family, sizes[0])
        if kind == "fcnn":
            return fcnn_spec(width, n_steps, tuple(mcfg.get("hidden", (500,) * 5)))
        return lstm_spec(width, tuple(mcfg.get("units", (128, 128))))
    if kind == "conv1d":
        return conv1d_spec(
            filters=tuple(mcfg.get("filters", (20, 40, 60, 40, 20))),
            kernel_size=int(mcfg.get("kernel_size", 3)),
            head=int(mcfg.get("head", 100)),
        )
    if kind == "conv2d":
        return conv2d_spec(
            filters=tuple(mcfg.get("filters", (20, 40, 60, 40, 20))),
            kernel_size=tuple(mcfg.get("kernel_size", (2, 2))),
            head=int(mcfg.get("head", 100)),
        )
    raise click.ClickException(f"unknown model kind {kind!r}")


def _model_data(ds_part: GapDataset, mcfg: dict, encoding: dict):
    """(train_or_eval data, is_provider) for one model kind on one dataset slice."""
    kind = mcfg["kind"]
    instances = [s.instance for s in ds_part.samples]
    gaps = ds_part.gaps_matrix()
    if kind == "fcnn":
        return (encode_flat(instances), encode_targets(gaps, sequence=False))
    if kind == "lstm":
        return (encode_sequence(instances, ds_part.n_steps), encode_targets(gaps, sequence=True))
    if kind in ("conv1d", "conv2d"):
        return PlacedEncoder(
            samples=ds_part.samples,
            n_steps=ds_part.n_steps,
            kind="line" if kind == "conv1d" else "canvas",
            m_embed=int(encoding.get("m_embed", 10)),
            grid_shape=tuple(encoding.get("grid", (6, 6))),
            placement_seed=int(encoding.get("placement_seed", 0)),
        )
    raise click.ClickException(f"unknown model kind {kind!r}")


def _eval_arrays(data):
    if isinstance(data, PlacedEncoder):
        return data.eval_arrays()
    return data


def _write_report(out_dir: Path, name: str, payload: dict) -> Path:
    path = out_dir / f"{name}.report.json"
    jsonio.write_json(path, payload)
    return path


def _report_header(kind: str, cfg: dict) -> dict:
    return {
        "kind": kind,
        "code_version": __version__,
        "config_sha256": config_checksum(cfg),
        "config": cfg,
    }


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Spectral-gap sweeps of spin instances and neural surrogates for them."""


_config_opt = click.option("--config", "-c", default=None, help="Config path or preset name.")
_out_opt = click.option(
    "--out",
    "-o",
    required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Output directory.",
)
_seed_opt = click.option("--seed", type=int, default=None, help="Override the config seed.")
_precision_opt = click.option(
    "--precision", type=click.Choice(["f32", "f64"]), default=None, help="Training dtype."
)
_threads_opt = click.option("--threads", type=int, default=None, help="BLAS thread cap.")


@main.command()
@_config_opt
@_out_opt
@_seed_opt
@_threads_opt
def generate(config, out, seed, threads):
    """Sample instances, solve their sweeps, and write the dataset files."""
    apply_threads(threads)
    cfg = resolve_config(config, seed=seed)
    out.mkdir(parents=True, exist_ok=True)
    dcfg = cfg["dataset"]
    try:
        ds = generate_samples(
            family=dcfg["family"],
            sizes=dcfg["sizes"],
            n_samples=int(dcfg["n_samples"]),
            root_seed=int(cfg["seed"]),
            n_steps=int(dcfg["n_steps"]),
            policy=_solver_policy(cfg),
            max_failure_fraction=float(dcfg["max_failure_fraction"]),
            meta={"m_embed": cfg["encoding"]["m_embed"], "grid": cfg["encoding"]["grid"]},
        )
    except GaplearnError as err:
        raise click.ClickException(str(err))
    manifest = save_dataset(out / "dataset.jsonl", ds)
    trajs = _as_trajectories(ds)
    paths = {}
    paths.update({f"min_gaps_{k}": str(v) for k, v in min_gap_report(out, trajs).items()})
    paths.update({f"trajectories_{k}": str(v) for k, v in trajectory_report(out, trajs).items()})
    report = _report_header("generate-report", cfg)
    report.update(
        {
            "n_samples": len(ds),
            "n_failures": len(ds.failures),
            "dataset_sha256": manifest["sha256"],
            "outputs": paths,
        }
    )
    _write_report(out, "generate", report)
    click.echo(f"wrote {len(ds)} samples to {out / 'dataset.jsonl'}")
    if ds.failures:
        click.echo(f"skipped {len(ds.failures)} non-converged sweeps")


def _train_models(cfg: dict, ds: GapDataset, out: Path) -> tuple[dict, dict, dict]:
    """Shared by train and extrapolate: returns (histories, metrics, artifacts)."""
    if not cfg["models"]:
        raise click.ClickException("config lists no models")
    tr_idx, va_idx = split_indices(
        len(ds), float(cfg["dataset"]["val_fraction"]), seed=int(cfg["seed"])
    )
    ds_tr, ds_va = subset(ds, tr_idx), subset(ds, va_idx)
    if len(ds_va) == 0 or len(ds_tr) == 0:
        raise click.ClickException("split produced an empty train or validation set")

    histories, metrics, artifacts = {}, {}, {}
    for index, mcfg in enumerate(cfg["models"]):
        name = _model_name(mcfg, index)
        spec = _model_spec(mcfg, ds.family, ds.sizes, ds.n_steps)
        net = Network(spec, seed=(int(cfg["seed"]), index), dtype=cfg["precision"])
        optimizer = Adam(net.parameters(), lr=float(cfg["training"]["lr"]))
        train_data = _model_data(ds_tr, mcfg, cfg["encoding"])
        val_data = _model_data(ds_va, mcfg, cfg["encoding"])
        ckpt_path = out / f"{name}.ckpt.npz"
        extra = {
            "model_name": name,
            "model_kind": mcfg["kind"],
            "encoding": cfg["encoding"],
            "family": ds.family.value,
            "n_steps": ds.n_steps,
        }

        def on_epoch(epoch, history, _net=net, _opt=optimizer, _path=ckpt_path, _extra=extra):
            save_checkpoint(
                _path, _net, _opt, history=history, next_epoch=epoch + 1, extra=_extra
            )

        click.echo(f"training {name} ({net.n_parameters()} parameters)")
        try:
            history = train_network(
                net,
                train_data,
                val_data,
                epochs=int(cfg["training"]["epochs"]),
                batch_size=int(cfg["training"]["batch_size"]),
                optimizer=optimizer,
                lr_decay=float(cfg["training"]["lr_decay"]),
                seed=int(cfg["seed"]),
                on_epoch=on_epoch,
            )
        except TrainingDivergedError as err:
            click.echo(f"error: {err}", err=True)
            if ckpt_path.exists():
                click.echo(f"last good checkpoint kept at {ckpt_path}", err=True)
            sys.exit(DIVERGED_EXIT_CODE)
        xv, yv = _eval_arrays(val_data)
        metrics[name] = evaluate_gap_mse(net, xv, yv)
        histories[name] = history
        artifacts[name] = {"checkpoint": str(ckpt_path), "network": net}
        click.echo(
            f"  final train {history.train_loss[-1]:.6f}  "
            f"val {history.val_loss[-1]:.6f}  gap-space {metrics[name]['mse_gap']:.6f}"
        )
    return histories, metrics, artifacts


@main.command()
@_config_opt
@click.option(
    "--data",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Dataset written by generate.",
)
@_out_opt
@_seed_opt
@_precision_opt
@_threads_opt
def train(config, data, out, seed, precision, threads):
    """Train the configured models on a generated dataset."""
    apply_threads(threads)
    cfg = resolve_config(config, seed=seed, precision=precision)
    out.mkdir(parents=True, exist_ok=True)
    ds = load_dataset(data)
    if len(ds) < 2:
        raise click.ClickException(f"dataset at {data} has {len(ds)} samples; need at least 2")
    histories, metrics, artifacts = _train_models(cfg, ds, out)
    paths = history_report(out, histories)
    report = _report_header("train-report", cfg)
    report.update(
        {
            "dataset": str(data),
            "n_samples": len(ds),
            "solver_tol": ds.solver.tol,
            "models": {
                name: {
                    "checkpoint": art["checkpoint"],
                    "final_train_loss": histories[name].train_loss[-1],
                    "final_val_loss": histories[name].val_loss[-1],
                    "val_mse_gap": metrics[name]["mse_gap"],
                }
                for name, art in artifacts.items()
            },
            "outputs": {k: str(v) for k, v in paths.items()},
        }
    )
    _write_report(out, "train", report)


def _predicted_gap_matrix(net: Network, x: np.ndarray, kind: str, n_steps: int) -> np.ndarray:
    pred_log = predict(net, x)
    if kind != "fcnn":
        pred_log = pred_log[..., 0]
    return np.maximum(np.expm1(pred_log), 0.0).reshape(-1, n_steps)


@main.command()
@click.option(
    "--checkpoint",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@click.option(
    "--data",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@_out_opt
@_threads_opt
def evaluate(checkpoint, data, out, threads):
    """Evaluate a checkpoint against a dataset and render comparisons."""
    apply_threads(threads)
    out.mkdir(parents=True, exist_ok=True)
    net, _, manifest = load_checkpoint(checkpoint)
    extra = manifest["extra"]
    kind = extra["model_kind"]
    ds = load_dataset(data)
    if len(ds) == 0:
        raise click.ClickException(f"dataset at {data} is empty")
    if ds.n_steps != extra["n_steps"]:
        raise click.ClickException(
            f"dataset has {ds.n_steps} sweep points, checkpoint expects {extra['n_steps']}"
        )
    mcfg = {"kind": kind}
    x, y = _eval_arrays(_model_data(ds, mcfg, extra["encoding"]))
    metrics = evaluate_gap_mse(net, x, y)
    pred_gaps = _predicted_gap_matrix(net, x, kind, ds.n_steps)
    true_gaps = ds.gaps_matrix()
    paths = overlay_report(out, ds.lambdas(), true_gaps, pred_gaps)
    report = _report_header("evaluate-report", {"seed": manifest["seed"]})
    report.update(
        {
            "checkpoint": str(checkpoint),
            "dataset": str(data),
            "n_samples": len(ds),
            "mse_log": metrics["mse_log"],
            "mse_gap": metrics["mse_gap"],
            "outputs": {k: str(v) for k, v in paths.items()},
        }
    )
    _write_report(out, "evaluate", report)
    click.echo(f"mse_log {metrics['mse_log']:.6f}  mse_gap {metrics['mse_gap']:.6f}")


@main.command()
@_config_opt
@click.option(
    "--data",
    default=None,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Reuse an existing training dataset instead of generating one.",
)
@_out_opt
@_seed_opt
@_precision_opt
@_threads_opt
def extrapolate(config, data, out, seed, precision, threads):
    """Train on small instances, evaluate on larger ones, report error by size."""
    apply_threads(threads)
    cfg = resolve_config(config, seed=seed, precision=precision)
    out.mkdir(parents=True, exist_ok=True)
    dcfg = cfg["dataset"]
    policy = _solver_policy(cfg)

    if data is not None:
        ds = load_dataset(data)
    else:
        click.echo(f"generating {dcfg['n_samples']} training sweeps")
        ds = generate_samples(
            family=dcfg["family"],
            sizes=dcfg["sizes"],
            n_samples=int(dcfg["n_samples"]),
            root_seed=int(cfg["seed"]),
            n_steps=int(dcfg["n_steps"]),
            policy=policy,
            max_failure_fraction=float(dcfg["max_failure_fraction"]),
        )
        save_dataset(out / "dataset.jsonl", ds)

    if len(cfg["models"]) != 1 or cfg["models"][0]["kind"] not in ("conv1d", "conv2d"):
        raise click.ClickException("extrapolation needs exactly one conv1d or conv2d model")
    histories, metrics, artifacts = _train_models(cfg, ds, out)
    (name, art), = artifacts.items()
    net = art["network"]
    mcfg = cfg["models"][0]
    history_report(out, histories)

    ecfg = cfg["evaluation"]
    if not ecfg["sizes"]:
        raise click.ClickException("evaluation.sizes is empty")
    per_size = {}
    scatter_rows = []
    for size in ecfg["sizes"]:
        click.echo(f"evaluating size {size}")
        eval_ds = generate_samples(
            family=dcfg["family"],
            sizes=[int(size)],
            n_samples=int(ecfg["n_samples_per_size"]),
            root_seed=int(ecfg["eval_seed"]) + int(size),
            n_steps=ds.n_steps,
            policy=policy,
        )
        x, y = _eval_arrays(_model_data(eval_ds, mcfg, cfg["encoding"]))
        stats = evaluate_gap_mse(net, x, y)
        stats["n_samples"] = len(eval_ds)
        per_size[int(size)] = stats
        pred = _predicted_gap_matrix(net, x, mcfg["kind"], ds.n_steps)
        true = eval_ds.gaps_matrix()
        for row_true, row_pred in zip(true, pred):
            for t, p in zip(row_true, row_pred):
                scatter_rows.append((int(size), float(t), float(p)))

    paths = {}
    paths.update(scatter_report(out, scatter_rows))
    paths.update(size_mse_report(out, per_size))
    report = _report_header("extrapolate-report", cfg)
    report.update(
        {
            "train_sizes": list(ds.sizes),
            "model": name,
            "checkpoint": art["checkpoint"],
            "per_size": {str(k): v for k, v in sorted(per_size.items())},
            "outputs": {k: str(v) for k, v in paths.items()},
        }
    )
    _write_report(out, "extrapolate", report)
    for size, stats in sorted(per_size.items()):
        click.echo(f"  size {size}: mse_gap {stats['mse_gap']:.6f}")


@main.command()
@click.option("--n-train", type=int, required=True, help="Training set size.")
@click.option("--tau-solve", required=True, help="Seconds per direct solve.")
@click.option("--tau-train", required=True, help="Training seconds per training sample.")
@click.option("--tau-infer", required=True, help="Seconds per surrogate query.")
@click.option("--tau-generate", default=None, help="Seconds per training sweep (default: tau-solve).")
@click.option("--out", "-o", default=None, type=click.Path(file_okay=False, path_type=Path))
def speedup(n_train, tau_solve, tau_train, tau_infer, tau_generate, out):
    """Break-even query count for a surrogate versus direct solving."""
    try:
        analysis = speedup_analysis(n_train, tau_solve, tau_train, tau_infer, tau_generate)
    except GaplearnError as err:
        raise click.ClickException(str(err))
    click.echo(f"fixed cost: {format_duration(analysis.fixed_cost)}")
    if analysis.threshold is None:
        click.echo("inference is not faster than solving: no break-even point")
    else:
        click.echo(
            f"break-even at {float(analysis.threshold):.6f} queries "
            f"(exact {analysis.threshold})"
        )
        click.echo(f"minimal winning query count: {analysis.min_use_count}")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        jsonio.write_json(out / "speedup.report.json", analysis.to_json())


@main.command("estimate-runs")
@click.option("--instances", type=int, required=True, help="Distinct instances.")
@click.option("--steps", type=int, required=True, help="Sweep points per instance.")
@click.option("--repetitions", type=int, required=True, help="Runs per sweep point.")
@click.option("--seconds-per-run", multiple=True, help="Optional per-run cost(s) to price.")
def estimate_runs_cmd(instances, steps, repetitions, seconds_per_run):
    """Total experiment count for a direct measurement campaign."""
    try:
        total = estimate_runs(instances, steps, repetitions)
    except GaplearnError as err:
        raise click.ClickException(str(err))
    click.echo(f"total runs: {total}")
    for spr in seconds_per_run:
        secs = runtime_seconds(total, as_fraction(spr))
        click.echo(f"at {spr} s/run: {format_duration(secs)}")


def _run_self_checks(out: Path | None) -> None:
    from .diagnostics import run_diagnostics

    results = run_diagnostics()
    failed = [r for r in results if not r["passed"]]
    for res in results:
        mark = "✓" if res["passed"] else "✗"
        click.echo(f"{mark} {res['name']}: {res['detail']}")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        payload = {
            "kind": "diagnostics-report",
            "code_version": __version__,
            "n_checks": len(results),
            "n_failed": len(failed),
            "results": results,
        }
        jsonio.write_json(out / "diagnostics.report.json", payload)
    if failed:
        raise click.ClickException(f"{len(failed)} of {len(results)} checks failed")
    click.echo(f"all {len(results)} checks passed")


@main.command()
@_config_opt
@click.option(
    "--data",
    default=None,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Dataset to pool into a full-sweep gap histogram.",
)
@click.option("--bins", type=int, default=30, help="Histogram bin count.")
@click.option(
    "--landscape",
    default=None,
    help="Two coupling indices 'A,B' to scan on a config-sampled instance.",
)
@click.option("--grid-points", type=int, default=9, help="Points per landscape axis.")
@click.option(
    "--grid-range", nargs=2, type=float, default=(-1.0, 1.0), help="Landscape value range."
)
@click.option("--out", "-o", default=None, type=click.Path(file_okay=False, path_type=Path))
@_threads_opt
def diagnostics(config, data, bins, landscape, grid_points, grid_range, out, threads):
    """Gap statistics from data, or internal self-checks when given no inputs.

    With --data, pools every g(lambda) value of the dataset into a
    histogram.  With --landscape A,B, samples one instance from the
    config and scans couplings A and B over a square grid, reporting the
    minimum sweep gap per grid point.  With neither, runs the fast
    consistency checks and exits nonzero if any fail.
    """
    apply_threads(threads)
    if data is None and landscape is None:
        _run_self_checks(out)
        return
    if out is None:
        raise click.ClickException("--out is required with --data or --landscape")
    out.mkdir(parents=True, exist_ok=True)
    cfg = resolve_config(config)
    report = _report_header("diagnostics-report", cfg)
    outputs = {}

    if data is not None:
        ds = load_dataset(data)
        if len(ds) == 0:
            raise click.ClickException(f"dataset at {data} is empty")
        gaps = ds.gaps_matrix()
        paths = gap_pool_report(out, gaps, bins=bins)
        outputs.update({f"gap_histogram_{k}": str(v) for k, v in paths.items()})
        report["histogram"] = {
            "dataset": str(data),
            "n_values": int(gaps.size),
            "bins": bins,
        }
        click.echo(f"pooled {gaps.size} gap values from {len(ds)} sweeps")

    if landscape is not None:
        try:
            idx_a, idx_b = (int(part) for part in landscape.split(","))
        except ValueError:
            raise click.ClickException(f"--landscape wants 'A,B' indices, got {landscape!r}")
        dcfg = cfg["dataset"]
        values = np.linspace(grid_range[0], grid_range[1], grid_points)
        try:
            inst = sample_instance(dcfg["family"], int(dcfg["sizes"][0]), (int(cfg["seed"]), 0))
            grid = min_gap_scan(
                inst, (idx_a, idx_b), values, values,
                schedule(int(dcfg["n_steps"])), _solver_policy(cfg),
            )
        except GaplearnError as err:
            raise click.ClickException(str(err))
        paths = landscape_report(out, values, values, grid)
        outputs.update({f"landscape_{k}": str(v) for k, v in paths.items()})
        report["landscape"] = {
            "instance_id": instance_id(inst),
            "couplings": [idx_a, idx_b],
            "grid_points": grid_points,
            "grid_range": list(grid_range),
            "min_over_grid": float(grid.min()),
        }
        click.echo(
            f"scanned couplings ({idx_a}, {idx_b}) over {grid_points}x{grid_points} "
            f"values; smallest minimum gap {grid.min():.6f}"
        )

    report["outputs"] = outputs
    _write_report(out, "diagnostics", report)


if __name__ == "__main__":
    main()
