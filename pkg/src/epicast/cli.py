"""Command-line entry point for reproducible batch runs.

Configuration comes from a single JSON document; command-line flags
override file values, which override built-in defaults. Every artifact a
command writes embeds the effective seed, a hash of the effective
configuration, and the toolkit version, so re-running a command with the
same inputs reproduces byte-identical outputs. Batch commands process all
regions, collect per-region failures, and exit nonzero at the end instead
of aborting on the first bad region.
"""

from __future__ import annotations

import hashlib
import json
import sys
from datetime import date, timedelta
from pathlib import Path

import click
import numpy as np

from . import __version__
from .alerts import (AlertConfig, count_level_changes, count_spikes,
                     high_inertia_series, low_inertia_series)
from .dsp import ObjectiveParams, optimize_cutoff
from .epidata import (EpiCurve, curve_record, extract_samples,
                      incidence_per_million, ingest_cases_tolerant, normalize)
from .evaluation import (compare_training_strategies, merge_reports,
                         method_specs, run_method_matrix)
from .lstm import INPUT_LEN
from .losses import build_density
from .synth import SynthConfig, generate_suite, suite_to_csv
from .training import (ADAPTIVE, TrainConfig, load_model, predict, save_model, train)

DEFAULT_CONFIG = {
    "seed": 0,
    "objective": {"a": 1.25, "b": 1.0, "grid_size": 200, "psd_points": 8,
                  "psd_floor": 0.15},
    "alerts": {"thresholds": [10.0, 20.0, 40.0], "up_days": 7, "down_days": 14},
    "train": {"learning_rate": 1e-3, "beta1": 0.9, "beta2": 0.999,
              "adam_epsilon": 1e-8, "batch_size": 32, "epochs": 500,
              "loss_kind": "standard_mse", "hidden_size": 32},
    "synth": {"n_regions": 8, "days": 360, "start_date": "2020-06-01",
              "country": "SYN", "report_gap_choices": [1, 2, 3],
              "noise_scale": 0.15, "test_fraction": 0.25},
    "methods": ["A", "B", "C", "D"],
    "density_bins": 64,
    "training_data": "smoothed",
    "split_date": None,
}


def _merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def build_config(config_path: str | None, **overrides) -> dict:
    """Effective configuration with precedence flag > file > default."""
    config = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if config_path:
        with open(config_path, encoding="utf-8") as handle:
            config = _merge(config, json.load(handle))
    for dotted, value in overrides.items():
        if value is None:
            continue
        keys = dotted.split(".")
        target = config
        for key in keys[:-1]:
            target = target[key]
        target[keys[-1]] = value
    if config["objective"]["b"] <= 0:
        raise click.UsageError("objective b must be positive")
    ratio = config["objective"]["a"] / config["objective"]["b"]
    if not 1.0 <= ratio <= 1.5:
        raise click.UsageError(f"objective a/b = {ratio:.3f} outside [1.00, 1.50]")
    return config


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _stamp_line(config: dict) -> str:
    return f"# seed={config['seed']} config={config_hash(config)} version={__version__}"


def _meta(config: dict) -> dict:
    return {"seed": config["seed"], "config_hash": config_hash(config),
            "version": __version__}


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_json(path: Path, payload: dict, config: dict) -> None:
    payload = {"meta": _meta(config), **payload}
    _write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header: str, lines: list[str], config: dict) -> None:
    body = "\n".join([_stamp_line(config), header, *lines])
    _write_text(path, body + "\n")


def _load_curves(cases: str, metadata: str):
    with open(cases, "rb") as cases_handle, open(metadata, "rb") as meta_handle:
        return ingest_cases_tolerant(cases_handle, meta_handle)


def _objective_params(config: dict) -> ObjectiveParams:
    return ObjectiveParams(**config["objective"])


def _alert_config(config: dict) -> AlertConfig:
    section = config["alerts"]
    return AlertConfig(thresholds=tuple(section["thresholds"]),
                       up_days=section["up_days"], down_days=section["down_days"])


def _train_config(config: dict) -> TrainConfig:
    return TrainConfig(**config["train"], seed=config["seed"])


def _finish(errors: dict, out_dir: Path, config: dict, written: int,
            kind: str) -> None:
    if errors:
        listing = {region: str(err) for region, err in sorted(errors.items())}
        _write_json(out_dir / "errors.json", {"errors": listing}, config)
        for region, message in listing.items():
            click.echo(f"error: {region}: {message}", err=True)
        click.echo(f"{kind}: wrote {written} region(s), {len(errors)} failed", err=True)
        sys.exit(1)
    click.echo(f"{kind}: wrote {written} region(s)")


@click.group()
@click.version_option(version=__version__)
def main():
    """Epidemic curve smoothing, alert levels, and forecasting."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), required=True)
@click.option("--regions", type=int, default=None)
@click.option("--days", type=int, default=None)
def synth(config_path, seed, out, regions, days):
    """Write a seeded synthetic dataset (cases.csv and metadata.csv)."""
    config = build_config(config_path, **{
        "seed": seed, "synth.n_regions": regions, "synth.days": days,
    })
    section = dict(config["synth"])
    section["start_date"] = date.fromisoformat(section["start_date"])
    section["report_gap_choices"] = tuple(section["report_gap_choices"])
    suite = generate_suite(SynthConfig(**section, seed=config["seed"]))
    cases_text, metadata_text = suite_to_csv(suite)
    out_dir = Path(out)
    stamp = _stamp_line(config)
    _write_text(out_dir / "cases.csv", f"{stamp}\n{cases_text}")
    _write_text(out_dir / "metadata.csv", f"{stamp}\n{metadata_text}")
    click.echo(f"synth: wrote {len(suite)} region(s)")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--cases", type=click.Path(exists=True), required=True)
@click.option("--metadata", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
def ingest(config_path, seed, cases, metadata, out):
    """Validate the CSV pair and export curves.json in the same schema."""
    config = build_config(config_path, seed=seed)
    curves, errors = _load_curves(cases, metadata)
    out_dir = Path(out)
    _write_json(out_dir / "curves.json",
                {"curves": [curve_record(c) for c in curves]}, config)
    _finish(errors, out_dir, config, len(curves), "ingest")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--cases", type=click.Path(exists=True), required=True)
@click.option("--metadata", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--a", "a", type=float, default=None)
@click.option("--b", "b", type=float, default=None)
@click.option("--grid-size", type=int, default=None)
@click.option("--psd-points", type=int, default=None)
def smooth(config_path, seed, cases, metadata, out, a, b, grid_size, psd_points):
    """Smooth each region with its own optimized cutoff."""
    config = build_config(config_path, **{
        "seed": seed, "objective.a": a, "objective.b": b,
        "objective.grid_size": grid_size, "objective.psd_points": psd_points,
    })
    params = _objective_params(config)
    curves, errors = _load_curves(cases, metadata)
    out_dir = Path(out)
    written = 0
    for curve in curves:
        try:
            result = optimize_cutoff(curve.new_cases, params)
        except Exception as err:  # carry on with the other regions
            errors[curve.region_id] = err
            continue
        lines = [
            f"{day.isoformat()},{repr(float(raw))},{repr(float(sm))}"
            for day, raw, sm in zip(curve.dates, curve.new_cases, result.smoothed)
        ]
        _write_csv(out_dir / f"{curve.region_id}_smoothed.csv",
                   "date,raw,smoothed", lines, config)
        _write_json(out_dir / f"{curve.region_id}_smooth.json", {
            "region_id": curve.region_id,
            "cutoff": result.cutoff_chosen,
            "j_r": result.j_r,
            "j_psd": result.j_psd,
            "j_total": result.j_total,
            "a": params.a,
            "b": params.b,
        }, config)
        written += 1
    _finish(errors, out_dir, config, written, "smooth")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--cases", type=click.Path(exists=True), required=True)
@click.option("--metadata", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
def alerts(config_path, seed, cases, metadata, out):
    """Alert-level series and spike summaries from raw and smoothed incidence."""
    config = build_config(config_path, seed=seed)
    params = _objective_params(config)
    alert_config = _alert_config(config)
    curves, errors = _load_curves(cases, metadata)
    out_dir = Path(out)
    written = 0
    for curve in curves:
        try:
            smoothed_cases = optimize_cutoff(curve.new_cases, params).smoothed
            tracks = {
                "raw": incidence_per_million(curve),
                "smoothed": smoothed_cases * 1e6 / curve.population,
            }
            summary = {"region_id": curve.region_id}
            for kind, incidence in tracks.items():
                low = low_inertia_series(incidence, alert_config, curve.region_id)
                high = high_inertia_series(incidence, alert_config, curve.region_id)
                lines = [
                    f"{day.isoformat()},{repr(float(inc))},{lo},{hi}"
                    for day, inc, lo, hi in zip(curve.dates, incidence,
                                                low.levels, high.levels)
                ]
                _write_csv(out_dir / f"{curve.region_id}_alerts_{kind}.csv",
                           "date,incidence,low_inertia_level,high_inertia_level",
                           lines, config)
                summary[f"spikes_{kind}"] = count_spikes(low)
                summary[f"level_changes_{kind}"] = count_level_changes(high)
            _write_json(out_dir / f"{curve.region_id}_alerts.json", summary, config)
            written += 1
        except Exception as err:
            errors[curve.region_id] = err
    _finish(errors, out_dir, config, written, "alerts")


def _prepare_training(curves: list[EpiCurve], config: dict):
    params = _objective_params(config)
    samples = []
    for curve in curves:
        norm = normalize(curve.new_cases, source=curve.region_id)
        track = norm.values
        if config["training_data"] == "smoothed":
            track = optimize_cutoff(track, params).smoothed
        samples.extend(extract_samples(track, region_id=curve.region_id))
    return samples


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--cases", type=click.Path(exists=True), required=True)
@click.option("--metadata", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--epochs", type=int, default=None)
@click.option("--loss", type=click.Choice(["standard_mse", "adaptive"]), default=None)
@click.option("--data", "training_data", type=click.Choice(["raw", "smoothed"]),
              default=None)
@click.option("--hidden-size", type=int, default=None)
def train_cmd(config_path, seed, cases, metadata, out, epochs, loss,
              training_data, hidden_size):
    """Train the forecaster on the train-role regions."""
    config = build_config(config_path, **{
        "seed": seed, "train.epochs": epochs, "train.loss_kind": loss,
        "training_data": training_data, "train.hidden_size": hidden_size,
    })
    curves, errors = _load_curves(cases, metadata)
    if errors:
        _finish(errors, Path(out), config, 0, "train")
    train_curves = [c for c in curves if c.role == "train"]
    if not train_curves:
        raise click.ClickException("no train-role regions in the metadata")
    samples = _prepare_training(train_curves, config)
    if not samples:
        raise click.ClickException("training regions yield no 60-day samples")
    train_config = _train_config(config)
    density = None
    if train_config.loss_kind == ADAPTIVE:
        targets = np.concatenate([s.target_window for s in samples])
        density = build_density(targets, bins=config["density_bins"])
    model, trace = train(samples, train_config, density)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_model(model, out_dir / "model.json", extra={
        "meta": _meta(config),
        "loss_kind": train_config.loss_kind,
        "training_data": config["training_data"],
        "loss_trace": trace,
        "n_samples": len(samples),
    })
    click.echo(f"train: {len(samples)} samples, final loss {trace[-1]:.6g}")


main.add_command(train_cmd, name="train")


@main.command(name="predict")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--cases", type=click.Path(exists=True), required=True)
@click.option("--metadata", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
def predict_cmd(config_path, seed, model_path, cases, metadata, out):
    """Forecast 10 days past each region's last date."""
    config = build_config(config_path, seed=seed)
    params = _objective_params(config)
    model, doc = load_model(model_path)
    curves, errors = _load_curves(cases, metadata)
    out_dir = Path(out)
    lines = []
    written = 0
    for curve in curves:
        try:
            if len(curve) < INPUT_LEN:
                raise ValueError(f"need at least {INPUT_LEN} days, have {len(curve)}")
            norm = normalize(curve.new_cases, source=curve.region_id)
            track = norm.values
            if doc.get("training_data") == "smoothed":
                track = optimize_cutoff(track, params).smoothed
            forecast = predict(model, track[-INPUT_LEN:], norm.scale, norm.offset)
            for step, value in enumerate(forecast, start=1):
                day = curve.dates[-1] + timedelta(days=step)
                lines.append(f"{curve.region_id},{day.isoformat()},{repr(float(value))}")
            written += 1
        except Exception as err:
            errors[curve.region_id] = err
    _write_csv(out_dir / "predictions.csv", "region_id,date,predicted_cases",
               lines, config)
    _finish(errors, out_dir, config, written, "predict")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--cases", type=click.Path(exists=True), required=True)
@click.option("--metadata", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--methods", "methods_text", type=str, default=None,
              help="Comma-separated subset of A,B,C,D")
@click.option("--epochs", type=int, default=None)
@click.option("--strategy-compare/--no-strategy-compare", default=False,
              help="Also train per-region local models and compare strategies.")
@click.option("--split-date", type=str, default=None,
              help="Local models train strictly before this date (ISO).")
def evaluate(config_path, seed, cases, metadata, out, methods_text, epochs,
             strategy_compare, split_date):
    """Run the method matrix on train/test-role regions; write report.csv/json."""
    config = build_config(config_path, **{
        "seed": seed, "train.epochs": epochs,
        "methods": methods_text.split(",") if methods_text else None,
        "split_date": split_date,
    })
    curves, errors = _load_curves(cases, metadata)
    if errors:
        _finish(errors, Path(out), config, 0, "evaluate")
    train_curves = [c for c in curves if c.role == "train"]
    test_curves = [c for c in curves if c.role == "test"]
    if not train_curves or not test_curves:
        raise click.ClickException("need both train-role and test-role regions")
    try:
        methods = method_specs(config["methods"])
    except ValueError as err:
        raise click.ClickException(str(err)) from None
    params = _objective_params(config)
    train_config = _train_config(config)
    if strategy_compare:
        # Score the generalized and per-region local models on the same
        # post-split windows so their MAEs are directly comparable.
        if not config.get("split_date"):
            raise click.ClickException("--strategy-compare requires --split-date")
        split = date.fromisoformat(config["split_date"])
        histories = [_date_slice(c, before=split, role="train") for c in test_curves]
        futures = [_date_slice(c, before=None, split=split, role="test")
                   for c in test_curves]
        report = run_method_matrix(train_curves, futures, methods, train_config,
                                   objective_params=params,
                                   density_bins=config["density_bins"])
        locals_report = merge_reports(*[
            run_method_matrix([history], [future], methods, train_config,
                              objective_params=params,
                              training_set=f"local:{history.region_id}",
                              density_bins=config["density_bins"],
                              allow_overlap=True)
            for history, future in zip(histories, futures)
        ])
        report = merge_reports(report, locals_report)
        comparison = {
            spec.id: compare_training_strategies(report, method=spec.id)
            for spec in methods
        }
        _write_json(Path(out) / "strategy_comparison.json",
                    {"comparison": comparison}, config)
    else:
        report = run_method_matrix(train_curves, test_curves, methods, train_config,
                                   objective_params=params,
                                   density_bins=config["density_bins"])
    out_dir = Path(out)
    _write_text(out_dir / "report.csv", _stamp_line(config) + "\n" + report.to_csv())
    report.metadata["meta"] = _meta(config)
    _write_text(out_dir / "report.json", report.to_json())
    click.echo(f"evaluate: {len(report.cells)} cells")


def _date_slice(curve: EpiCurve, before: date | None = None,
                split: date | None = None, role: str = "train") -> EpiCurve:
    """Sub-curve strictly before ``before``, or from ``split`` onward."""
    boundary = before if before is not None else split
    n_before = sum(1 for d in curve.dates if d < boundary)
    sl = slice(None, n_before) if before is not None else slice(n_before, None)
    return EpiCurve(
        region_id=curve.region_id, country_code=curve.country_code,
        dates=curve.dates[sl], new_cases=curve.new_cases[sl],
        population=curve.population, name=curve.name, role=role,
    )


if __name__ == "__main__":
    main()
