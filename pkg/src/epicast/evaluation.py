"""Four-method forecasting experiment matrix and strategy comparison.

Methods pair a training-data treatment with a loss function:

    A: raw data,      plain MSE
    B: raw data,      density-adaptive loss
    C: smoothed data, plain MSE
    D: smoothed data, density-adaptive loss

Each run normalizes every curve to [0, 1], optionally smooths it with the
per-curve optimized filter, cuts non-overlapping 50/10 windows, trains the
forecaster, and scores mean absolute error in cases/day against both the
raw and the smoothed ground truth of held-out regions. Test curves are
smoothed with their own optimized cutoffs; nothing leaks from training.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .dsp import ObjectiveParams, optimize_cutoff
from .epidata import EpiCurve, Sample, extract_samples, normalize
from .losses import DEFAULT_BINS, build_density
from .lstm import forward_batch
from .training import ADAPTIVE, STANDARD_MSE, TrainConfig, train

RAW = "raw"
SMOOTHED = "smoothed"
ALL_REGIONS = "all"


@dataclass(frozen=True)
class MethodSpec:
    id: str
    training_data: str  # raw | smoothed
    loss: str  # standard_mse | adaptive


METHODS = {
    "A": MethodSpec("A", RAW, STANDARD_MSE),
    "B": MethodSpec("B", RAW, ADAPTIVE),
    "C": MethodSpec("C", SMOOTHED, STANDARD_MSE),
    "D": MethodSpec("D", SMOOTHED, ADAPTIVE),
}


def method_specs(ids) -> list[MethodSpec]:
    try:
        return [METHODS[i] for i in ids]
    except KeyError as err:
        raise ValueError(f"unknown method {err.args[0]!r}; pick from A, B, C, D") from None


@dataclass(frozen=True)
class EvalCell:
    training_set: str
    method: str
    test_set: str  # region id, or "all" for the pooled score
    ground_truth: str  # raw | smoothed
    mae: float
    n_samples: int
    seed: int


@dataclass
class EvalReport:
    cells: list[EvalCell] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def cell(self, training_set: str, method: str, test_set: str,
             ground_truth: str) -> EvalCell:
        for cell in self.cells:
            if (cell.training_set, cell.method, cell.test_set, cell.ground_truth) == (
                training_set, method, test_set, ground_truth,
            ):
                return cell
        raise KeyError((training_set, method, test_set, ground_truth))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["training_set", "method", "test_set", "ground_truth",
                         "mae", "n_samples", "seed"])
        for cell in self.cells:
            writer.writerow([cell.training_set, cell.method, cell.test_set,
                             cell.ground_truth, repr(cell.mae), cell.n_samples,
                             cell.seed])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "metadata": self.metadata,
            "cells": [cell.__dict__ for cell in self.cells],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def mae(y_true, y_pred) -> float:
    """Mean absolute error between two equal-length vectors."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise ValueError("mae needs two equal-length non-empty vectors")
    return float(np.mean(np.abs(y_true - y_pred)))


@dataclass
class _PreparedCurve:
    """One curve's normalized raw and smoothed tracks plus denorm constants."""

    region_id: str
    raw_norm: np.ndarray
    smooth_norm: np.ndarray
    scale: float
    offset: float


def _prepare(curve: EpiCurve, params: ObjectiveParams) -> _PreparedCurve:
    norm = normalize(curve.new_cases, source=curve.region_id)
    try:
        smooth = optimize_cutoff(norm.values, params).smoothed
    except ValueError as err:
        raise ValueError(f"region {curve.region_id}: {err}") from None
    return _PreparedCurve(
        region_id=curve.region_id,
        raw_norm=norm.values,
        smooth_norm=smooth,
        scale=norm.scale,
        offset=norm.offset,
    )


def _training_samples(prepared: list[_PreparedCurve], data_kind: str) -> list[Sample]:
    pool = []
    for item in prepared:
        track = item.raw_norm if data_kind == RAW else item.smooth_norm
        pool.extend(extract_samples(track, region_id=item.region_id))
    return pool


def run_method_matrix(train_curves: list[EpiCurve], test_curves: list[EpiCurve],
                      methods: list[MethodSpec], train_config: TrainConfig,
                      objective_params: ObjectiveParams = ObjectiveParams(),
                      training_set: str = "generalized",
                      density_bins: int = DEFAULT_BINS,
                      allow_overlap: bool = False) -> EvalReport:
    """Train and score every requested method; returns the filled report.

    Emits one MAE cell per (method, test region, ground truth) plus pooled
    "all" cells, everything in denormalized cases/day. Training and test
    region sets must be disjoint unless ``allow_overlap`` marks a
    deliberate local-history run.
    """
    train_ids = {c.region_id for c in train_curves}
    test_ids = {c.region_id for c in test_curves}
    if not allow_overlap and train_ids & test_ids:
        raise ValueError(f"train/test regions overlap: {sorted(train_ids & test_ids)}")

    prepared_train = [_prepare(c, objective_params) for c in train_curves]
    prepared_test = [_prepare(c, objective_params) for c in test_curves]

    test_windows = []
    for item in prepared_test:
        raw_samples = extract_samples(item.raw_norm, region_id=item.region_id)
        smooth_samples = extract_samples(item.smooth_norm, region_id=item.region_id)
        span = item.scale - item.offset
        for raw_s, smooth_s in zip(raw_samples, smooth_samples):
            test_windows.append({
                "region": item.region_id,
                "input": {RAW: raw_s.input_window, SMOOTHED: smooth_s.input_window},
                "truth": {
                    RAW: raw_s.target_window * span + item.offset,
                    SMOOTHED: smooth_s.target_window * span + item.offset,
                },
                "span": span,
                "offset": item.offset,
            })
    if not test_windows:
        raise ValueError(f"test set {sorted(test_ids)} yields no evaluation samples")

    report = EvalReport(metadata={
        "training_set": training_set,
        "train_regions": sorted(train_ids),
        "test_regions": sorted(test_ids),
        "seed": train_config.seed,
        "train_config": train_config.__dict__.copy(),
        "objective_params": objective_params.__dict__.copy(),
        "density_bins": density_bins,
    })

    pools = {}
    for method in methods:
        if method.training_data not in pools:
            pool = _training_samples(prepared_train, method.training_data)
            if not pool:
                raise ValueError(
                    f"training set {sorted(train_ids)} yields no samples"
                    f" ({method.training_data} track)"
                )
            pools[method.training_data] = pool
        samples = pools[method.training_data]
        config = TrainConfig(**{**train_config.__dict__, "loss_kind": method.loss})
        density = None
        if method.loss == ADAPTIVE:
            targets = np.concatenate([s.target_window for s in samples])
            density = build_density(targets, bins=density_bins)
        model, _ = train(samples, config, density)

        inputs = np.stack([w["input"][method.training_data] for w in test_windows])
        outputs, _ = forward_batch(model, inputs)
        preds = [
            np.maximum(out * w["span"] + w["offset"], 0.0)
            for out, w in zip(outputs, test_windows)
        ]

        for truth_kind in (RAW, SMOOTHED):
            errors_by_region = {}
            for window, pred in zip(test_windows, preds):
                errs = np.abs(window["truth"][truth_kind] - pred)
                errors_by_region.setdefault(window["region"], []).append(errs)
            pooled = []
            for region in sorted(errors_by_region):
                errs = np.concatenate(errors_by_region[region])
                pooled.append(errs)
                report.cells.append(EvalCell(
                    training_set=training_set, method=method.id, test_set=region,
                    ground_truth=truth_kind, mae=float(np.mean(errs)),
                    n_samples=len(errors_by_region[region]), seed=train_config.seed,
                ))
            all_errs = np.concatenate(pooled)
            report.cells.append(EvalCell(
                training_set=training_set, method=method.id, test_set=ALL_REGIONS,
                ground_truth=truth_kind, mae=float(np.mean(all_errs)),
                n_samples=len(test_windows), seed=train_config.seed,
            ))
    return report


def merge_reports(*reports: EvalReport) -> EvalReport:
    merged = EvalReport(metadata={"merged": [r.metadata for r in reports]})
    for report in reports:
        merged.cells.extend(report.cells)
    return merged


def compare_training_strategies(report: EvalReport, method: str = "C",
                                ground_truth: str = RAW) -> dict:
    """Per-region local/generalized MAE ratios and their mean.

    Expects the report to contain, for each test region, a generalized row
    (training_set == "generalized") and a local row (training_set ==
    "local:<region>") with the same method and ground truth. A ratio above
    1 means the generalized model beat the region's own history.
    """
    generalized = {}
    local = {}
    for cell in report.cells:
        if cell.method != method or cell.ground_truth != ground_truth:
            continue
        if cell.test_set == ALL_REGIONS:
            continue
        if cell.training_set == "generalized":
            generalized[cell.test_set] = cell.mae
        elif cell.training_set == f"local:{cell.test_set}":
            local[cell.test_set] = cell.mae
    regions = sorted(set(generalized) & set(local))
    if not regions:
        raise ValueError("report lacks matched generalized and local rows")
    missing = sorted(set(generalized) ^ set(local))
    if missing:
        raise ValueError(f"unmatched strategy rows for regions: {missing}")
    per_region = {}
    ratios = []
    for region in regions:
        ratio = local[region] / generalized[region] if generalized[region] > 0 else float("inf")
        per_region[region] = {
            "local_mae": local[region],
            "generalized_mae": generalized[region],
            "ratio": ratio,
        }
        ratios.append(ratio)
    return {
        "method": method,
        "ground_truth": ground_truth,
        "per_region": per_region,
        "mean_ratio": float(np.mean(ratios)),
    }
