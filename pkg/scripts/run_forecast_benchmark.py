#!/usr/bin/env python3
"""Forecast benchmark: the four-method matrix plus the strategy comparison.

Runs the shipped benchmark pair (zero-heavy training histories with
periodic reporting backlogs; daily-reporting test regions in active wave
periods), trains methods A-D, and scores MAE against raw and smoothed
ground truths. Then compares the generalized models against per-region
local models trained on each test region's own earlier history, scoring
both on the same later windows. Writes report.csv / report.json /
strategy_comparison.json.
"""

import argparse
import json
from pathlib import Path

from epicast.epidata import EpiCurve
from epicast.evaluation import (ALL_REGIONS, compare_training_strategies,
                                merge_reports, method_specs, run_method_matrix)
from epicast.synth import BENCHMARK_TRAIN_SETTINGS, benchmark_suites
from epicast.training import TrainConfig


def split_curve(curve: EpiCurve, days_before: int):
    history = EpiCurve(region_id=curve.region_id, country_code=curve.country_code,
                       dates=curve.dates[:days_before],
                       new_cases=curve.new_cases[:days_before],
                       population=curve.population, name=curve.name, role="train")
    future = EpiCurve(region_id=curve.region_id, country_code=curve.country_code,
                      dates=curve.dates[days_before:],
                      new_cases=curve.new_cases[days_before:],
                      population=curve.population, name=curve.name, role="test")
    return history, future


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--train-seed", type=int, default=3,
                        help="seed of the training-region generator")
    parser.add_argument("--test-seed", type=int, default=9,
                        help="seed of the test-region generator")
    parser.add_argument("--epochs", type=int,
                        default=BENCHMARK_TRAIN_SETTINGS["epochs"])
    parser.add_argument("--hidden-size", type=int,
                        default=BENCHMARK_TRAIN_SETTINGS["hidden_size"])
    parser.add_argument("--model-seed", type=int,
                        default=BENCHMARK_TRAIN_SETTINGS["seed"])
    parser.add_argument("--methods", type=str, default="A,B,C,D")
    parser.add_argument("--split-day", type=int, default=120,
                        help="test-history days given to the local models")
    parser.add_argument("--skip-strategy", action="store_true")
    parser.add_argument("--out", type=Path, default=Path("forecast_benchmark"))
    args = parser.parse_args()

    methods = method_specs(args.methods.split(","))
    train_config = TrainConfig(
        epochs=args.epochs, hidden_size=args.hidden_size,
        batch_size=BENCHMARK_TRAIN_SETTINGS["batch_size"],
        learning_rate=BENCHMARK_TRAIN_SETTINGS["learning_rate"],
        seed=args.model_seed,
    )
    train_suite, test_suite = benchmark_suites(args.train_seed, args.test_seed)

    report = run_method_matrix(train_suite, test_suite, methods, train_config)
    print(f"{'method':<8}{'raw MAE':>10}{'smoothed MAE':>14}")
    for spec in methods:
        raw = report.cell("generalized", spec.id, ALL_REGIONS, "raw").mae
        smooth = report.cell("generalized", spec.id, ALL_REGIONS, "smoothed").mae
        print(f"{spec.id:<8}{raw:>10.2f}{smooth:>14.2f}")
    by_id = {spec.id for spec in methods}
    if {"A", "B"} <= by_id:
        ratio = (report.cell("generalized", "B", ALL_REGIONS, "raw").mae
                 / report.cell("generalized", "A", ALL_REGIONS, "raw").mae)
        print(f"adaptive-vs-plain on raw data (B/A, raw truth): {ratio:.3f}")
    if {"C", "D"} <= by_id:
        ratio = (report.cell("generalized", "D", ALL_REGIONS, "smoothed").mae
                 / report.cell("generalized", "C", ALL_REGIONS, "smoothed").mae)
        print(f"adaptive-vs-plain on smoothed data (D/C, smoothed truth): {ratio:.3f}")

    comparison = {}
    if not args.skip_strategy:
        histories, futures = zip(*(split_curve(c, args.split_day)
                                   for c in test_suite))
        generalized_on_future = run_method_matrix(
            train_suite, list(futures), methods, train_config)
        local_reports = [
            run_method_matrix([hist], [fut], methods, train_config,
                              training_set=f"local:{hist.region_id}",
                              allow_overlap=True)
            for hist, fut in zip(histories, futures)
        ]
        report = merge_reports(report, generalized_on_future, *local_reports)
        comparison = {
            spec.id: compare_training_strategies(report, method=spec.id)
            for spec in methods
        }
        for method_id, summary in comparison.items():
            print(f"method {method_id}: mean local/generalized MAE ratio "
                  f"{summary['mean_ratio']:.3f}")

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.csv").write_text(report.to_csv())
    (args.out / "report.json").write_text(report.to_json())
    if comparison:
        (args.out / "strategy_comparison.json").write_text(
            json.dumps(comparison, indent=2, sort_keys=True) + "\n")
    print(f"reports written to {args.out}/")


if __name__ == "__main__":
    main()
