import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epicast.evaluation import (ALL_REGIONS, EvalCell, EvalReport, METHODS,
                                compare_training_strategies, mae, merge_reports,
                                method_specs, run_method_matrix)
from epicast.synth import SynthConfig, generate_suite
from epicast.training import TrainConfig

FAST_TRAIN = TrainConfig(epochs=8, hidden_size=8, batch_size=16,
                         learning_rate=5e-3, seed=7)


def small_suite(n_regions=8, days=130, seed=1, gaps=(1, 2, 3)):
    suite = generate_suite(SynthConfig(n_regions=n_regions, days=days, seed=seed,
                                       report_gap_choices=gaps))
    train_curves = [c for c in suite if c.role == "train"]
    test_curves = [c for c in suite if c.role == "test"]
    return train_curves, test_curves


class TestMae:
    def test_identical(self):
        assert mae([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_arithmetic(self):
        assert mae([1.0, 3.0], [2.0, 5.0]) == 1.5

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mae([1.0], [1.0, 2.0])

    def test_sign_symmetric(self):
        assert mae([0.0, 0.0], [3.0, -3.0]) == mae([0.0, 0.0], [-3.0, 3.0])

    @settings(max_examples=100)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=20),
           st.floats(-1e6, 1e6))
    def test_translation_invariant(self, values, shift):
        y = np.array(values)
        noise = np.linspace(-1.0, 1.0, len(values))
        base = mae(y, y + noise)
        shifted = mae(y + shift, y + noise + shift)
        assert shifted == pytest.approx(base, rel=1e-9, abs=1e-9)


class TestMethodSpecs:
    def test_table(self):
        assert (METHODS["A"].training_data, METHODS["A"].loss) == ("raw", "standard_mse")
        assert (METHODS["B"].training_data, METHODS["B"].loss) == ("raw", "adaptive")
        assert (METHODS["C"].training_data, METHODS["C"].loss) == ("smoothed", "standard_mse")
        assert (METHODS["D"].training_data, METHODS["D"].loss) == ("smoothed", "adaptive")

    def test_unknown_rejected(self):
        with pytest.raises(ValueError):
            method_specs(["E"])


@pytest.fixture(scope="module")
def report():
    # periodic reporting on every region keeps the raw truth noisy
    train_curves, test_curves = small_suite(days=250, gaps=(2, 3))
    config = TrainConfig(epochs=30, hidden_size=8, batch_size=16,
                         learning_rate=5e-3, seed=7)
    return run_method_matrix(train_curves, test_curves,
                             method_specs(["C", "D"]), config)


class TestRunMethodMatrix:

    def test_per_region_cells_present_and_finite(self, report):
        regions = {c.test_set for c in report.cells} - {ALL_REGIONS}
        assert len(regions) == 2
        per_region = [c for c in report.cells if c.test_set != ALL_REGIONS]
        assert len(per_region) == 8  # 2 methods x 2 truths x 2 regions
        assert all(np.isfinite(c.mae) and c.mae >= 0 for c in per_region)

    def test_pooled_cells_present(self, report):
        pooled = [c for c in report.cells if c.test_set == ALL_REGIONS]
        assert len(pooled) == 4  # 2 methods x 2 truths

    def test_smoothed_truth_error_not_above_raw(self, report):
        # noise in the raw truth dominates the error of a smooth-trained model
        for method in ("C", "D"):
            raw_cell = report.cell("generalized", method, ALL_REGIONS, "raw")
            smooth_cell = report.cell("generalized", method, ALL_REGIONS, "smoothed")
            assert smooth_cell.mae <= raw_cell.mae

    def test_deterministic(self):
        train_curves, test_curves = small_suite(seed=5)
        methods = method_specs(["A"])
        first = run_method_matrix(train_curves, test_curves, methods, FAST_TRAIN)
        second = run_method_matrix(train_curves, test_curves, methods, FAST_TRAIN)
        assert first.to_csv() == second.to_csv()
        assert first.to_json() == second.to_json()

    def test_overlap_rejected(self):
        train_curves, test_curves = small_suite(seed=2)
        with pytest.raises(ValueError, match="overlap"):
            run_method_matrix(train_curves + test_curves, test_curves,
                              method_specs(["A"]), FAST_TRAIN)

    def test_empty_test_samples_named(self):
        train_curves, test_curves = small_suite(seed=3)
        short = [_truncate(c, 40) for c in test_curves]  # below one sample
        with pytest.raises(ValueError, match="test set"):
            run_method_matrix(train_curves, short, method_specs(["A"]), FAST_TRAIN)

    def test_csv_schema(self, report):
        lines = report.to_csv().splitlines()
        assert lines[0] == "training_set,method,test_set,ground_truth,mae,n_samples,seed"
        assert len(lines) == 1 + len(report.cells)


def _truncate(curve, days):
    from epicast.epidata import EpiCurve
    return EpiCurve(region_id=curve.region_id, country_code=curve.country_code,
                    dates=curve.dates[:days], new_cases=curve.new_cases[:days],
                    population=curve.population, name=curve.name, role=curve.role)


class TestCompareStrategies:
    def _cell(self, training_set, region, mae_value, method="C", truth="raw"):
        return EvalCell(training_set=training_set, method=method, test_set=region,
                        ground_truth=truth, mae=mae_value, n_samples=4, seed=0)

    def test_reference_ratio(self):
        report = EvalReport(cells=[
            self._cell("generalized", "R1", 10.37),
            self._cell("local:R1", "R1", 14.68),
        ])
        summary = compare_training_strategies(report)
        assert summary["per_region"]["R1"]["ratio"] == pytest.approx(14.68 / 10.37)
        assert summary["per_region"]["R1"]["ratio"] == pytest.approx(1.416, abs=5e-4)

    def test_equal_maes_ratio_one(self):
        report = EvalReport(cells=[
            self._cell("generalized", "R1", 5.0),
            self._cell("local:R1", "R1", 5.0),
        ])
        assert compare_training_strategies(report)["mean_ratio"] == 1.0

    def test_generalized_worse_still_reported(self):
        report = EvalReport(cells=[
            self._cell("generalized", "R1", 8.0),
            self._cell("local:R1", "R1", 4.0),
        ])
        summary = compare_training_strategies(report)
        assert summary["per_region"]["R1"]["ratio"] == 0.5

    def test_missing_rows_rejected(self):
        report = EvalReport(cells=[self._cell("generalized", "R1", 8.0)])
        with pytest.raises(ValueError):
            compare_training_strategies(report)

    def test_unmatched_rows_rejected(self):
        report = EvalReport(cells=[
            self._cell("generalized", "R1", 8.0),
            self._cell("local:R1", "R1", 4.0),
            self._cell("generalized", "R2", 3.0),
        ])
        with pytest.raises(ValueError, match="R2"):
            compare_training_strategies(report)

    def test_merge_reports(self):
        a = EvalReport(cells=[self._cell("generalized", "R1", 1.0)])
        b = EvalReport(cells=[self._cell("local:R1", "R1", 2.0)])
        assert len(merge_reports(a, b).cells) == 2
