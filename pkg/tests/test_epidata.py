from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epicast.epidata import (CurveValidationError, EpiCurve, IngestError,
                             MissingMetadataError, Sample, denormalize,
                             extract_samples, incidence_per_million, ingest_cases,
                             ingest_cases_tolerant, normalize, region_roles,
                             temporal_split)

META = (
    "region_id,name,population,country,role\n"
    "LKA-Colombo,Colombo,2000000,LKA,test\n"
    "LKA-Kandy,Kandy,1400000,LKA,train\n"
)


def make_curve(values, population=1_000_000, region="R", start=date(2021, 1, 1)):
    from datetime import timedelta
    dates = [start + timedelta(days=i) for i in range(len(values))]
    return EpiCurve(region_id=region, country_code="XX", dates=dates,
                    new_cases=np.array(values, dtype=float), population=population)


class TestIngest:
    def test_three_consecutive_rows(self):
        cases = (
            "region_id,date,new_cases\n"
            "LKA-Colombo,2021-01-01,5\n"
            "LKA-Colombo,2021-01-02,7\n"
            "LKA-Colombo,2021-01-03,6\n"
        )
        curves = ingest_cases(cases, META)
        assert len(curves) == 1
        curve = curves[0]
        assert len(curve) == 3
        assert curve.population == 2_000_000
        assert curve.role == "test"
        assert curve.new_cases.tolist() == [5.0, 7.0, 6.0]
        assert not curve.gap_warnings

    def test_interior_gap_zero_filled_with_warning(self):
        cases = (
            "region_id,date,new_cases\n"
            "LKA-Kandy,2021-01-01,5\n"
            "LKA-Kandy,2021-01-04,9\n"
        )
        curve = ingest_cases(cases, META)[0]
        assert curve.new_cases.tolist() == [5.0, 0.0, 0.0, 9.0]
        assert len(curve.gap_warnings) == 2
        assert "2021-01-02" in curve.gap_warnings[0]

    def test_negative_value_rejected(self):
        cases = "region_id,date,new_cases\nX,2021-01-01,-3\n"
        meta = "region_id,name,population,country,role\nX,X,1000,XX,train\n"
        with pytest.raises(CurveValidationError):
            ingest_cases(cases, meta)

    def test_missing_metadata(self):
        cases = "region_id,date,new_cases\nNOPE,2021-01-01,3\n"
        with pytest.raises(MissingMetadataError):
            ingest_cases(cases, META)

    def test_malformed_row_names_line(self):
        cases = (
            "region_id,date,new_cases\n"
            "LKA-Kandy,2021-01-01,5\n"
            "LKA-Kandy,not-a-date,5\n"
        )
        with pytest.raises(IngestError, match="line 3"):
            ingest_cases(cases, META)

    def test_unsorted_rows_are_sorted(self):
        cases = (
            "region_id,date,new_cases\n"
            "LKA-Kandy,2021-01-02,7\n"
            "LKA-Kandy,2021-01-01,5\n"
        )
        curve = ingest_cases(cases, META)[0]
        assert curve.new_cases.tolist() == [5.0, 7.0]

    def test_comment_lines_skipped(self):
        cases = (
            "# seed=0 config=abc version=0.1.0\n"
            "region_id,date,new_cases\n"
            "LKA-Kandy,2021-01-01,5\n"
        )
        assert len(ingest_cases(cases, META)) == 1

    def test_tolerant_isolates_bad_region(self):
        cases = (
            "region_id,date,new_cases\n"
            "LKA-Colombo,2021-01-01,5\n"
            "LKA-Kandy,2021-01-01,bad\n"
        )
        curves, errors = ingest_cases_tolerant(cases, META)
        assert [c.region_id for c in curves] == ["LKA-Colombo"]
        assert set(errors) == {"LKA-Kandy"}

    def test_roles(self):
        cases = (
            "region_id,date,new_cases\n"
            "LKA-Colombo,2021-01-01,5\n"
            "LKA-Kandy,2021-01-01,3\n"
        )
        roles = {r.region_id: r.role for r in region_roles(ingest_cases(cases, META))}
        assert roles == {"LKA-Colombo": "test", "LKA-Kandy": "train"}


class TestCurveInvariants:
    def test_gap_in_dates_rejected(self):
        dates = [date(2021, 1, 1), date(2021, 1, 3)]
        with pytest.raises(CurveValidationError):
            EpiCurve("R", "XX", dates, np.array([1.0, 2.0]), 1000)

    def test_length_mismatch_rejected(self):
        with pytest.raises(CurveValidationError):
            EpiCurve("R", "XX", [date(2021, 1, 1)], np.array([1.0, 2.0]), 1000)

    def test_population_floor(self):
        with pytest.raises(CurveValidationError):
            make_curve([1.0], population=0)


class TestIncidence:
    def test_unit_population(self):
        assert incidence_per_million(make_curve([50.0]))[0] == 50.0

    def test_scaling(self):
        assert incidence_per_million(make_curve([13.0], population=2_600_000))[0] == 5.0

    def test_zero_cases(self):
        assert incidence_per_million(make_curve([0.0]))[0] == 0.0

    @given(st.floats(1.0, 1e4), st.integers(1, 10**8))
    def test_linearity(self, cases, population):
        single = incidence_per_million(make_curve([cases], population=population))[0]
        double = incidence_per_million(make_curve([2 * cases], population=population))[0]
        assert double == pytest.approx(2 * single, rel=1e-12)


class TestNormalize:
    def test_basic(self):
        assert normalize([0, 5, 10]).values.tolist() == [0.0, 0.5, 1.0]

    def test_constant_maps_to_zeros(self):
        norm = normalize([7, 7, 7])
        assert norm.values.tolist() == [0.0, 0.0, 0.0]
        assert norm.scale == norm.offset == 7.0

    def test_order_free(self):
        assert normalize([3, 1, 2]).values.tolist() == [1.0, 0.0, 0.5]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            normalize([])

    @settings(max_examples=200)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=50))
    def test_round_trip(self, values):
        norm = normalize(values)
        if norm.scale == norm.offset:
            return  # constant curves intentionally collapse to zero
        back = denormalize(norm)
        assert np.allclose(back, values, atol=1e-9 * max(1.0, abs(norm.scale)))

    def test_scaling_equivariance(self):
        # training inputs are scale-free: scaling a curve leaves them unchanged
        rng = np.random.default_rng(8)
        values = rng.uniform(0, 500, 120)
        base = normalize(values).values
        assert np.array_equal(normalize(values * 4.0).values, base)  # exact for 2^k
        assert np.allclose(normalize(values * 3.0).values, base, atol=1e-12)


class TestExtractSamples:
    def test_130_days_two_samples(self):
        samples = extract_samples(np.arange(130.0))
        assert len(samples) == 2
        assert samples[0].input_window[0] == 0.0
        assert samples[1].input_window[0] == 60.0

    def test_59_days_zero_samples(self):
        assert extract_samples(np.arange(59.0)) == []

    def test_120_days_cover_disjoint_ranges(self):
        samples = extract_samples(np.arange(120.0))
        assert len(samples) == 2
        covered = np.concatenate([
            np.concatenate([s.input_window, s.target_window]) for s in samples
        ])
        assert covered.tolist() == list(range(120))

    def test_window_shapes_and_contiguity(self):
        samples = extract_samples(np.arange(60.0))
        s = samples[0]
        assert len(s.input_window) == 50 and len(s.target_window) == 10
        assert s.target_window[0] == s.input_window[-1] + 1

    def test_count_formula_across_lengths(self):
        for length in range(0, 501):
            count = len(extract_samples(np.zeros(length)))
            assert count == length // 60


class TestTemporalSplit:
    def test_curve_ends_before_split(self):
        curve = make_curve(np.ones(100), start=date(2021, 1, 1))
        before, after = temporal_split(curve, date(2021, 4, 11))
        assert len(before) == 100 and len(after) == 0

    def test_split_before_start(self):
        curve = make_curve(np.ones(30))
        before, after = temporal_split(curve, date(2020, 12, 1))
        assert len(before) == 0 and len(after) == 30

    def test_partition(self):
        curve = make_curve(np.arange(90.0))
        before, after = temporal_split(curve, date(2021, 2, 1))
        assert len(before) + len(after) == 90
        assert np.array_equal(np.concatenate([before, after]), curve.new_cases)
