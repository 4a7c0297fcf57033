"""Ingestion and preparation of regional daily new-case series.

Input is a pair of CSV files: a cases file with header
``region_id,date,new_cases`` (ISO-8601 dates) and a metadata file with
header ``region_id,name,population,country,role``. Every region appearing
in the cases file must have exactly one metadata row, and each region is
assigned a single train/test role.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

INPUT_LEN = 50
OUTPUT_LEN = 10
SAMPLE_LEN = INPUT_LEN + OUTPUT_LEN

VALID_ROLES = ("train", "test")


class IngestError(ValueError):
    """Malformed CSV content; the message names the offending line."""


class MissingMetadataError(KeyError):
    """A region in the cases file has no metadata row."""


class CurveValidationError(ValueError):
    """A curve violates a structural invariant (gaps, negatives, lengths)."""


@dataclass
class EpiCurve:
    """One region's contiguous daily new-case series.

    ``dates`` must be strictly consecutive calendar days and ``new_cases``
    holds one non-negative value per day. ``gap_warnings`` records any
    interior dates that were zero-filled during ingestion.
    """

    region_id: str
    country_code: str
    dates: list[date]
    new_cases: np.ndarray
    population: int
    name: str = ""
    role: str = "train"
    gap_warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.new_cases = np.asarray(self.new_cases, dtype=float)
        if len(self.dates) < 1:
            raise CurveValidationError(f"{self.region_id}: empty curve")
        if len(self.new_cases) != len(self.dates):
            raise CurveValidationError(
                f"{self.region_id}: {len(self.new_cases)} case values for "
                f"{len(self.dates)} dates"
            )
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur - prev != timedelta(days=1):
                raise CurveValidationError(
                    f"{self.region_id}: dates not consecutive at {prev} -> {cur}"
                )
        if np.any(self.new_cases < 0):
            raise CurveValidationError(f"{self.region_id}: negative case count")
        if self.population < 1:
            raise CurveValidationError(f"{self.region_id}: population < 1")
        if self.role not in VALID_ROLES:
            raise CurveValidationError(
                f"{self.region_id}: role {self.role!r} not in {VALID_ROLES}"
            )

    def __len__(self) -> int:
        return len(self.dates)


@dataclass
class NormalizedCurve:
    """Min-max scaled series with enough metadata to undo the scaling."""

    values: np.ndarray
    scale: float  # original max
    offset: float  # original min
    source: str = ""


@dataclass
class Sample:
    """One contiguous (input, target) window pair cut from a curve."""

    input_window: np.ndarray
    target_window: np.ndarray
    region_id: str = ""
    start_date: date | None = None


@dataclass(frozen=True)
class RegionRole:
    region_id: str
    role: str


def _rows(stream):
    """Yield (line_number, row) for non-empty, non-comment CSV rows."""
    if isinstance(stream, bytes):
        text = stream.decode("utf-8")
    elif isinstance(stream, str):
        text = stream
    else:
        text = stream.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        if not row or row[0].lstrip().startswith("#"):
            continue
        yield reader.line_num, row


def _read_metadata(stream) -> dict[str, dict]:
    rows = _rows(stream)
    header = next(rows, None)
    if header is None or [h.strip() for h in header[1]] != [
        "region_id", "name", "population", "country", "role",
    ]:
        raise IngestError("metadata line 1: bad header")
    meta = {}
    for lineno, row in rows:
        if len(row) != 5:
            raise IngestError(f"metadata line {lineno}: expected 5 fields, got {len(row)}")
        region_id, name, population, country, role = (f.strip() for f in row)
        try:
            pop = int(population)
        except ValueError:
            raise IngestError(
                f"metadata line {lineno}: population {population!r} not an integer"
            ) from None
        if pop < 1:
            raise CurveValidationError(f"metadata line {lineno}: population {pop} < 1")
        if role not in VALID_ROLES:
            raise IngestError(f"metadata line {lineno}: role {role!r} not in {VALID_ROLES}")
        if region_id in meta:
            raise IngestError(f"metadata line {lineno}: duplicate region {region_id!r}")
        meta[region_id] = {"name": name, "population": pop, "country": country, "role": role}
    return meta


def ingest_cases_tolerant(cases_stream, metadata_stream):
    """Parse the CSV pair, isolating per-region failures.

    Returns (curves, errors) where ``errors`` maps a region id to the
    exception that disqualified it; rows that cannot be attributed to any
    region raise immediately. Batch tooling uses this to keep one bad
    region from hiding the rest.
    """
    meta = _read_metadata(metadata_stream)
    rows = _rows(cases_stream)
    header = next(rows, None)
    if header is None or [h.strip() for h in header[1]] != ["region_id", "date", "new_cases"]:
        raise IngestError("cases line 1: bad header")

    by_region: dict[str, list] = {}
    errors: dict[str, Exception] = {}
    for lineno, row in rows:
        region_id = row[0].strip() if row else ""
        if not region_id:
            raise IngestError(f"cases line {lineno}: missing region_id")
        if region_id in errors:
            continue
        if len(row) != 3:
            errors[region_id] = IngestError(
                f"cases line {lineno}: expected 3 fields, got {len(row)}")
            continue
        date_text, cases_text = row[1].strip(), row[2].strip()
        try:
            day = date.fromisoformat(date_text)
        except ValueError:
            errors[region_id] = IngestError(f"cases line {lineno}: bad date {date_text!r}")
            continue
        try:
            cases = float(cases_text)
        except ValueError:
            errors[region_id] = IngestError(
                f"cases line {lineno}: bad case count {cases_text!r}")
            continue
        if cases < 0:
            errors[region_id] = CurveValidationError(
                f"cases line {lineno}: negative case count {cases} for {region_id}")
            continue
        by_region.setdefault(region_id, []).append((day, cases))

    curves = []
    for region_id in sorted(by_region):
        if region_id in errors:
            continue
        if region_id not in meta:
            errors[region_id] = MissingMetadataError(region_id)
            continue
        entries = sorted(by_region[region_id])
        seen = {}
        duplicate = None
        for day, cases in entries:
            if day in seen:
                duplicate = day
                break
            seen[day] = cases
        if duplicate is not None:
            errors[region_id] = IngestError(
                f"region {region_id}: duplicate date {duplicate}")
            continue
        first, last = entries[0][0], entries[-1][0]
        dates = []
        values = []
        warnings = []
        day = first
        while day <= last:
            dates.append(day)
            if day in seen:
                values.append(seen[day])
            else:
                values.append(0.0)
                warnings.append(f"missing date {day} zero-filled")
            day += timedelta(days=1)
        info = meta[region_id]
        try:
            curves.append(EpiCurve(
                region_id=region_id,
                country_code=info["country"],
                dates=dates,
                new_cases=np.array(values),
                population=info["population"],
                name=info["name"],
                role=info["role"],
                gap_warnings=warnings,
            ))
        except CurveValidationError as err:
            errors[region_id] = err
    return curves, errors


def ingest_cases(cases_stream, metadata_stream) -> list[EpiCurve]:
    """Parse the cases/metadata CSV pair into one EpiCurve per region.

    Rows are sorted by date per region and missing interior dates are
    zero-filled, with a note appended to the curve's ``gap_warnings``.
    Raises IngestError (bad row, with line number), MissingMetadataError
    (region without metadata) or CurveValidationError (negative counts).
    """
    curves, errors = ingest_cases_tolerant(cases_stream, metadata_stream)
    if errors:
        raise next(iter(errors.values()))
    return curves


def region_roles(curves: list[EpiCurve]) -> list[RegionRole]:
    return [RegionRole(c.region_id, c.role) for c in curves]


def incidence_per_million(curve: EpiCurve) -> np.ndarray:
    """Daily new cases per one million population."""
    return curve.new_cases * 1e6 / curve.population


def normalize(values, source: str = "") -> NormalizedCurve:
    """Min-max scale a series to [0, 1]; a constant series maps to zeros."""
    values = np.asarray(values, dtype=float)
    if values.size < 1:
        raise ValueError("cannot normalize an empty series")
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return NormalizedCurve(np.zeros_like(values), scale=hi, offset=lo, source=source)
    return NormalizedCurve((values - lo) / (hi - lo), scale=hi, offset=lo, source=source)


def denormalize(curve: NormalizedCurve) -> np.ndarray:
    return curve.values * (curve.scale - curve.offset) + curve.offset


def denormalize_values(values, scale: float, offset: float) -> np.ndarray:
    return np.asarray(values, dtype=float) * (scale - offset) + offset


def extract_samples(values, input_len: int = INPUT_LEN, output_len: int = OUTPUT_LEN,
                    region_id: str = "", dates: list[date] | None = None) -> list[Sample]:
    """Cut non-overlapping (input, target) windows left to right from index 0.

    Yields floor(len(values) / (input_len + output_len)) samples; trailing
    days that do not fill a whole window are discarded.
    """
    values = np.asarray(values, dtype=float)
    size = input_len + output_len
    if size < 1:
        raise ValueError("sample size must be at least 1")
    samples = []
    for start in range(0, len(values) - size + 1, size):
        samples.append(Sample(
            input_window=values[start:start + input_len].copy(),
            target_window=values[start + input_len:start + size].copy(),
            region_id=region_id,
            start_date=dates[start] if dates is not None else None,
        ))
    return samples


def temporal_split(curve: EpiCurve, split_date: date) -> tuple[np.ndarray, np.ndarray]:
    """Split into (values strictly before split_date, values from split_date on)."""
    n_before = sum(1 for d in curve.dates if d < split_date)
    return curve.new_cases[:n_before].copy(), curve.new_cases[n_before:].copy()


def curve_record(curve: EpiCurve) -> dict:
    """JSON-friendly export mirroring the CSV schema."""
    return {
        "region_id": curve.region_id,
        "name": curve.name,
        "country": curve.country_code,
        "population": curve.population,
        "role": curve.role,
        "dates": [d.isoformat() for d in curve.dates],
        "new_cases": [float(v) for v in curve.new_cases],
        "gap_warnings": list(curve.gap_warnings),
    }
