"""Timestamped, binary-labeled datasets: ingestion, validation, summaries.

The positive class is label 1 throughout the library (in the malware use
case that inspired it: malware = 1, goodware = 0). Timestamps are UTC
calendar dates at day resolution. Time is bucketed into half-open slots
``[origin + k*width, origin + (k+1)*width)`` where a :class:`Period` width
is either a number of calendar months (calendar arithmetic, day-of-month
clamped) or a number of days.
"""

from __future__ import annotations

import calendar
import csv
import json
import re
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Period",
    "Sample",
    "LabeledDataset",
    "DatasetSummary",
    "DatasetFormatError",
    "add_months",
    "add_period",
    "slot_index",
    "load_dataset",
    "write_csv",
    "write_jsonl",
    "summarize",
    "concat",
]


class DatasetFormatError(ValueError):
    """Malformed dataset file; message carries the offending line number."""


@dataclass(frozen=True)
class Period:
    """A slot width or window size: whole calendar months OR whole days."""

    months: int = 0
    days: int = 0

    def __post_init__(self) -> None:
        if (self.months > 0) == (self.days > 0):
            raise ValueError("Period must set exactly one of months/days > 0")
        if self.months < 0 or self.days < 0:
            raise ValueError("Period components must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "Period":
        """Parse compact period syntax: '12m' (months) or '45d' (days)."""
        m = re.fullmatch(r"\s*(\d+)\s*([md])\s*", str(text))
        if not m:
            raise ValueError(f"bad period {text!r}; expected e.g. '12m' or '45d'")
        n, unit = int(m.group(1)), m.group(2)
        return cls(months=n) if unit == "m" else cls(days=n)

    def __str__(self) -> str:
        return f"{self.months}m" if self.months else f"{self.days}d"

    def scaled(self, k: int) -> "Period":
        return Period(months=self.months * k, days=self.days * k)

    def slots_of(self, width: "Period") -> int:
        """How many ``width`` slots tile this period; must divide exactly."""
        if self.months and width.months:
            q, r = divmod(self.months, width.months)
        elif self.days and width.days:
            q, r = divmod(self.days, width.days)
        else:
            raise ValueError(f"incompatible period units: {self} vs {width}")
        if r:
            raise ValueError(f"{self} is not a whole multiple of {width}")
        return q


def add_months(d: date, n: int) -> date:
    """Calendar-month shift with day-of-month clamping (Jan 31 + 1m = Feb 28)."""
    total = d.year * 12 + (d.month - 1) + n
    year, month0 = divmod(total, 12)
    month = month0 + 1
    day = min(d.day, calendar.monthrange(year, month)[1])
    return date(year, month, day)


def add_period(d: date, period: Period, k: int = 1) -> date:
    if period.months:
        return add_months(d, period.months * k)
    return d + timedelta(days=period.days * k)


def slot_index(t: date, origin: date, width: Period) -> int:
    """Index k with ``t`` in ``[origin + k*width, origin + (k+1)*width)``.

    Month widths follow calendar arithmetic from ``origin`` (boundaries are
    ``origin`` shifted by whole months, never iterated, so clamping cannot
    accumulate).
    """
    if t < origin:
        raise ValueError(f"timestamp {t} precedes slot origin {origin}")
    if width.days:
        return (t - origin).days // width.days
    k = ((t.year - origin.year) * 12 + (t.month - origin.month)) // width.months
    while add_period(origin, width, k + 1) <= t:
        k += 1
    while k > 0 and add_period(origin, width, k) > t:
        k -= 1
    return k


@dataclass(frozen=True, eq=False)
class Sample:
    """One timestamped object: opaque id, UTC date, binary label, features."""

    id: str
    timestamp: date
    label: int
    features: np.ndarray


class LabeledDataset:
    """Immutable collection of samples sharing one feature dimensionality.

    Invariants enforced at construction: non-empty, unique ids, labels in
    {0, 1}, consistent feature width. Arrays are stored read-only so a
    dataset can be shared freely across workers.
    """

    def __init__(
        self,
        ids: Sequence[str],
        timestamps: Sequence[date],
        labels: Sequence[int] | np.ndarray,
        features: np.ndarray,
    ) -> None:
        self.ids: tuple[str, ...] = tuple(str(i) for i in ids)
        self.timestamps: tuple[date, ...] = tuple(timestamps)
        self.labels = np.asarray(labels, dtype=np.int64).copy()
        feats = np.asarray(features, dtype=np.float64)
        if feats.ndim != 2:
            raise ValueError("features must be a 2-D array (n_samples, n_features)")
        self.features = feats.copy()
        self.labels.setflags(write=False)
        self.features.setflags(write=False)
        self._validate()
        self._id_pos = {sid: i for i, sid in enumerate(self.ids)}

    def _validate(self) -> None:
        n = len(self.ids)
        if n == 0:
            raise ValueError("dataset must be non-empty")
        if not (len(self.timestamps) == len(self.labels) == self.features.shape[0] == n):
            raise ValueError("ids/timestamps/labels/features lengths disagree")
        if len(set(self.ids)) != n:
            seen: set[str] = set()
            dup = next(i for i in self.ids if i in seen or seen.add(i))
            raise ValueError(f"duplicate sample id {dup!r}")
        bad = set(np.unique(self.labels)) - {0, 1}
        if bad:
            raise ValueError(f"labels must be 0 or 1, got {sorted(bad)}")

    # -- basic views ---------------------------------------------------

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dimensionality(self) -> int:
        return self.features.shape[1]

    @property
    def time_range(self) -> tuple[date, date]:
        return (min(self.timestamps), max(self.timestamps))

    @property
    def n_positive(self) -> int:
        return int(self.labels.sum())

    @property
    def n_negative(self) -> int:
        return len(self) - self.n_positive

    @property
    def positive_ratio(self) -> float:
        return self.n_positive / len(self)

    def sample(self, i: int) -> Sample:
        return Sample(self.ids[i], self.timestamps[i], int(self.labels[i]), self.features[i])

    def __iter__(self) -> Iterator[Sample]:
        return (self.sample(i) for i in range(len(self)))

    def index_of(self, sample_id: str) -> int:
        return self._id_pos[sample_id]

    # -- derived datasets ----------------------------------------------

    def subset(self, indices: Sequence[int] | np.ndarray) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.intp)
        return LabeledDataset(
            [self.ids[i] for i in idx],
            [self.timestamps[i] for i in idx],
            self.labels[idx],
            self.features[idx],
        )

    def between(self, start: date, end: date) -> "LabeledDataset":
        """Samples with ``start <= timestamp < end`` (original order)."""
        idx = [i for i, t in enumerate(self.timestamps) if start <= t < end]
        if not idx:
            raise ValueError(f"no samples in [{start}, {end})")
        return self.subset(idx)

    def count_between(self, start: date, end: date) -> int:
        return sum(1 for t in self.timestamps if start <= t < end)


def concat(parts: Iterable[LabeledDataset]) -> LabeledDataset:
    """Concatenate datasets in the given order; ids must stay unique."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to concatenate")
    return LabeledDataset(
        [i for p in parts for i in p.ids],
        [t for p in parts for t in p.timestamps],
        np.concatenate([p.labels for p in parts]),
        np.vstack([p.features for p in parts]),
    )


# ---------------------------------------------------------------------------
# Ingestion. CSV schema: header id,timestamp,label,f0,...,f{n-1}; dates are
# YYYY-MM-DD; labels 0|1; features decimal numerals. JSONL: one object per
# line with keys id, timestamp, label, features. Both UTF-8.
# ---------------------------------------------------------------------------


def _parse_date(text: str, lineno: int) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise DatasetFormatError(f"line {lineno}: unparseable timestamp {text!r}") from None


def _parse_label(text: object, lineno: int) -> int:
    if text in ("0", "1", 0, 1):
        return int(text)
    raise DatasetFormatError(f"line {lineno}: label must be 0 or 1, got {text!r}")


def _check_range(t: date, expected_range: tuple[date, date] | None, lineno: int) -> None:
    if expected_range is not None and not (expected_range[0] <= t <= expected_range[1]):
        raise DatasetFormatError(
            f"line {lineno}: timestamp {t} outside expected range "
            f"[{expected_range[0]}, {expected_range[1]}]"
        )


def load_dataset(
    path: str,
    format: str | None = None,
    expected_range: tuple[date, date] | None = None,
) -> LabeledDataset:
    """Load a CSV or JSONL dataset file, validating as it goes.

    ``format`` is inferred from the file suffix when omitted. Malformed
    rows raise :class:`DatasetFormatError` naming the 1-based line number.
    ``expected_range`` (inclusive), when given, rejects rows whose
    timestamps fall outside it; timestamp sanitization is the caller's
    declaration, never guessed.
    """
    if format is None:
        format = "jsonl" if str(path).endswith((".jsonl", ".ndjson")) else "csv"
    if format not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {format!r}; expected 'csv' or 'jsonl'")
    loader = _load_csv if format == "csv" else _load_jsonl
    ids, stamps, labels, rows = loader(path, expected_range)
    seen: dict[str, int] = {}
    for lineno, sid in ids:
        if sid in seen:
            raise DatasetFormatError(
                f"line {lineno}: duplicate id {sid!r} (first seen line {seen[sid]})"
            )
        seen[sid] = lineno
    if not rows:
        raise DatasetFormatError("dataset file contains no samples")
    return LabeledDataset([s for _, s in ids], stamps, labels, np.array(rows, dtype=np.float64))


def _load_csv(path, expected_range):
    ids: list[tuple[int, str]] = []
    stamps: list[date] = []
    labels: list[int] = []
    rows: list[list[float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError("empty file: missing header") from None
        if header[:3] != ["id", "timestamp", "label"]:
            raise DatasetFormatError(
                f"line 1: header must start with id,timestamp,label; got {header[:3]}"
            )
        dim = len(header) - 3
        if dim < 1:
            raise DatasetFormatError("line 1: header declares no feature columns")
        expected_feats = [f"f{i}" for i in range(dim)]
        if header[3:] != expected_feats:
            raise DatasetFormatError(f"line 1: feature columns must be f0..f{dim - 1}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3 + dim:
                raise DatasetFormatError(
                    f"line {lineno}: feature dimensionality mismatch: expected "
                    f"{dim} features, got {len(row) - 3}"
                )
            t = _parse_date(row[1], lineno)
            _check_range(t, expected_range, lineno)
            try:
                feats = [float(v) for v in row[3:]]
            except ValueError:
                raise DatasetFormatError(f"line {lineno}: non-numeric feature value") from None
            ids.append((lineno, row[0]))
            stamps.append(t)
            labels.append(_parse_label(row[2], lineno))
            rows.append(feats)
    return ids, stamps, labels, rows


def _load_jsonl(path, expected_range):
    ids: list[tuple[int, str]] = []
    stamps: list[date] = []
    labels: list[int] = []
    rows: list[list[float]] = []
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            missing = {"id", "timestamp", "label", "features"} - set(obj)
            if missing:
                raise DatasetFormatError(f"line {lineno}: missing keys {sorted(missing)}")
            feats = obj["features"]
            if not isinstance(feats, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in feats
            ):
                raise DatasetFormatError(f"line {lineno}: features must be a numeric array")
            if dim is None:
                dim = len(feats)
                if dim < 1:
                    raise DatasetFormatError(f"line {lineno}: empty feature array")
            elif len(feats) != dim:
                raise DatasetFormatError(
                    f"line {lineno}: feature dimensionality mismatch: expected "
                    f"{dim} features, got {len(feats)}"
                )
            t = _parse_date(str(obj["timestamp"]), lineno)
            _check_range(t, expected_range, lineno)
            ids.append((lineno, str(obj["id"])))
            stamps.append(t)
            labels.append(_parse_label(obj["label"], lineno))
            rows.append([float(v) for v in feats])
    return ids, stamps, labels, rows


def write_csv(d: LabeledDataset, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "timestamp", "label"] + [f"f{i}" for i in range(d.dimensionality)])
        for s in d:
            writer.writerow(
                [s.id, s.timestamp.isoformat(), s.label] + [repr(float(v)) for v in s.features]
            )


def write_jsonl(d: LabeledDataset, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in d:
            fh.write(
                json.dumps(
                    {
                        "id": s.id,
                        "timestamp": s.timestamp.isoformat(),
                        "label": s.label,
                        "features": [float(v) for v in s.features],
                    }
                )
                + "\n"
            )


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DatasetSummary:
    """Per-slot class counts plus the overall positive ratio."""

    slot_starts: tuple[date, ...]
    pos_counts: np.ndarray
    neg_counts: np.ndarray
    positive_ratio: float
    slot_width: Period

    @property
    def n_slots(self) -> int:
        return len(self.slot_starts)

    @property
    def slots_missing_class(self) -> list[int]:
        """Slots with no positives or no negatives (regenerate, don't score)."""
        return [
            k
            for k in range(self.n_slots)
            if self.pos_counts[k] == 0 or self.neg_counts[k] == 0
        ]


def summarize(d: LabeledDataset, slot_width: Period) -> DatasetSummary:
    """Partition the dataset into calendar slots and count classes per slot.

    Month-based widths snap the origin to the first day of the earliest
    sample's month, so monthly summaries align with calendar months; day
    widths start at the earliest timestamp.
    """
    first, last = d.time_range
    origin = date(first.year, first.month, 1) if slot_width.months else first
    n_slots = slot_index(last, origin, slot_width) + 1
    pos = np.zeros(n_slots, dtype=np.int64)
    neg = np.zeros(n_slots, dtype=np.int64)
    for t, y in zip(d.timestamps, d.labels):
        k = slot_index(t, origin, slot_width)
        if y == 1:
            pos[k] += 1
        else:
            neg[k] += 1
    starts = tuple(add_period(origin, slot_width, k) for k in range(n_slots))
    return DatasetSummary(starts, pos, neg, d.positive_ratio, slot_width)
