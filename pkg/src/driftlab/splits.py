"""Train/test partitions that respect the three realistic-evaluation constraints.

The constraints, checked by the validators below and enforced by
:func:`time_aware_split`:

* C1 — every training timestamp strictly precedes every testing timestamp;
* C2 — each test slot k only contains samples dated inside its half-open
  window ``[start_k, start_k + slot_width)``;
* C3 — each test slot's positive ratio stays inside a tolerance band
  around the estimated deployment ratio sigma_hat (default 0.10 +/- 0.02).

Ratios are reached by downsampling the class that is over-represented
relative to the target; the under-represented class is never touched and
nothing is ever synthesized. All randomness is seeded through
:mod:`driftlab.rng`, so identical inputs reproduce identical splits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from typing import Literal, Sequence

import numpy as np

from .classifiers import TrainedModel
from .dataset import LabeledDataset, Period, add_period
from .rng import derive_rng

__all__ = [
    "SplitSpec",
    "RatioSpec",
    "TemporalSplit",
    "ConstraintVerdict",
    "InsufficientSpanError",
    "EmptySlotError",
    "UpsamplingRequiredError",
    "time_aware_split",
    "enforce_ratio",
    "check_c1",
    "check_c2",
    "check_c3",
    "run_all_checks",
    "split_to_manifest",
    "split_from_manifest",
]


class InsufficientSpanError(ValueError):
    """Dataset does not cover origin + train_window + test_window."""


class EmptySlotError(ValueError):
    """A train or test slot lacks one class entirely."""


class UpsamplingRequiredError(ValueError):
    """Requested ratio is unreachable by downsampling alone."""


@dataclass(frozen=True)
class SplitSpec:
    """Window geometry: train width W, test width S, slot width delta, origin."""

    train_window: Period
    test_window: Period
    slot_width: Period
    origin: date

    def __post_init__(self) -> None:
        if self.n_test_slots < 2:
            raise ValueError("test window must contain at least 2 slots (AUT needs >= 2)")

    @property
    def n_test_slots(self) -> int:
        return self.test_window.slots_of(self.slot_width)

    @property
    def test_origin(self) -> date:
        return add_period(self.origin, self.train_window)

    @property
    def test_end(self) -> date:
        return add_period(self.test_origin, self.test_window)

    def test_slot_start(self, k: int) -> date:
        return add_period(self.test_origin, self.slot_width, k)

    def test_slot_starts(self) -> tuple[date, ...]:
        return tuple(self.test_slot_start(k) for k in range(self.n_test_slots))


@dataclass(frozen=True)
class RatioSpec:
    """Class-ratio targets: estimated in-the-wild positive rate sigma_hat,
    training ratio phi, testing ratio delta, and the per-slot C3 band."""

    sigma_hat: float = 0.10
    phi: float = 0.10
    delta: float = 0.10
    per_slot_tolerance: float = 0.02

    def __post_init__(self) -> None:
        for name in ("sigma_hat", "phi", "delta"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.per_slot_tolerance < 0:
            raise ValueError("per_slot_tolerance must be non-negative")

    @property
    def band(self) -> tuple[float, float]:
        # Rounded to 12 decimals so e.g. 0.10 +/- 0.02 gives the decimal
        # band [0.08, 0.12] with inclusive edges, not 0.12000000000000001.
        return (
            round(self.sigma_hat - self.per_slot_tolerance, 12),
            round(self.sigma_hat + self.per_slot_tolerance, 12),
        )


@dataclass(frozen=True)
class TemporalSplit:
    train: LabeledDataset
    test_slots: tuple[LabeledDataset, ...]
    spec: SplitSpec
    ratios: RatioSpec

    def __post_init__(self) -> None:
        if len(self.test_slots) != self.spec.n_test_slots:
            raise ValueError(
                f"expected {self.spec.n_test_slots} test slots, got {len(self.test_slots)}"
            )

    @property
    def slot_starts(self) -> tuple[date, ...]:
        return self.spec.test_slot_starts()

    @property
    def n_test_samples(self) -> int:
        return sum(len(s) for s in self.test_slots)


# ---------------------------------------------------------------------------
# Ratio enforcement by downsampling
# ---------------------------------------------------------------------------


def _round_half_even(x: float) -> int:
    return int(np.rint(x))


def enforce_ratio(
    pool: LabeledDataset,
    target: float,
    mode: Literal["random", "uncertainty_prioritized"] = "random",
    scorer: TrainedModel | None = None,
    seed: int = 0,
) -> LabeledDataset:
    """Downsample the over-represented class until the ratio is closest to target.

    The under-represented class is kept whole; the retained count of the
    other class is the half-to-even rounding of the exact solution, so
    |realized - target| <= 1/len(result). In uncertainty mode the retained
    samples are those the scorer is least sure about (smallest
    |score - 0.5|, ties by ascending id), which keeps the points that
    define the decision boundary; in random mode retention is a seeded
    uniform draw. Output preserves the pool's original order.
    """
    if not (0.0 < target < 1.0):
        raise ValueError(f"target ratio must lie in (0, 1), got {target}")
    if mode not in ("random", "uncertainty_prioritized"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "uncertainty_prioritized" and scorer is None:
        raise ValueError("uncertainty_prioritized mode requires a scorer")

    n_pos, n_neg = pool.n_positive, pool.n_negative
    # Over-represented class relative to target, by cross-multiplication
    # (avoids dividing and float ratio round-off).
    pos_excess = n_pos * (1.0 - target) - n_neg * target
    if pos_excess > 0:
        if n_neg == 0:
            raise UpsamplingRequiredError("no negatives: target unreachable by downsampling")
        cut_label, keep_count = 1, _round_half_even(n_neg * target / (1.0 - target))
    elif pos_excess < 0:
        if n_pos == 0:
            raise UpsamplingRequiredError("no positives: target unreachable by downsampling")
        cut_label, keep_count = 0, _round_half_even(n_pos * (1.0 - target) / target)
    else:
        return pool

    cut_idx = np.flatnonzero(pool.labels == cut_label)
    if keep_count >= len(cut_idx):
        return pool
    if mode == "random":
        rng = derive_rng(seed, "enforce_ratio")
        kept = rng.choice(cut_idx, size=keep_count, replace=False)
    else:
        conf = np.abs(scorer.scores(pool.features[cut_idx]) - 0.5)
        order = sorted(range(len(cut_idx)), key=lambda j: (conf[j], pool.ids[cut_idx[j]]))
        kept = cut_idx[order[:keep_count]]
    keep_mask = pool.labels != cut_label
    keep_mask[kept] = True
    return pool.subset(np.flatnonzero(keep_mask))


# ---------------------------------------------------------------------------
# Split construction
# ---------------------------------------------------------------------------


def time_aware_split(
    d: LabeledDataset, spec: SplitSpec, ratios: RatioSpec, seed: int
) -> TemporalSplit:
    """Carve the dataset into a C1/C2/C3-respecting train/test partition.

    Training covers ``[origin, origin + W)`` downsampled to ratio phi; each
    of the N = S/delta test slots is downsampled to ratio delta. Samples
    outside the declared windows are dropped. The same (d, spec, ratios,
    seed) always produces the identical split; the test side's random
    streams do not depend on phi, so splits differing only in phi share
    their test slots exactly.
    """
    last = d.time_range[1]
    if last < spec.test_slot_start(spec.n_test_slots - 1):
        raise InsufficientSpanError(
            f"dataset ends {last}, before the last test slot "
            f"starting {spec.test_slot_start(spec.n_test_slots - 1)}"
        )

    train_pool = _window_or_empty(d, spec.origin, spec.test_origin)
    if train_pool is None or train_pool.n_positive == 0 or train_pool.n_negative == 0:
        raise EmptySlotError("training window lacks one class entirely")
    train = enforce_ratio(train_pool, ratios.phi, "random", seed=_child(seed, "train"))

    slots = []
    for k in range(spec.n_test_slots):
        lo = spec.test_slot_start(k)
        hi = add_period(lo, spec.slot_width)
        slot_pool = _window_or_empty(d, lo, hi)
        if slot_pool is None or slot_pool.n_positive == 0 or slot_pool.n_negative == 0:
            raise EmptySlotError(f"test slot {k} ([{lo}, {hi})) lacks one class")
        slots.append(
            enforce_ratio(slot_pool, ratios.delta, "random", seed=_child(seed, "test", k))
        )
    return TemporalSplit(train, tuple(slots), spec, ratios)


def _child(seed: int, *labels) -> int:
    return int(derive_rng(seed, "split", *labels).integers(2**63))


def _window_or_empty(d: LabeledDataset, start: date, end: date) -> LabeledDataset | None:
    idx = [i for i, t in enumerate(d.timestamps) if start <= t < end]
    return d.subset(idx) if idx else None


# ---------------------------------------------------------------------------
# Constraint validators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintVerdict:
    constraint: str
    passed: bool
    witnesses: tuple[dict, ...] = ()
    per_slot: tuple[dict, ...] = ()
    warnings: tuple[dict, ...] = ()

    def as_dict(self) -> dict:
        return {
            "constraint": self.constraint,
            "pass": self.passed,
            "witnesses": list(self.witnesses),
            "per_slot": list(self.per_slot),
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def check_c1(split: TemporalSplit) -> ConstraintVerdict:
    """Training strictly precedes testing; witness is one offending pair."""
    train = split.train
    i_max = max(range(len(train)), key=lambda i: train.timestamps[i])
    t_train = train.timestamps[i_max]
    best: tuple[date, str] | None = None
    for slot in split.test_slots:
        j = min(range(len(slot)), key=lambda j: slot.timestamps[j])
        if best is None or slot.timestamps[j] < best[0]:
            best = (slot.timestamps[j], slot.ids[j])
    assert best is not None
    passed = t_train < best[0]
    witnesses = ()
    if not passed:
        witnesses = (
            {
                "train_id": train.ids[i_max],
                "train_timestamp": t_train.isoformat(),
                "test_id": best[1],
                "test_timestamp": best[0].isoformat(),
            },
        )
    return ConstraintVerdict("C1", passed, witnesses=witnesses)


def check_c2(split: TemporalSplit) -> ConstraintVerdict:
    """Every test sample sits inside its slot's window.

    Failures are out-of-window samples. Warnings (never failures) flag
    slots where a class is absent or where the two classes' timestamp
    ranges do not overlap — the fingerprint of classes collected from
    different periods — and training-window slots missing a class, which
    cannot bias the evaluation but can skew what the model learns.
    """
    witnesses: list[dict] = []
    warnings: list[dict] = []
    width = split.spec.slot_width
    for k, slot in enumerate(split.test_slots):
        lo = split.spec.test_slot_start(k)
        hi = add_period(lo, width)
        for i, t in enumerate(slot.timestamps):
            if not (lo <= t < hi):
                witnesses.append(
                    {"slot": k, "id": slot.ids[i], "timestamp": t.isoformat()}
                )
        pos_ts = [t for t, y in zip(slot.timestamps, slot.labels) if y == 1]
        neg_ts = [t for t, y in zip(slot.timestamps, slot.labels) if y == 0]
        if not pos_ts or not neg_ts:
            warnings.append({"slot": k, "kind": "missing_class"})
        elif max(pos_ts) < min(neg_ts) or max(neg_ts) < min(pos_ts):
            warnings.append({"slot": k, "kind": "disjoint_class_windows"})
    for k, lo, hi in _train_slots(split.spec):
        labels = [
            y
            for t, y in zip(split.train.timestamps, split.train.labels)
            if lo <= t < hi
        ]
        if labels and (all(y == 1 for y in labels) or all(y == 0 for y in labels)):
            warnings.append({"slot": k, "kind": "train_missing_class"})
    return ConstraintVerdict(
        "C2", not witnesses, witnesses=tuple(witnesses), warnings=tuple(warnings)
    )


def _train_slots(spec: SplitSpec):
    k = 0
    while True:
        lo = add_period(spec.origin, spec.slot_width, k)
        if lo >= spec.test_origin:
            return
        hi = min(add_period(lo, spec.slot_width), spec.test_origin)
        yield k, lo, hi
        k += 1


def check_c3(split: TemporalSplit) -> ConstraintVerdict:
    """Each test slot's positive ratio stays inside the sigma_hat band."""
    lo, hi = split.ratios.band
    per_slot = []
    passed = True
    for k, slot in enumerate(split.test_slots):
        ratio = slot.positive_ratio
        ok = lo <= ratio <= hi
        passed &= ok
        per_slot.append({"slot": k, "ratio": ratio, "low": lo, "high": hi, "pass": ok})
    return ConstraintVerdict("C3", passed, per_slot=tuple(per_slot))


def run_all_checks(split: TemporalSplit) -> dict[str, ConstraintVerdict]:
    return {"C1": check_c1(split), "C2": check_c2(split), "C3": check_c3(split)}


# ---------------------------------------------------------------------------
# Split manifests: a features-free description of a split (ids, timestamps,
# labels) that the audit tooling can re-check without the original data.
# ---------------------------------------------------------------------------

MANIFEST_VERSION = 1


def split_to_manifest(split: TemporalSplit) -> dict:
    def rows(d: LabeledDataset) -> list[dict]:
        return [
            {"id": s.id, "timestamp": s.timestamp.isoformat(), "label": s.label} for s in d
        ]

    return {
        "manifest_version": MANIFEST_VERSION,
        "spec": {
            "origin": split.spec.origin.isoformat(),
            "train_window": str(split.spec.train_window),
            "test_window": str(split.spec.test_window),
            "slot_width": str(split.spec.slot_width),
        },
        "ratios": {
            "sigma_hat": split.ratios.sigma_hat,
            "phi": split.ratios.phi,
            "delta": split.ratios.delta,
            "per_slot_tolerance": split.ratios.per_slot_tolerance,
        },
        "train": rows(split.train),
        "test_slots": [rows(s) for s in split.test_slots],
    }


def split_from_manifest(blob: dict) -> TemporalSplit:
    if blob.get("manifest_version") != MANIFEST_VERSION:
        raise ValueError(f"unsupported manifest version {blob.get('manifest_version')!r}")

    def dataset(rows: Sequence[dict]) -> LabeledDataset:
        return LabeledDataset(
            [r["id"] for r in rows],
            [date.fromisoformat(r["timestamp"]) for r in rows],
            [int(r["label"]) for r in rows],
            np.zeros((len(rows), 0)),
        )

    spec = SplitSpec(
        train_window=Period.parse(blob["spec"]["train_window"]),
        test_window=Period.parse(blob["spec"]["test_window"]),
        slot_width=Period.parse(blob["spec"]["slot_width"]),
        origin=date.fromisoformat(blob["spec"]["origin"]),
    )
    ratios = RatioSpec(
        sigma_hat=blob["ratios"]["sigma_hat"],
        phi=blob["ratios"]["phi"],
        delta=blob["ratios"]["delta"],
        per_slot_tolerance=blob["ratios"]["per_slot_tolerance"],
    )
    return TemporalSplit(
        dataset(blob["train"]),
        tuple(dataset(rows) for rows in blob["test_slots"]),
        spec,
        ratios,
    )
