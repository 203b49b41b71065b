"""Seeded generator of timestamped two-class datasets with controllable drift.

Two decay mechanisms are modelled, matching how evasive classes behave:

* the main positive cluster sits at radius 3 * spread from the negative
  cluster and its center moves ``drift_velocity`` length units per month
  *along* that circle (in the first two feature dimensions). Separation
  from the negative class stays constant, so a freshly retrained model
  always works, but a stale decision boundary points at where the
  positives used to be and erodes month by month;
* each month a fraction ``family_churn`` of that month's positives is
  drawn from a freshly spawned sub-cluster at a random direction (same
  radius), so classifiers that memorize known regions miss the new ones.

Everything is driven by :mod:`driftlab.rng` streams, so a (spec, seed)
pair is a complete description of the dataset — exports are byte-stable.
"""

from __future__ import annotations

import calendar
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .dataset import LabeledDataset, add_months
from .rng import derive_rng

__all__ = ["DriftSpec", "generate"]


@dataclass(frozen=True)
class DriftSpec:
    months: int
    samples_per_month: int
    dim: int = 2
    positive_ratio: float = 0.10
    ratio_jitter: float = 0.02
    drift_velocity: float = 0.0
    spread: float = 1.0
    family_churn: float = 0.0
    start: date = date(2014, 1, 1)

    def __post_init__(self) -> None:
        if self.months < 1 or self.samples_per_month < 2:
            raise ValueError("need >= 1 month and >= 2 samples per month")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not (0.0 < self.positive_ratio < 1.0):
            raise ValueError("positive_ratio must lie in (0, 1)")
        if self.ratio_jitter < 0 or self.drift_velocity < 0 or self.spread <= 0:
            raise ValueError("ratio_jitter/drift_velocity must be >= 0, spread > 0")
        if not (0.0 <= self.family_churn <= 1.0):
            raise ValueError("family_churn must lie in [0, 1]")
        if (self.family_churn > 0 or self.drift_velocity > 0) and self.dim < 2:
            raise ValueError("drift and family_churn need dim >= 2 to place directions")


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def generate(spec: DriftSpec, seed: int) -> LabeledDataset:
    """Materialize the dataset described by ``spec`` under ``seed``.

    Both classes are present every month (positive counts are clamped to
    [1, n-1]); realized per-month positive counts are the rounding of the
    jittered per-month target; timestamps are uniform within each month.
    """
    radius = 3.0 * spec.spread

    ids: list[str] = []
    stamps: list[date] = []
    labels: list[int] = []
    rows: list[np.ndarray] = []
    for m in range(spec.months):
        rng = derive_rng(seed, "synthgen", "month", m)
        month_start = add_months(spec.start, m)
        n_days = calendar.monthrange(month_start.year, month_start.month)[1]
        n = spec.samples_per_month
        ratio_m = spec.positive_ratio + rng.uniform(-spec.ratio_jitter, spec.ratio_jitter)
        n_pos = int(np.clip(np.rint(n * ratio_m), 1, n - 1))
        n_neg = n - n_pos

        feats = np.empty((n, spec.dim))
        feats[:n_neg] = rng.normal(0.0, spec.spread, size=(n_neg, spec.dim))
        # Arc displacement of drift_velocity per month at constant radius.
        angle = spec.drift_velocity * m / radius
        center = np.zeros(spec.dim)
        center[0] = radius * np.cos(angle)
        if spec.dim >= 2:
            center[1] = radius * np.sin(angle)
        n_new = int(np.rint(spec.family_churn * n_pos))
        n_main = n_pos - n_new
        feats[n_neg : n_neg + n_main] = rng.normal(center, spec.spread, size=(n_main, spec.dim))
        if n_new:
            family_center = _unit(rng.normal(size=spec.dim)) * radius
            feats[n_neg + n_main :] = rng.normal(
                family_center, spec.spread, size=(n_new, spec.dim)
            )

        month_labels = [0] * n_neg + [1] * n_pos
        days = rng.integers(0, n_days, size=n)
        order = rng.permutation(n)
        for rank, i in enumerate(order):
            ids.append(f"m{m:03d}-{rank:05d}")
            stamps.append(month_start + timedelta(days=int(days[i])))
            labels.append(month_labels[i])
            rows.append(feats[i])
    return LabeledDataset(ids, stamps, labels, np.array(rows))
