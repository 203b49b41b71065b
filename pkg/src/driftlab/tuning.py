"""Grid search over the training positive ratio phi under an error budget.

The search maximizes the validation-time area under the target metric's
decay curve, subject to a target-specific error ceiling:

* target f1        -> error = 1 - accuracy, default ceiling 0.10
* target recall    -> error = false-positive rate, default ceiling 0.05
* target precision -> error = false-negative rate, default ceiling 0.15

The training window is cut in time into a proper-training part and a
validation tail (default: the last third, sliced into the experiment's
slot width and downsampled per slot to sigma_hat). phi runs from
sigma_hat to 0.5 in steps of mu: below sigma_hat the positive class would
be under-represented, above 0.5 it would become the majority. Goodware is
downsampled uncertainty-first (scored by a model fit on the full
proper-training pool) so the points that define the boundary survive.
The grid start phi = sigma_hat is the unconditional fallback: a later phi
replaces it only by strictly improving the validation area while meeting
the ceiling, so ties resolve to the smallest phi. No test-period data can
influence the result; tune_phi never sees the test window.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import date

from .classifiers import Classifier
from .dataset import LabeledDataset, add_period
from .metrics import (
    Confusion,
    aut,
    confusion_counts,
    error_rate,
    point_estimates,
    slot_series,
)
from .rng import derive_rng
from .splits import EmptySlotError, SplitSpec, enforce_ratio

__all__ = [
    "TuningConfig",
    "GridPoint",
    "TuningResult",
    "ValidationWindowError",
    "tune_phi",
    "proper_validation_cut",
    "write_grid_csv",
]

DEFAULT_E_MAX = {"f1": 0.10, "recall": 0.05, "precision": 0.15}


class ValidationWindowError(ValueError):
    """Training window cannot host a >= 2-slot validation tail."""


@dataclass(frozen=True)
class TuningConfig:
    mu: float = 0.05
    target: str = "f1"
    e_max: float | None = None
    validation_fraction: float = 1.0 / 3.0
    sigma_hat: float = 0.10

    def __post_init__(self) -> None:
        if not (0.0 < self.mu <= 0.5):
            raise ValueError(f"mu must lie in (0, 0.5], got {self.mu}")
        if self.target not in DEFAULT_E_MAX:
            raise ValueError(f"target must be one of {sorted(DEFAULT_E_MAX)}")
        if not (0.0 < self.validation_fraction < 1.0):
            raise ValueError("validation_fraction must lie in (0, 1)")
        if not (0.0 < self.sigma_hat <= 0.5):
            raise ValueError("sigma_hat must lie in (0, 0.5]")
        if self.e_max is None:
            object.__setattr__(self, "e_max", DEFAULT_E_MAX[self.target])

    def grid(self) -> tuple[float, ...]:
        """phi values sigma_hat, sigma_hat + mu, ... up to and including 0.5."""
        phis = []
        j = 0
        while True:
            phi = self.sigma_hat + j * self.mu
            if phi > 0.5 + 1e-9:
                break
            phis.append(min(phi, 0.5))
            j += 1
        return tuple(phis)


@dataclass(frozen=True)
class GridPoint:
    phi: float
    aut: float
    error: float
    selected: bool


@dataclass(frozen=True)
class TuningResult:
    phi_star: float
    best_aut: float
    achieved_error: float
    constraint_met: bool
    grid: tuple[GridPoint, ...]
    target: str

    def as_dict(self) -> dict:
        return {
            "phi_star": self.phi_star,
            "best_aut": self.best_aut,
            "achieved_error": self.achieved_error,
            "constraint_met": self.constraint_met,
            "target": self.target,
            "grid": [vars(g) for g in self.grid],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def proper_validation_cut(
    train: LabeledDataset,
    spec: SplitSpec,
    cfg: TuningConfig,
    seed: int,
) -> tuple[LabeledDataset, tuple[LabeledDataset, ...], tuple[date, ...]]:
    """Split a training pool in time into (proper_train, val_slots, starts).

    The validation tail is floor(n_slots * validation_fraction) slots of
    the experiment's slot width, counted back from the end of the training
    window; each slot is downsampled to sigma_hat so the validation mix
    matches deployment.
    """
    train_end = spec.test_origin
    n_slots = spec.train_window.slots_of(spec.slot_width)
    n_val = int(n_slots * cfg.validation_fraction)
    if n_val < 2:
        raise ValidationWindowError(
            f"validation_fraction {cfg.validation_fraction} of {n_slots} slots "
            f"gives {n_val} validation slots; need >= 2"
        )
    val_start = add_period(train_end, spec.slot_width, -n_val)
    proper_idx = [i for i, t in enumerate(train.timestamps) if t < val_start]
    if not proper_idx:
        raise ValidationWindowError("no samples left before the validation window")
    proper = train.subset(proper_idx)
    if proper.n_positive == 0 or proper.n_negative == 0:
        raise EmptySlotError("proper-training window lacks one class")
    slots, starts = [], []
    for k in range(n_val):
        lo = add_period(val_start, spec.slot_width, k)
        hi = add_period(val_start, spec.slot_width, k + 1)
        idx = [i for i, t in enumerate(train.timestamps) if lo <= t < hi]
        if not idx:
            raise EmptySlotError(f"validation slot {k} ([{lo}, {hi})) is empty")
        slot = train.subset(idx)
        if slot.n_positive == 0 or slot.n_negative == 0:
            raise EmptySlotError(f"validation slot {k} ([{lo}, {hi})) lacks one class")
        slots.append(
            enforce_ratio(
                slot,
                cfg.sigma_hat,
                "random",
                seed=int(derive_rng(seed, "tuning", "val", k).integers(2**63)),
            )
        )
        starts.append(lo)
    return proper, tuple(slots), tuple(starts)


def tune_phi(
    train: LabeledDataset,
    clf: Classifier,
    cfg: TuningConfig,
    spec: SplitSpec,
    seed: int,
) -> TuningResult:
    """Pick the training ratio phi* maximizing validation AUT under e_max.

    Returns the full grid table for audit. When no phi beats the
    sigma_hat start under the error ceiling, phi* stays at sigma_hat;
    ``constraint_met`` records whether the returned point itself satisfies
    the ceiling.
    """
    proper, val_slots, starts = proper_validation_cut(train, spec, cfg, seed)
    scorer = clf.fit(proper, int(derive_rng(seed, "tuning", "scorer").integers(2**31)))

    evaluations: list[tuple[float, float, float]] = []
    for j, phi in enumerate(cfg.grid()):
        downsampled = enforce_ratio(
            proper,
            phi,
            "uncertainty_prioritized",
            scorer=scorer,
            seed=int(derive_rng(seed, "tuning", "downsample", j).integers(2**63)),
        )
        if downsampled.n_positive == 0 or downsampled.n_negative == 0:
            raise EmptySlotError(f"proper-training pool single-class at phi={phi}")
        model = clf.fit(downsampled, int(derive_rng(seed, "tuning", "fit", j).integers(2**31)))
        series = slot_series(model, val_slots, starts)
        area = aut(point_estimates(series, cfg.target))
        pooled = Confusion()
        for slot in val_slots:
            pooled = pooled + confusion_counts(model, slot)
        evaluations.append((phi, area, error_rate(pooled, cfg.target)))

    # Selection: start pinned at sigma_hat, strict improvement under e_max.
    best_j = 0
    for j in range(1, len(evaluations)):
        _, area, err = evaluations[j]
        if area > evaluations[best_j][1] and err <= cfg.e_max:
            best_j = j
    phi_star, best_area, achieved_err = evaluations[best_j]
    grid = tuple(
        GridPoint(phi, area, err, j == best_j)
        for j, (phi, area, err) in enumerate(evaluations)
    )
    return TuningResult(
        phi_star=phi_star,
        best_aut=best_area,
        achieved_error=achieved_err,
        constraint_met=achieved_err <= cfg.e_max,
        grid=grid,
        target=cfg.target,
    )


def write_grid_csv(path: str, result: TuningResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["phi", "aut", "error", "selected"])
        for g in result.grid:
            writer.writerow([repr(g.phi), repr(g.aut), repr(g.error), int(g.selected)])
