"""Strategies that trade labeling/quarantine budget against time decay.

Four policies over a constraint-respecting split:

* ``none``           — train once, score every slot; zero cost.
* ``incremental``    — after scoring slot i, all of slot i is labeled and
  joins the training pool for the model that scores slot i+1 (the upper
  bound: L counts every test object).
* ``active_learning``— after scoring slot i, the ceil(budget * |slot|)
  most-uncertain objects are labeled and join the pool; L is therefore
  known before the run starts.
* ``rejection``      — one model, but predictions whose predicted-class
  probability falls at or below a threshold are quarantined: excluded
  from the confusions, counted in Q. The threshold is the third quartile
  of the predicted-class probabilities of the mistakes a held-out-time
  validation cut exposes; rejection never alters the model or a score.

Labels are revealed only after a slot has been scored, so the next
retraining still satisfies the training-precedes-testing constraint. The
ground truth plays the human analyst.
"""

from __future__ import annotations

import csv
import math
import warnings as _warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .classifiers import Classifier, TrainedModel, score_dataset
from .dataset import LabeledDataset, Period, concat
from .metrics import (
    Confusion,
    MetricCurve,
    SlotSeries,
    aut,
    point_estimates,
)
from .rng import derive_rng
from .splits import SplitSpec, TemporalSplit, enforce_ratio, run_all_checks
from .tuning import TuningConfig, proper_validation_cut, tune_phi

__all__ = [
    "DelayPolicy",
    "CostLedger",
    "DelayRunResult",
    "NoMisclassificationError",
    "ConstraintViolationError",
    "run_policy",
    "select_uncertain",
    "rejection_threshold",
    "write_delay_summary_csv",
    "write_delay_slots_csv",
]

POLICY_KINDS = ("none", "incremental", "active_learning", "rejection")


class NoMisclassificationError(ValueError):
    """Validation produced zero mistakes; rejection threshold undefined."""


class ConstraintViolationError(ValueError):
    """A split handed to run_policy fails C1/C2/C3."""


@dataclass(frozen=True)
class DelayPolicy:
    kind: str = "none"
    al_budget: float | None = None
    retune_each_step: bool = False
    refresh_threshold: bool = False

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"kind must be one of {POLICY_KINDS}, got {self.kind!r}")
        if self.kind == "active_learning":
            if self.al_budget is None or not (0.0 < self.al_budget <= 1.0):
                raise ValueError("active_learning needs al_budget in (0, 1]")
        elif self.al_budget is not None:
            raise ValueError("al_budget is only meaningful for active_learning")
        if self.refresh_threshold and self.kind != "rejection":
            raise ValueError("refresh_threshold only applies to rejection")

    @property
    def label(self) -> str:
        if self.kind == "active_learning":
            return f"active_learning:{self.al_budget}"
        return self.kind


@dataclass(frozen=True)
class CostLedger:
    """L test objects labeled, Q quarantined, P = AUT(F1) of the run."""

    labeled: int
    quarantined: int
    aut_f1: float

    def __post_init__(self) -> None:
        if self.labeled < 0 or self.quarantined < 0:
            raise ValueError("costs must be non-negative")


@dataclass(frozen=True)
class DelayRunResult:
    policy: DelayPolicy
    curves: dict[str, MetricCurve]
    series: SlotSeries
    per_slot_labeled: tuple[int, ...]
    per_slot_rejected: tuple[int, ...]
    ledger: CostLedger
    tuned_phis: tuple[float, ...] = ()
    threshold: float | None = None
    warnings: tuple[str, ...] = field(default=())


def select_uncertain(
    model: TrainedModel, slot: LabeledDataset, budget_count: int
) -> list[str]:
    """Ids of the budget_count most-uncertain slot members.

    Uncertainty is 1 minus the predicted-class probability, i.e. largest
    first means smallest |score - 0.5| first; exact ties fall back to
    ascending id. Returned most-uncertain first.
    """
    if budget_count > len(slot):
        raise ValueError(f"budget {budget_count} exceeds slot size {len(slot)}")
    conf = np.abs(score_dataset(model, slot) - 0.5)
    order = sorted(range(len(slot)), key=lambda i: (conf[i], slot.ids[i]))
    return [slot.ids[i] for i in order[:budget_count]]


def _predicted_class_probs(model: TrainedModel, d: LabeledDataset) -> tuple[np.ndarray, np.ndarray]:
    s = score_dataset(model, d)
    pred = (s >= 0.5).astype(np.int64)
    return np.maximum(s, 1.0 - s), pred


def rejection_threshold(model: TrainedModel, validation: LabeledDataset) -> float:
    """Q3 (linear interpolation) of predicted-class probabilities of mistakes."""
    probs, pred = _predicted_class_probs(model, validation)
    wrong = probs[pred != validation.labels]
    if len(wrong) == 0:
        raise NoMisclassificationError(
            "no misclassified validation sample; rejection threshold undefined"
        )
    return float(np.quantile(wrong, 0.75, method="linear"))


def _al_count(budget: float, slot_size: int) -> int:
    # ceil of the exact decimal product; float multiplication would turn
    # 0.1 * 30 into 3.0000000000000004 and over-charge the budget.
    return math.ceil(Fraction(str(budget)) * slot_size)


def _extended_spec(spec: SplitSpec, extra_slots: int) -> SplitSpec:
    w, d = spec.train_window, spec.slot_width
    if w.months and d.months:
        new_w = Period(months=w.months + extra_slots * d.months)
    elif w.days and d.days:
        new_w = Period(days=w.days + extra_slots * d.days)
    else:
        raise ValueError("retune_each_step needs train_window and slot_width in the same unit")
    return SplitSpec(new_w, spec.test_window, spec.slot_width, spec.origin)


def run_policy(
    split: TemporalSplit,
    clf: Classifier,
    policy: DelayPolicy,
    cfg: TuningConfig | None = None,
    seed: int = 0,
) -> DelayRunResult:
    """Simulate a delay strategy over the split's test slots, in time order.

    The model that scores slot 0 is identical across policies for the same
    seed, so rejection's kept-set metrics are directly comparable with the
    ``none`` baseline. With ``retune_each_step``, the training ratio is
    re-derived on the grown pool before every retraining.
    """
    verdicts = run_all_checks(split)
    failed = [k for k, v in verdicts.items() if not v.passed]
    if failed:
        raise ConstraintViolationError(f"split violates {failed}")
    if cfg is None:
        cfg = TuningConfig(sigma_hat=split.ratios.sigma_hat)

    slots = split.test_slots
    n = len(slots)
    run_warnings: list[str] = []

    threshold: float | None = None
    wrong_probs_pool: list[float] = []
    if policy.kind == "rejection":
        proper, val_slots, _ = proper_validation_cut(split.train, split.spec, cfg, seed)
        thresh_model = clf.fit(
            proper, int(derive_rng(seed, "delay", "reject_fit").integers(2**31))
        )
        val_pool = concat(val_slots)
        try:
            threshold = rejection_threshold(thresh_model, val_pool)
            val_probs, val_pred = _predicted_class_probs(thresh_model, val_pool)
            wrong_probs_pool = [float(v) for v in val_probs[val_pred != val_pool.labels]]
        except NoMisclassificationError:
            run_warnings.append("no validation misclassifications; rejection disabled")
            threshold = None

    pool = split.train
    model = clf.fit(pool, int(derive_rng(seed, "delay", "fit", 0).integers(2**31)))

    confusions: list[Confusion] = []
    per_slot_labeled = [0] * n
    per_slot_rejected = [0] * n
    tuned_phis: list[float] = []

    for i, slot in enumerate(slots):
        probs, pred = _predicted_class_probs(model, slot)
        if policy.kind == "rejection" and threshold is not None:
            kept = probs > threshold
            per_slot_rejected[i] = int((~kept).sum())
            confusions.append(
                Confusion.from_predictions(slot.labels[kept], pred[kept])
                if kept.any()
                else Confusion()
            )
            if policy.refresh_threshold:
                # Quarantined objects get inspected (that is what Q pays
                # for), so their outcomes may refresh the quantile.
                newly_wrong = probs[(~kept) & (pred != slot.labels)]
                wrong_probs_pool.extend(float(v) for v in newly_wrong)
                threshold = float(np.quantile(np.array(wrong_probs_pool), 0.75, method="linear"))
        else:
            confusions.append(Confusion.from_predictions(slot.labels, pred))

        if policy.kind == "incremental":
            per_slot_labeled[i] = len(slot)
            pool = concat([pool, slot])
        elif policy.kind == "active_learning":
            count = _al_count(policy.al_budget, len(slot))
            per_slot_labeled[i] = count
            if count:
                chosen = select_uncertain(model, slot, count)
                pool = concat([pool, slot.subset([slot.index_of(c) for c in chosen])])

        retrains = policy.kind in ("incremental", "active_learning")
        if retrains and i < n - 1:
            fit_pool = pool
            if policy.retune_each_step:
                spec_i = _extended_spec(split.spec, i + 1)
                result = tune_phi(
                    pool, clf, cfg, spec_i, int(derive_rng(seed, "delay", "retune", i).integers(2**31))
                )
                tuned_phis.append(result.phi_star)
                fit_pool = enforce_ratio(
                    pool,
                    result.phi_star,
                    "random",
                    seed=int(derive_rng(seed, "delay", "retune_ratio", i).integers(2**63)),
                )
            model = clf.fit(
                fit_pool, int(derive_rng(seed, "delay", "fit", i + 1).integers(2**31))
            )

    if policy.kind == "active_learning" and all(c == 0 for c in per_slot_labeled):
        _warnings.warn("active-learning budget rounded to zero for every slot")
        run_warnings.append("budget rounded to zero for every slot")

    series = SlotSeries(tuple(confusions), split.slot_starts)
    curves = {m: point_estimates(series, m) for m in ("f1", "precision", "recall")}
    ledger = CostLedger(
        labeled=sum(per_slot_labeled),
        quarantined=sum(per_slot_rejected),
        aut_f1=aut(curves["f1"]),
    )
    return DelayRunResult(
        policy=policy,
        curves=curves,
        series=series,
        per_slot_labeled=tuple(per_slot_labeled),
        per_slot_rejected=tuple(per_slot_rejected),
        ledger=ledger,
        tuned_phis=tuple(tuned_phis),
        threshold=threshold,
        warnings=tuple(run_warnings),
    )


# ---------------------------------------------------------------------------
# CSV serialization (summary shaped like a performance/cost table, plus a
# per-slot detail file)
# ---------------------------------------------------------------------------


def write_delay_summary_csv(path: str, rows: list[tuple[str, DelayRunResult]]) -> None:
    """rows: (phi_mode_label, result) pairs, e.g. ('sigma_hat', result)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["policy", "phi_mode", "L", "Q", "AUT_F1"])
        for phi_mode, res in rows:
            writer.writerow(
                [
                    res.policy.label,
                    phi_mode,
                    res.ledger.labeled,
                    res.ledger.quarantined,
                    repr(res.ledger.aut_f1),
                ]
            )


def write_delay_slots_csv(path: str, res: DelayRunResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["slot", "timestamp", "labeled", "rejected", "f1", "precision", "recall"]
        )
        for k in range(res.series.n_slots):
            writer.writerow(
                [
                    k,
                    res.series.slot_starts[k].isoformat(),
                    res.per_slot_labeled[k],
                    res.per_slot_rejected[k],
                    repr(res.curves["f1"].values[k]),
                    repr(res.curves["precision"].values[k]),
                    repr(res.curves["recall"].values[k]),
                ]
            )
