"""Tuning the training class ratio under an error budget.

The deployment-time positive rate (here 10%) binds the *test* mix, but
nothing forces training to use it. This demo grid-searches the training
ratio phi from 10% to 50%, scoring each candidate by validation AUT
subject to a ceiling on the target-specific error, and prints the audit
table. Training at phi* then typically trades a little precision for
recall on the minority class.
"""

from datetime import date

from driftlab import (
    DriftSpec,
    LinearSGDClassifier,
    Period,
    SplitSpec,
    TuningConfig,
    generate,
    tune_phi,
)


def main():
    d = generate(
        DriftSpec(months=12, samples_per_month=200, drift_velocity=0.25), seed=0
    )
    spec = SplitSpec(
        train_window=Period(months=12),
        test_window=Period(months=2),  # unused here: tuning never sees test data
        slot_width=Period(months=1),
        origin=date(2014, 1, 1),
    )
    train = d.between(date(2014, 1, 1), date(2015, 1, 1))

    for target in ("f1", "recall", "precision"):
        cfg = TuningConfig(target=target)
        result = tune_phi(train, LinearSGDClassifier(epochs=30), cfg, spec, seed=0)
        print(f"\ntarget={target}  (error ceiling {cfg.e_max})")
        print("  phi    AUT     error   ")
        for g in result.grid:
            mark = " <- phi*" if g.selected else ""
            print(f"  {g.phi:.2f}  {g.aut:.4f}  {g.error:.4f}{mark}")
        note = "" if result.constraint_met else "  [ceiling unattainable: fallback]"
        print(f"  phi* = {result.phi_star:.2f}, validation AUT {result.best_aut:.4f}{note}")


if __name__ == "__main__":
    main()
