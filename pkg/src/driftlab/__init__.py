"""driftlab: time-aware, class-ratio-aware evaluation of binary classifiers.

The library builds evaluations that respect three constraints — training
strictly precedes testing, test slots are temporally homogeneous, and the
test-time class mix matches deployment — then measures robustness to time
decay as the area under the per-slot performance curve (AUT), tunes the
training class ratio under an error budget, and simulates budgeted
strategies (incremental retraining, active learning, rejection) for
delaying decay.
"""

from .classifiers import (
    Classifier,
    KNNClassifier,
    LinearSGDClassifier,
    TrainedModel,
    confidence,
    load_model,
    predict,
    predict_dataset,
    save_model,
    score,
    score_dataset,
)
from .dataset import (
    DatasetSummary,
    LabeledDataset,
    Period,
    Sample,
    concat,
    load_dataset,
    slot_index,
    summarize,
    write_csv,
    write_jsonl,
)
from .delay import (
    CostLedger,
    DelayPolicy,
    DelayRunResult,
    rejection_threshold,
    run_policy,
    select_uncertain,
)
from .metrics import (
    Confusion,
    MetricCurve,
    SlotSeries,
    aut,
    confusion_counts,
    cumulative_estimates,
    error_rate,
    kfold_eval,
    point_estimates,
    prf1,
    slot_series,
)
from .rng import derive_rng, derive_seed_sequence
from .splits import (
    RatioSpec,
    SplitSpec,
    TemporalSplit,
    check_c1,
    check_c2,
    check_c3,
    enforce_ratio,
    run_all_checks,
    time_aware_split,
)
from .synthgen import DriftSpec, generate
from .tuning import TuningConfig, TuningResult, tune_phi

__version__ = "0.1.0"

__all__ = [
    "Classifier",
    "KNNClassifier",
    "LinearSGDClassifier",
    "TrainedModel",
    "confidence",
    "load_model",
    "predict",
    "predict_dataset",
    "save_model",
    "score",
    "score_dataset",
    "DatasetSummary",
    "LabeledDataset",
    "Period",
    "Sample",
    "concat",
    "load_dataset",
    "slot_index",
    "summarize",
    "write_csv",
    "write_jsonl",
    "CostLedger",
    "DelayPolicy",
    "DelayRunResult",
    "rejection_threshold",
    "run_policy",
    "select_uncertain",
    "Confusion",
    "MetricCurve",
    "SlotSeries",
    "aut",
    "confusion_counts",
    "cumulative_estimates",
    "error_rate",
    "kfold_eval",
    "point_estimates",
    "prf1",
    "slot_series",
    "derive_rng",
    "derive_seed_sequence",
    "RatioSpec",
    "SplitSpec",
    "TemporalSplit",
    "check_c1",
    "check_c2",
    "check_c3",
    "enforce_ratio",
    "run_all_checks",
    "time_aware_split",
    "DriftSpec",
    "generate",
    "TuningConfig",
    "TuningResult",
    "tune_phi",
]
